//! Wigner 3-j and 6-j symbols.
//!
//! Both symbols are evaluated with the Racah single-sum formulas in exact
//! integer arithmetic. The alternating sum and the square of the prefactor
//! are kept as big rationals, so the only rounding happens in the final
//! conversion `sign(S) * sqrt(S^2 * P)` to `f64`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An integer or half-integer quantum number, stored as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(value: i32) -> Self {
        HalfInt(2 * value)
    }

    /// Converts a float that is an exact multiple of 1/2.
    pub fn from_f64(value: f64) -> Option<Self> {
        let twice = value * 2.0;
        if twice.is_finite() && twice.fract() == 0.0 && twice.abs() < i32::MAX as f64 {
            Some(HalfInt(twice as i32))
        } else {
            None
        }
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// `2j + 1`
    pub const fn multiplicity(self) -> i32 {
        self.0 + 1
    }

    /// Projections `-j, -j+1, ..., j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        (-self.0..=self.0).step_by(2).map(HalfInt)
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl From<i32> for HalfInt {
    fn from(value: i32) -> Self {
        HalfInt::from_int(value)
    }
}

/// `(-1)^k` for a quantity that must be an integer.
pub(crate) fn parity_sign(twice: i32) -> f64 {
    debug_assert!(twice % 2 == 0, "phase exponent must be an integer");
    if (twice / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn check_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.0 < 0 {
        return Err(Error::Angular(format!("negative angular momentum j = {j}")));
    }
    if m.0.abs() > j.0 {
        return Err(Error::Angular(format!("projection m = {m} exceeds j = {j}")));
    }
    if (j.0 - m.0) % 2 != 0 {
        return Err(Error::Angular(format!(
            "j = {j} and m = {m} are not both integer or both half-integer"
        )));
    }
    Ok(())
}

fn check_momentum(j: HalfInt) -> Result<()> {
    if j.0 < 0 {
        return Err(Error::Angular(format!("negative angular momentum j = {j}")));
    }
    Ok(())
}

/// True when `(a, b, c)` satisfy the triangle rule with an integer perimeter.
pub fn is_triad(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    let (a, b, c) = (a.0, b.0, c.0);
    (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

/// Triangle coefficient `(a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!`, arguments doubled.
fn triangle_coefficient(a: i32, b: i32, c: i32) -> BigRational {
    BigRational::new(
        factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2),
        factorial((a + b + c) / 2 + 1),
    )
}

/// Returns `sign(sum) * sqrt(sum^2 * prefactor_sq)` as a float.
fn signed_sqrt_product(sum: &BigRational, prefactor_sq: &BigRational) -> f64 {
    if sum.is_zero() {
        return 0.0;
    }
    let magnitude_sq = sum * sum * prefactor_sq;
    let magnitude = magnitude_sq.to_f64().unwrap_or(f64::NAN).sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Wigner 3-j symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Returns exactly zero when the projections do not sum to zero or the
/// triangle rule fails. Negative `j`, `|m| > j`, or a `j`/`m` parity mismatch
/// are rejected.
pub fn wigner3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    check_pair(j3, m3)?;
    if m1.0 + m2.0 + m3.0 != 0 || !is_triad(j1, j2, j3) {
        return Ok(0.0);
    }
    let (j1, j2, j3, m1, m2, m3) = (j1.0, j2.0, j3.0, m1.0, m2.0, m3.0);

    // Every argument below is an even number of half units.
    let h = |x: i32| x / 2;
    let k_min = 0.max(h(j2 - j3 - m1)).max(h(j1 - j3 + m2));
    let k_max = h(j1 + j2 - j3).min(h(j1 - m1)).min(h(j2 + m2));

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(h(j3 - j2 + m1) + k)
            * factorial(h(j3 - j1 - m2) + k)
            * factorial(h(j1 + j2 - j3) - k)
            * factorial(h(j1 - m1) - k)
            * factorial(h(j2 + m2) - k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let prefactor_sq = triangle_coefficient(j1, j2, j3)
        * BigRational::from_integer(
            factorial(h(j1 + m1))
                * factorial(h(j1 - m1))
                * factorial(h(j2 + m2))
                * factorial(h(j2 - m2))
                * factorial(h(j3 + m3))
                * factorial(h(j3 - m3)),
        );

    Ok(parity_sign(j1 - j2 - m3) * signed_sqrt_product(&sum, &prefactor_sq))
}

/// Wigner 6-j symbol `{j1 j2 j3; j4 j5 j6}`.
///
/// Zero when any of the triads (j1 j2 j3), (j1 j5 j6), (j4 j2 j6),
/// (j4 j5 j3) violates the triangle rule.
pub fn wigner6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> Result<f64> {
    for j in [j1, j2, j3, j4, j5, j6] {
        check_momentum(j)?;
    }
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if !triads.iter().all(|&(a, b, c)| is_triad(a, b, c)) {
        return Ok(0.0);
    }
    let (j1, j2, j3, j4, j5, j6) = (j1.0, j2.0, j3.0, j4.0, j5.0, j6.0);
    let a = [
        (j1 + j2 + j3) / 2,
        (j1 + j5 + j6) / 2,
        (j4 + j2 + j6) / 2,
        (j4 + j5 + j3) / 2,
    ];
    let b = [
        (j1 + j2 + j4 + j5) / 2,
        (j2 + j3 + j5 + j6) / 2,
        (j3 + j1 + j6 + j4) / 2,
    ];
    let t_min = *a.iter().max().unwrap();
    let t_max = *b.iter().min().unwrap();

    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let denom = a.iter().fold(BigInt::one(), |acc, &ai| acc * factorial(t - ai))
            * b.iter().fold(BigInt::one(), |acc, &bi| acc * factorial(bi - t));
        let term = BigRational::new(factorial(t + 1), denom);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let prefactor_sq = triangle_coefficient(j1, j2, j3)
        * triangle_coefficient(j1, j5, j6)
        * triangle_coefficient(j4, j2, j6)
        * triangle_coefficient(j4, j5, j3);

    Ok(signed_sqrt_product(&sum, &prefactor_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hi(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn w3(j: [i32; 3], m: [i32; 3]) -> f64 {
        wigner3j(
            HalfInt::from_int(j[0]),
            HalfInt::from_int(j[1]),
            HalfInt::from_int(j[2]),
            HalfInt::from_int(m[0]),
            HalfInt::from_int(m[1]),
            HalfInt::from_int(m[2]),
        )
        .unwrap()
    }

    #[test]
    fn halfint_display_and_projections() {
        assert_eq!(hi(3).to_string(), "3/2");
        assert_eq!(hi(4).to_string(), "2");
        let ms: Vec<i32> = hi(3).projections().map(HalfInt::twice).collect();
        assert_eq!(ms, vec![-3, -1, 1, 3]);
        assert_eq!(HalfInt::ZERO.projections().count(), 1);
        assert_eq!(HalfInt::from_f64(1.5), Some(hi(3)));
        assert_eq!(HalfInt::from_f64(1.25), None);
    }

    #[test]
    fn known_three_j_values() {
        // Closed form for (j j 0; m -m 0) = (-1)^(j-m)/sqrt(2j+1).
        assert_abs_diff_eq!(w3([1, 1, 0], [0, 0, 0]), -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(w3([1, 2, 4], [0, 0, 0]), 0.0);
        // (1 1 1; 1 0 -1) = -1/sqrt(6)
        assert_abs_diff_eq!(w3([1, 1, 1], [1, 0, -1]), -1.0 / 6f64.sqrt(), epsilon = 1e-15);
        // (1 1 2; 0 0 0) = sqrt(2/15)
        assert_abs_diff_eq!(w3([1, 1, 2], [0, 0, 0]), (2.0f64 / 15.0).sqrt(), epsilon = 1e-15);
        // Odd J sum with all m = 0 vanishes.
        assert_eq!(w3([1, 1, 1], [0, 0, 0]), 0.0);
    }

    #[test]
    fn half_integer_three_j() {
        // (1/2 1/2 1; 1/2 -1/2 0) = 1/sqrt(6)
        let v = wigner3j(hi(1), hi(1), hi(2), hi(1), hi(-1), hi(0)).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 6f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn projection_sum_rule_gives_zero() {
        assert_eq!(w3([1, 1, 1], [1, 1, -1]), 0.0);
    }

    #[test]
    fn invalid_arguments_are_errors() {
        assert!(wigner3j(hi(-2), hi(2), hi(0), hi(0), hi(0), hi(0)).is_err());
        assert!(wigner3j(hi(2), hi(2), hi(0), hi(4), hi(-4), hi(0)).is_err());
        assert!(wigner3j(hi(2), hi(2), hi(0), hi(1), hi(-1), hi(0)).is_err());
        assert!(wigner6j(hi(2), hi(2), hi(-2), hi(2), hi(2), hi(2)).is_err());
    }

    #[test]
    fn six_j_known_values() {
        // {1 1 1; 1 1 1} = 1/6
        let v = wigner6j(hi(2), hi(2), hi(2), hi(2), hi(2), hi(2)).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 6.0, epsilon = 1e-15);
        // {1/2 1/2 1; 1/2 1/2 0} = (-1)^(1/2+1/2+1) ... zero-argument closed form
        let v = wigner6j(hi(1), hi(1), hi(2), hi(1), hi(1), hi(0)).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn six_j_triad_violation() {
        assert_eq!(wigner6j(hi(2), hi(2), hi(8), hi(2), hi(2), hi(2)).unwrap(), 0.0);
        assert_eq!(wigner6j(hi(2), hi(2), hi(2), hi(1), hi(2), hi(2)).unwrap(), 0.0);
    }
}

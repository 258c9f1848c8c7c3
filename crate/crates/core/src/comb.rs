//! Optical frequency comb: mode grid `nu_N = f_o + N f_r`, Gaussian envelope
//! and two-photon mode pairing.

use std::fmt;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Field truncation level used by [`CombSpec::truncated`] when none is given.
pub const DEFAULT_FIELD_FLOOR: f64 = 1.0e-4;

/// Wavelength in metres to optical frequency in Hz.
pub fn wavelength_to_frequency(wavelength_m: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength_m
}

/// An optical frequency held as an unevaluated sum `hi + lo`.
///
/// Mode frequencies near 400 THz have an f64 spacing of 1/16 Hz, too coarse
/// for exact closure of `nu_n + nu_m = K f_r + 2 f_o`. The low word carries the
/// rounding error of `N * f_r + f_o`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frequency {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Frequency {
    pub fn new(value: f64) -> Self {
        Frequency { hi: value, lo: 0.0 }
    }

    /// `n * f_r + f_o` with the rounding error kept.
    pub fn mode(n: i64, f_r: f64, f_o: f64) -> Self {
        let (p, pe) = two_prod(n as f64, f_r);
        let (s, se) = two_sum(p, f_o);
        let (hi, lo) = quick_two_sum(s, pe + se);
        Frequency { hi, lo }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Frequency) -> Frequency {
        let (s, e) = two_sum(self.hi, other.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + other.lo);
        Frequency { hi, lo }
    }

    /// `self - other`, accurate when the two are of similar magnitude.
    pub fn minus(self, other: Frequency) -> f64 {
        let (d, e) = two_sum(self.hi, -other.hi);
        d + (e + (self.lo - other.lo))
    }

    /// `self - nu` for a plain f64 frequency.
    pub fn detuning_from(self, nu: f64) -> f64 {
        self.minus(Frequency::new(nu))
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} Hz", self.value())
    }
}

/// Gaussian spectral envelope specified in wavelength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEnvelope {
    pub center_m: f64,
    /// Intensity FWHM in wavelength.
    pub fwhm_m: f64,
    pub peak_field: f64,
}

impl SpectralEnvelope {
    pub fn new(center_m: f64, fwhm_m: f64, peak_field: f64) -> Result<Self> {
        if !(center_m > 0.0) || !center_m.is_finite() {
            return Err(Error::Comb(format!("envelope centre must be positive, got {center_m} m")));
        }
        if !(fwhm_m > 0.0) {
            return Err(Error::Comb(format!("envelope FWHM must be positive, got {fwhm_m} m")));
        }
        if !(peak_field >= 0.0) || !peak_field.is_finite() {
            return Err(Error::Comb(format!("peak field must be non-negative, got {peak_field}")));
        }
        if fwhm_m.is_finite() && fwhm_m >= 2.0 * center_m {
            return Err(Error::Comb("envelope FWHM must be below twice the centre wavelength".into()));
        }
        Ok(SpectralEnvelope { center_m, fwhm_m, peak_field })
    }

    /// Envelope of constant field `peak_field` at every frequency.
    pub fn flat(center_m: f64, peak_field: f64) -> Result<Self> {
        Self::new(center_m, f64::INFINITY, peak_field)
    }

    pub fn center_frequency(&self) -> f64 {
        wavelength_to_frequency(self.center_m)
    }

    /// Intensity FWHM in frequency, between the images of the two band edges.
    pub fn fwhm_frequency(&self) -> f64 {
        if self.fwhm_m.is_infinite() {
            return f64::INFINITY;
        }
        wavelength_to_frequency(self.center_m - 0.5 * self.fwhm_m)
            - wavelength_to_frequency(self.center_m + 0.5 * self.fwhm_m)
    }

    pub fn field(&self, nu: f64) -> f64 {
        let width = self.fwhm_frequency();
        if width.is_infinite() {
            return self.peak_field;
        }
        let x = (nu - self.center_frequency()) / width;
        self.peak_field * (-2.0 * std::f64::consts::LN_2 * x * x).exp()
    }

    /// Half-width in frequency at which the field drops to `floor * peak_field`.
    pub fn half_width_at(&self, floor: f64) -> f64 {
        self.fwhm_frequency() * ((1.0 / floor).ln() / (2.0 * std::f64::consts::LN_2)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombSpec {
    pub f_r: f64,
    pub f_o: f64,
    pub n_min: i64,
    pub n_max: i64,
    pub envelope: SpectralEnvelope,
}

impl CombSpec {
    pub fn new(f_r: f64, f_o: f64, n_min: i64, n_max: i64, envelope: SpectralEnvelope) -> Result<Self> {
        if !(f_r > 0.0) || !f_r.is_finite() {
            return Err(Error::Comb(format!("repetition frequency must be positive, got {f_r} Hz")));
        }
        if !(0.0..f_r).contains(&f_o) {
            return Err(Error::Comb(format!("offset frequency {f_o} Hz must lie in [0, f_r)")));
        }
        if n_min >= n_max {
            return Err(Error::Comb(format!("mode range [{n_min}, {n_max}] is empty or a single mode")));
        }
        if !(Frequency::mode(n_min, f_r, f_o).value() > 0.0) {
            return Err(Error::Comb(format!("mode {n_min} has a non-positive frequency")));
        }
        Ok(CombSpec { f_r, f_o, n_min, n_max, envelope })
    }

    /// Comb spanning the modes whose envelope field is at least `floor * peak_field`.
    pub fn truncated(f_r: f64, f_o: f64, envelope: SpectralEnvelope, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor < 1.0) {
            return Err(Error::Comb(format!("truncation floor must lie in (0, 1), got {floor}")));
        }
        if envelope.fwhm_m.is_infinite() {
            return Err(Error::Comb("a flat envelope needs an explicit mode range".into()));
        }
        if !(f_r > 0.0) {
            return Err(Error::Comb(format!("repetition frequency must be positive, got {f_r} Hz")));
        }
        let center = envelope.center_frequency();
        let half = envelope.half_width_at(floor);
        let n_min = ((center - half - f_o) / f_r).ceil() as i64;
        let n_max = ((center + half - f_o) / f_r).floor() as i64;
        Self::new(f_r, f_o, n_min.max(1), n_max, envelope)
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_min..=self.n_max).contains(&n)
    }

    fn check_index(&self, n: i64) -> Result<()> {
        if self.contains(n) {
            Ok(())
        } else {
            Err(Error::Comb(format!(
                "mode index {n} outside [{}, {}]",
                self.n_min, self.n_max
            )))
        }
    }

    pub fn mode_frequency(&self, n: i64) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.mode(n).value())
    }

    /// Unchecked extended-precision mode frequency.
    #[inline]
    pub fn mode(&self, n: i64) -> Frequency {
        Frequency::mode(n, self.f_r, self.f_o)
    }

    /// Sum frequency `K f_r + 2 f_o` shared by every pair with `n + m = K`.
    pub fn pair_sum_frequency(&self, k: i64) -> Frequency {
        Frequency::mode(k, self.f_r, 2.0 * self.f_o)
    }

    /// Index minimising `|nu_N - nu|`, ties going to the lower index.
    pub fn mode_index_near(&self, nu: f64) -> Result<i64> {
        if !nu.is_finite() {
            return Err(Error::Comb(format!("frequency {nu} is not finite")));
        }
        let lower = ((nu - self.f_o) / self.f_r).floor() as i64;
        let mut best = lower - 1;
        let mut best_err = self.mode(best).detuning_from(nu).abs();
        for n in [lower, lower + 1, lower + 2] {
            let err = self.mode(n).detuning_from(nu).abs();
            if err < best_err {
                best = n;
                best_err = err;
            }
        }
        self.check_index(best)
            .map_err(|_| Error::Comb(format!("{nu} Hz lies outside the comb")))?;
        Ok(best)
    }

    pub fn envelope_field(&self, nu: f64) -> f64 {
        self.envelope.field(nu)
    }

    /// Envelope field at mode `n`.
    pub fn field(&self, n: i64) -> f64 {
        self.envelope.field(self.mode(n).value())
    }

    fn pair_bounds(&self, k: i64) -> (i64, i64) {
        let lo = self.n_min.max(k - self.n_max);
        let hi = self.n_max.min(k - self.n_min).min(k.div_euclid(2));
        (lo, hi)
    }

    /// Unordered pairs `(n, K - n)` with `n <= m`, both in range, ascending `n`.
    pub fn two_photon_pairs(&self, k: i64) -> impl Iterator<Item = (i64, i64)> {
        let (lo, hi) = self.pair_bounds(k);
        (lo..=hi).map(move |n| (n, k - n))
    }

    pub fn pair_count(&self, k: i64) -> usize {
        let (lo, hi) = self.pair_bounds(k);
        if hi < lo {
            0
        } else {
            (hi - lo + 1) as usize
        }
    }
}

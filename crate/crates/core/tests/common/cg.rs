//! Clebsch-Gordan coefficients from ladder operators, and angular factors
//! from explicit uncoupled-basis expansions.

use std::collections::HashMap;

use diamond_comb::atom::{AtomSystem, Sublevel};

/// `<j1 m1 j2 m2 | J M>` keyed by twice-values `(J, M, m1, m2)`.
pub struct CgTable {
    coef: HashMap<(i32, i32, i32, i32), f64>,
}

fn ladder(tj: i32, tm: i32) -> f64 {
    let (j, m) = (tj as f64 / 2.0, tm as f64 / 2.0);
    (j * (j + 1.0) - m * (m - 1.0)).sqrt()
}

impl CgTable {
    fn build(tj1: i32, tj2: i32) -> Self {
        let mut coef = HashMap::new();
        let mut states: HashMap<(i32, i32), HashMap<(i32, i32), f64>> = HashMap::new();
        let mut tj = tj1 + tj2;
        while tj >= (tj1 - tj2).abs() {
            // Top state: orthogonal complement of the higher multiplets at M = J.
            let mut top: HashMap<(i32, i32), f64> = HashMap::new();
            top.insert((tj1, tj - tj1), 1.0);
            let mut higher = tj1 + tj2;
            while higher > tj {
                let v = &states[&(higher, tj)];
                let overlap: f64 = top.iter().map(|(k, a)| a * v.get(k).copied().unwrap_or(0.0)).sum();
                for (k, b) in v {
                    *top.entry(*k).or_insert(0.0) -= overlap * b;
                }
                higher -= 2;
            }
            let norm = top.values().map(|a| a * a).sum::<f64>().sqrt();
            top.values_mut().for_each(|a| *a /= norm);
            let mut current = top;
            let mut tm = tj;
            loop {
                states.insert((tj, tm), current.clone());
                if tm == -tj {
                    break;
                }
                let mut next: HashMap<(i32, i32), f64> = HashMap::new();
                for (&(m1, m2), &a) in &current {
                    if m1 > -tj1 {
                        *next.entry((m1 - 2, m2)).or_insert(0.0) += a * ladder(tj1, m1);
                    }
                    if m2 > -tj2 {
                        *next.entry((m1, m2 - 2)).or_insert(0.0) += a * ladder(tj2, m2);
                    }
                }
                let scale = ladder(tj, tm);
                next.values_mut().for_each(|a| *a /= scale);
                current = next;
                tm -= 2;
            }
            tj -= 2;
        }
        for ((tj, tm), v) in states {
            for ((m1, m2), a) in v {
                coef.insert((tj, tm, m1, m2), a);
            }
        }
        CgTable { coef }
    }

    fn get(&self, tj: i32, tm: i32, m1: i32, m2: i32) -> f64 {
        self.coef.get(&(tj, tm, m1, m2)).copied().unwrap_or(0.0)
    }
}

pub struct Oracle {
    tables: HashMap<(i32, i32), CgTable>,
}

impl Oracle {
    pub fn new() -> Self {
        Oracle { tables: HashMap::new() }
    }

    pub fn cg(&mut self, tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
        if tm1 + tm2 != tm || tj > tj1 + tj2 || tj < (tj1 - tj2).abs() || tm.abs() > tj {
            return 0.0;
        }
        self.tables
            .entry((tj1, tj2))
            .or_insert_with(|| CgTable::build(tj1, tj2))
            .get(tj, tm, tm1, tm2)
    }

    pub fn three_j(&mut self, t: [i32; 6]) -> f64 {
        let [j1, j2, j3, m1, m2, m3] = t;
        if m1 + m2 + m3 != 0 {
            return 0.0;
        }
        let sign = if ((j1 - j2 - m3) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sign / f64::from(j3 + 1).sqrt() * self.cg(j1, m1, j2, m2, j3, -m3)
    }

    /// Recoupling overlap `<(j1 j2) j12, j3; J | j1, (j2 j3) j23; J>` at `M = J`.
    pub fn six_j(&mut self, t: [i32; 6]) -> f64 {
        let [j1, j2, j12, j3, tot, j23] = t;
        let tri = |a: i32, b: i32, c: i32| c <= a + b && c >= (a - b).abs() && (a + b + c) % 2 == 0;
        if !(tri(j1, j2, j12) && tri(j12, j3, tot) && tri(j2, j3, j23) && tri(j1, j23, tot)) {
            return 0.0;
        }
        let mm = tot;
        let mut overlap = 0.0;
        for m1 in (-j1..=j1).step_by(2) {
            for m2 in (-j2..=j2).step_by(2) {
                let m3 = mm - m1 - m2;
                if m3.abs() > j3 {
                    continue;
                }
                overlap += self.cg(j1, m1, j2, m2, j12, m1 + m2)
                    * self.cg(j12, m1 + m2, j3, m3, tot, mm)
                    * self.cg(j2, m2, j3, m3, j23, m2 + m3)
                    * self.cg(j1, m1, j23, m2 + m3, tot, mm);
            }
        }
        let sign = if ((j1 + j2 + j3 + tot) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sign * overlap / (f64::from((j12 + 1) * (j23 + 1))).sqrt()
    }
}

/// `<L' mL'|C1_q|L mL>` with the reduced element built from oracle 3-j values.
pub fn orbital_element(oracle: &mut Oracle, lb: i32, mlb: i32, lk: i32, mlk: i32, q: i32) -> f64 {
    let reduced = if (lb / 2) % 2 == 0 { 1.0 } else { -1.0 }
        * f64::from((lb + 1) * (lk + 1)).sqrt()
        * oracle.three_j([lb, 2, lk, 0, 0, 0]);
    let sign = if ((lb - mlb) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    sign * oracle.three_j([lb, 2, lk, -mlb, q, mlk]) * reduced
}

/// `|L S J; I F mF>` expanded as `(mL, mS, mI) -> amplitude`, all twice-values.
pub fn uncoupled(oracle: &mut Oracle, l: i32, s: i32, j: i32, i: i32, f: i32, mf: i32) -> HashMap<(i32, i32, i32), f64> {
    let mut out = HashMap::new();
    for mj in (-j..=j).step_by(2) {
        let mi = mf - mj;
        if mi.abs() > i {
            continue;
        }
        let outer = oracle.cg(j, mj, i, mi, f, mf);
        if outer == 0.0 {
            continue;
        }
        for ml in (-l..=l).step_by(2) {
            let ms = mj - ml;
            if ms.abs() > s {
                continue;
            }
            let inner = oracle.cg(l, ml, s, ms, j, mj);
            *out.entry((ml, ms, mi)).or_insert(0.0) += outer * inner;
        }
    }
    out
}


/// Compares every sublevel factor of `atom` with the uncoupled expansion.
/// Returns the number of nonzero factors and the largest absolute error.
pub fn sublevel_factor_errors(atom: &AtomSystem) -> (usize, f64) {
    let mut oracle = Oracle::new();
    let s = atom.electron_spin.twice();
    let i = atom.nuclear_spin.twice();
    let mut nonzero = 0;
    let mut worst: f64 = 0.0;
    for from in atom.level_ids() {
        for to in atom.level_ids() {
            let (k, b) = (atom.level(from), atom.level(to));
            if (k.l as i32 - b.l as i32).abs() != 1 {
                continue;
            }
            for kmf in k.f.projections() {
                let ket = uncoupled(&mut oracle, 2 * k.l as i32, s, k.j.twice(), i, k.f.twice(), kmf.twice());
                for bmf in b.f.projections() {
                    let bra = uncoupled(&mut oracle, 2 * b.l as i32, s, b.j.twice(), i, b.f.twice(), bmf.twice());
                    for q in -1..=1 {
                        let mut want = 0.0;
                        for (&(mlk, ms, mi), &ak) in &ket {
                            for (&(mlb, ms2, mi2), &ab) in &bra {
                                if ms == ms2 && mi == mi2 {
                                    want += ab
                                        * ak
                                        * orbital_element(&mut oracle, 2 * b.l as i32, mlb, 2 * k.l as i32, mlk, 2 * q);
                                }
                            }
                        }
                        let got = atom
                            .angular_dipole_factor(Sublevel::new(from, kmf), Sublevel::new(to, bmf), q)
                            .unwrap();
                        worst = worst.max((got - want).abs());
                        if want != 0.0 {
                            nonzero += 1;
                        }
                    }
                }
            }
        }
    }
    (nonzero, worst)
}

fn h(t: i32) -> diamond_comb::angular::HalfInt {
    diamond_comb::angular::HalfInt::from_twice(t)
}

fn library_three_j(t: [i32; 6]) -> f64 {
    diamond_comb::angular::wigner3j(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5])).unwrap()
}

/// Every 3-j symbol with `2j <= max_twice` against the ladder tables.
/// Returns the count and the largest absolute error.
pub fn three_j_errors(max_twice: i32) -> (usize, f64) {
    let mut oracle = Oracle::new();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for j1 in 0..=max_twice {
        for j2 in 0..=max_twice {
            for j3 in (j1 - j2).abs()..=(j1 + j2) {
                if (j1 + j2 + j3) % 2 != 0 {
                    continue;
                }
                for m1 in (-j1..=j1).step_by(2) {
                    for m2 in (-j2..=j2).step_by(2) {
                        let m3 = -m1 - m2;
                        if m3.abs() > j3 {
                            continue;
                        }
                        let t = [j1, j2, j3, m1, m2, m3];
                        worst = worst.max((library_three_j(t) - oracle.three_j(t)).abs());
                        checked += 1;
                    }
                }
            }
        }
    }
    (checked, worst)
}

/// Every 6-j symbol with all `2j <= max_twice` against recoupling overlaps.
pub fn six_j_errors(max_twice: i32) -> (usize, f64) {
    let mut oracle = Oracle::new();
    let mut nonzero = 0;
    let mut worst: f64 = 0.0;
    let r = 0..=max_twice;
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    for e in r.clone() {
                        for f in r.clone() {
                            let want = oracle.six_j([a, b, c, d, e, f]);
                            let got = diamond_comb::angular::wigner6j(h(a), h(b), h(c), h(d), h(e), h(f)).unwrap();
                            worst = worst.max((got - want).abs());
                            if want != 0.0 {
                                nonzero += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    (nonzero, worst)
}

/// Largest deviation of `sum (2 j3 + 1) 3j 3j'` from the Kronecker deltas, `2j <= max_twice`.
pub fn orthogonality_error(max_twice: i32) -> (usize, f64) {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for j1 in 0..=max_twice {
        for j2 in 0..=max_twice {
            for j3 in (j1 - j2).abs()..=(j1 + j2) {
                if (j1 + j2 + j3) % 2 != 0 {
                    continue;
                }
                for j3b in (j1 - j2).abs()..=(j1 + j2) {
                    if (j1 + j2 + j3b) % 2 != 0 {
                        continue;
                    }
                    for m3 in (-j3..=j3).step_by(2) {
                        for m3b in (-j3b..=j3b).step_by(2) {
                            let mut sum = 0.0;
                            for m1 in (-j1..=j1).step_by(2) {
                                let m2 = -m1 - m3;
                                if m2.abs() > j2 || m3 != m3b {
                                    continue;
                                }
                                sum += f64::from(j3 + 1)
                                    * library_three_j([j1, j2, j3, m1, m2, m3])
                                    * library_three_j([j1, j2, j3b, m1, m2, m3b]);
                            }
                            let want = if j3 == j3b && m3 == m3b { 1.0 } else { 0.0 };
                            worst = worst.max((sum - want).abs());
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    (checked, worst)
}

//! Small random diamond systems and a direct second-order sum over
//! sublevels and ordered photon pairs.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use diamond_comb::atom::{AtomSystem, LevelId, Sublevel};
use diamond_comb::comb::{CombSpec, SpectralEnvelope, SPEED_OF_LIGHT};
use diamond_comb::excitation::{Excitation, ExcitationConfig, Geometry, ModePolicy};
use diamond_comb::shaper::PhaseMask;
use num_complex::Complex64;
use proptest::prelude::*;

pub const F_R: f64 = 1.0e9;
pub const F_O: f64 = 1.0e8;

#[derive(Clone, Debug)]
pub struct Level {
    label: String,
    term: &'static str,
    l: u32,
    twice_j: i32,
    twice_f: i32,
    energy: f64,
    linewidth: f64,
}

#[derive(Clone, Debug)]
pub struct System {
    pub twice_i: i32,
    pub levels: Vec<Level>,
    pub dipoles: Vec<(&'static str, &'static str, f64)>,
    pub ground: usize,
    pub final_level: usize,
}

impl System {
    pub fn toml(&self) -> String {
        let mut s = format!("atom = \"synthetic\"\nnuclear_spin = {}\n", self.twice_i as f64 / 2.0);
        for l in &self.levels {
            let _ = write!(
                s,
                "\n[[level]]\nlabel = \"{}\"\nterm = \"{}\"\nL = {}\nJ = {}\nF = {}\nenergy_Hz = {:e}\nlinewidth_Hz = {:e}\n",
                l.label,
                l.term,
                l.l,
                l.twice_j as f64 / 2.0,
                l.twice_f as f64 / 2.0,
                l.energy,
                l.linewidth
            );
        }
        for (lo, up, d) in &self.dipoles {
            let _ = write!(s, "\n[[dipole]]\nlower = \"{lo}\"\nupper = \"{up}\"\nreduced_moment_a0 = {d:e}\n");
        }
        s
    }
}

fn f_values(twice_j: i32, twice_i: i32) -> Vec<i32> {
    ((twice_j - twice_i).abs()..=twice_j + twice_i).step_by(2).collect()
}

prop_compose! {
    fn term_levels(term: &'static str, l: u32, twice_j: i32, twice_i: i32, lo: f64, hi: f64, ground: bool)
        (energies in prop::collection::vec(lo..hi, f_values(twice_j, twice_i).len()),
         widths in prop::collection::vec(1.0e6..5.0e7f64, f_values(twice_j, twice_i).len()))
        -> Vec<Level>
    {
        f_values(twice_j, twice_i)
            .into_iter()
            .zip(energies.into_iter().zip(widths))
            .map(|(f, (e, w))| Level {
                label: format!("{term} F={}", f as f64 / 2.0),
                term,
                l,
                twice_j,
                twice_f: f,
                energy: e,
                linewidth: if ground { 0.0 } else { w },
            })
            .collect()
    }
}

pub fn system() -> impl Strategy<Value = System> {
    (0..=2i32, 0..3usize, 0..3usize)
        .prop_flat_map(|(twice_i, which_p, which_final)| {
            let ground = term_levels("s", 0, 1, twice_i, -2.0e8, 2.0e8, true);
            let p1 = term_levels("p1", 1, 1, twice_i, 0.99e11, 1.12e11, false);
            let p3 = term_levels("p3", 1, 3, twice_i, 0.99e11, 1.12e11, false);
            let (fl, fj, fname) = [(2u32, 3i32, "d3"), (0, 1, "s2"), (2, 5, "d5")][which_final];
            let fin = term_levels(fname, fl, fj, twice_i, 2.0e11, 2.2e11, false);
            let moments = prop::collection::vec(prop_oneof![-3.0..-0.2f64, 0.2..3.0f64], 4);
            (Just(twice_i), Just(which_p), ground, p1, p3, fin, moments, any::<prop::sample::Index>(), any::<prop::sample::Index>())
        })
        .prop_map(|(twice_i, which_p, ground, p1, p3, fin, moments, gi, fi)| {
            let fname = fin[0].term;
            let final_j = fin[0].twice_j;
            let mut levels = ground.clone();
            let mut dipoles = Vec::new();
            // which_p: 0 = both P terms, 1 = P1/2 only, 2 = P3/2 only.
            if which_p != 2 {
                levels.extend(p1);
                dipoles.push(("s", "p1", moments[0]));
                if final_j <= 3 {
                    dipoles.push(("p1", fname, moments[1]));
                }
            }
            if which_p != 1 {
                levels.extend(p3);
                dipoles.push(("s", "p3", moments[2]));
                dipoles.push(("p3", fname, moments[3]));
            }
            let ground_idx = gi.index(ground.len());
            let final_idx = levels.len() + fi.index(fin.len());
            levels.extend(fin);
            System { twice_i, levels, dipoles, ground: ground_idx, final_level: final_idx }
        })
}

pub fn lorentzian(delta: f64, gamma: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) / Complex64::new(PI * gamma, -2.0 * PI * delta)
}

pub fn field(comb: &CombSpec, mask: &PhaseMask, n: i64, z: f64, theta: Option<f64>) -> Complex64 {
    let nu = n as f64 * F_R + F_O;
    let mut w = Complex64::from_polar(comb.envelope.field(nu), mask.phase_at(nu));
    if let Some(theta) = theta {
        w *= 2.0 * (2.0 * PI * nu * z / SPEED_OF_LIGHT + theta / 2.0).cos();
    }
    w
}

/// Direct second-order sum for one ground and final sublevel. Every ordered
/// pair `(a, b)` is a distinct time ordering; a pair of one mode with itself
/// appears in both orderings.
pub fn oracle_amplitude(atom: &AtomSystem, cfg: &ExcitationConfig, gs: Sublevel, fs: Sublevel, z: f64, theta: Option<f64>) -> Complex64 {
    let comb = &cfg.comb;
    let (g, f) = (cfg.ground, cfg.final_level);
    let gamma_f = atom.level(f).linewidth_hz;
    let nu_f = atom.level(f).energy_hz - atom.level(g).energy_hz;
    let modes: Vec<i64> = (comb.n_min..=comb.n_max).collect();
    let mut amp = Complex64::new(0.0, 0.0);
    for id in atom.level_ids() {
        if id == g || id == f {
            continue;
        }
        let gamma_i = atom.level(id).linewidth_hz;
        let nu_i = atom.level(id).energy_hz - atom.level(g).energy_hz;
        for is in atom.sublevels(id) {
            let mu = atom.dipole_moment(gs, is, cfg.polarization).unwrap()
                * atom.dipole_moment(is, fs, cfg.polarization).unwrap();
            if mu == 0.0 {
                continue;
            }
            for &a in &modes {
                for &b in &modes {
                    let nu_a = a as f64 * F_R + F_O;
                    let nu_b = b as f64 * F_R + F_O;
                    let w = field(comb, &cfg.mask, a, z, theta) * field(comb, &cfg.mask, b, z, theta);
                    let mut term = w * mu * lorentzian(nu_a + nu_b - nu_f, gamma_f) * lorentzian(nu_a - nu_i, gamma_i);
                    if a == b {
                        term *= 2.0;
                    }
                    amp += term;
                }
            }
        }
    }
    amp
}

pub fn oracle_population(atom: &AtomSystem, cfg: &ExcitationConfig, z: f64, theta: Option<f64>) -> f64 {
    let mut total = 0.0;
    for gs in atom.sublevels(cfg.ground) {
        for fs in atom.sublevels(cfg.final_level) {
            total += oracle_amplitude(atom, cfg, gs, fs, z, theta).norm_sqr();
        }
    }
    total / atom.level(cfg.ground).f.multiplicity() as f64
}

pub fn mask_strategy() -> impl Strategy<Value = PhaseMask> {
    prop::collection::vec((1.0e11..1.12e11f64, -PI..PI), 0..4).prop_map(|mut cuts| {
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
        cuts.dedup_by(|a, b| a.0 == b.0);
        let bps: Vec<f64> = cuts.iter().map(|c| c.0).collect();
        let mut phases = vec![0.3];
        phases.extend(cuts.iter().map(|c| c.1));
        PhaseMask::new(bps, phases).unwrap()
    })
}


/// One randomised comparison.
#[derive(Clone, Debug)]
pub struct Case {
    pub system: System,
    pub mask: PhaseMask,
    pub polarization: i32,
    pub n_min: i64,
    pub count: i64,
    pub fwhm_frac: f64,
    pub standing: Option<(f64, usize, f64)>,
}

pub fn case() -> impl Strategy<Value = Case> {
    (
        system(),
        mask_strategy(),
        -1..=1i32,
        100i64..103,
        3i64..11,
        0.05..0.5f64,
        prop::option::of((0.0..5.0e-3f64, 1usize..4, -PI..PI)),
    )
        .prop_map(|(system, mask, polarization, n_min, count, fwhm_frac, standing)| Case {
            system,
            mask,
            polarization,
            n_min,
            count,
            fwhm_frac,
            standing,
        })
}

/// Outcome of one case: whether any path contributes, and the largest
/// relative deviation of amplitudes and population from the direct sum.
pub struct CaseResult {
    pub nontrivial: bool,
    pub worst_relative: f64,
}

pub fn run_case(c: &Case) -> Result<CaseResult, String> {
    let atom = Arc::new(AtomSystem::from_toml_str(&c.system.toml()).map_err(|e| e.to_string())?);
    let center = SPEED_OF_LIGHT / 1.06e11;
    let env = SpectralEnvelope::new(center, c.fwhm_frac * center, 1.3).map_err(|e| e.to_string())?;
    let comb = CombSpec::new(F_R, F_O, c.n_min, c.n_min + c.count - 1, env).map_err(|e| e.to_string())?;
    let mut cfg = ExcitationConfig::new(comb, atom.clone(), LevelId(c.system.ground), LevelId(c.system.final_level));
    cfg.mask = c.mask.clone();
    cfg.polarization = c.polarization;
    cfg.intermediate_window_hz = 1.0e13;
    cfg.mode_policy = ModePolicy::FullSum { detuning_multiple: f64::INFINITY };
    if let Some((length, samples, theta)) = c.standing {
        cfg.geometry = Geometry::StandingWave { cloud_length_m: length, samples, relative_phase_rad: theta };
    }
    let ex = match Excitation::new(&cfg) {
        Ok(ex) => ex,
        Err(e) => {
            let want = oracle_population(&atom, &cfg, 0.0, None);
            return if want == 0.0 {
                Ok(CaseResult { nontrivial: false, worst_relative: 0.0 })
            } else {
                Err(format!("library found no path ({e}) but the direct sum gives {want:e}"))
            };
        }
    };
    let rel = |got: f64, want: f64| if want == 0.0 { got.abs() } else { (got / want).abs() };
    let mut worst: f64 = 0.0;
    if c.standing.is_none() {
        for gs in atom.sublevels(cfg.ground) {
            for fs in atom.sublevels(cfg.final_level) {
                let got = ex.total_amplitude(gs, fs).map_err(|e| e.to_string())?;
                let want = oracle_amplitude(&atom, &cfg, gs, fs, 0.0, None);
                worst = worst.max(rel((got - want).norm(), want.norm()));
            }
        }
    }
    let got = ex.population().map_err(|e| e.to_string())?;
    let want = match c.standing {
        None => oracle_population(&atom, &cfg, 0.0, None),
        Some((length, samples, theta)) => {
            (0..samples)
                .map(|k| oracle_population(&atom, &cfg, k as f64 * length / samples as f64, Some(theta)))
                .sum::<f64>()
                / samples as f64
        }
    };
    worst = worst.max(rel(got - want, want));
    Ok(CaseResult { nontrivial: got > 0.0, worst_relative: worst })
}

//! Second-order two-photon amplitude of a comb-driven diamond system.
//!
//! For modes `n`, `m`, ground `g`, intermediate `i` and final state `f`:
//!
//! ```text
//! c = w_n w_m mu_gi mu_if / (i 2pi (nu_gf - (nu_n + nu_m)) + pi gamma_f)
//!     * [ 1 / (i 2pi (nu_gi - nu_n) + pi gamma_i) + 1 / (i 2pi (nu_gi - nu_m) + pi gamma_i) ]
//! ```
//!
//! where `w_n = E_n exp(i phi(nu_n))` is the shaped field of mode `n`. The
//! spectral part does not depend on magnetic sublevels, so it is summed once per
//! intermediate level and then combined with the angular couplings of every
//! `mF` chain.
//!
//! Parallel sums split the mode range into fixed-size chunks and add the chunk
//! results in index order, so the result does not depend on the thread count.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::atom::{check_polarization, AtomSystem, LevelId, Sublevel};
use crate::comb::{CombSpec, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::shaper::PhaseMask;

pub const DEFAULT_INTERMEDIATE_WINDOW_HZ: f64 = 60.0e6;
pub const DEFAULT_DETUNING_MULTIPLE: f64 = 1.0e3;
pub const DEFAULT_CLOUD_LENGTH_M: f64 = 1.0e-3;
pub const DEFAULT_SPATIAL_SAMPLES: usize = 20_000;

const CHUNK: usize = 1 << 13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    TravelingWave,
    /// Counter-propagating copy of every mode; the field of mode `nu` at `z` is
    /// `2 E cos(2 pi nu z / c + relative_phase / 2)`.
    StandingWave {
        cloud_length_m: f64,
        samples: usize,
        relative_phase_rad: f64,
    },
}

impl Geometry {
    pub fn standing_wave_default() -> Self {
        Geometry::StandingWave {
            cloud_length_m: DEFAULT_CLOUD_LENGTH_M,
            samples: DEFAULT_SPATIAL_SAMPLES,
            relative_phase_rad: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModePolicy {
    /// One pair per intermediate: the mode nearest its resonance and the
    /// partner closing the two-photon resonance.
    ResonantOnly,
    /// Every pair for every two-photon sum within `detuning_multiple * gamma_f`
    /// of the final state. An infinite multiple keeps every sum in range.
    FullSum { detuning_multiple: f64 },
}

impl ModePolicy {
    pub fn full_sum() -> Self {
        ModePolicy::FullSum { detuning_multiple: DEFAULT_DETUNING_MULTIPLE }
    }
}

#[derive(Clone, Debug)]
pub struct ExcitationConfig {
    pub comb: CombSpec,
    pub mask: PhaseMask,
    pub atom: Arc<AtomSystem>,
    pub ground: LevelId,
    pub final_level: LevelId,
    pub intermediate_window_hz: f64,
    pub polarization: i32,
    pub geometry: Geometry,
    pub mode_policy: ModePolicy,
}

impl ExcitationConfig {
    pub fn new(comb: CombSpec, atom: Arc<AtomSystem>, ground: LevelId, final_level: LevelId) -> Self {
        ExcitationConfig {
            comb,
            mask: PhaseMask::zero(),
            atom,
            ground,
            final_level,
            intermediate_window_hz: DEFAULT_INTERMEDIATE_WINDOW_HZ,
            polarization: 0,
            geometry: Geometry::TravelingWave,
            mode_policy: ModePolicy::ResonantOnly,
        }
    }

    pub fn with_mask(&self, mask: PhaseMask) -> Self {
        ExcitationConfig { mask, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intermediate_window_hz > 0.0) {
            return Err(Error::Config("intermediate window must be positive".into()));
        }
        check_polarization(self.polarization)?;
        let n = self.atom.levels().len();
        if self.ground.0 >= n || self.final_level.0 >= n {
            return Err(Error::Config("ground or final level not in the atom".into()));
        }
        if let Geometry::StandingWave { cloud_length_m, samples, relative_phase_rad } = self.geometry {
            if samples < 1 {
                return Err(Error::Config("standing wave needs at least one spatial sample".into()));
            }
            if !(cloud_length_m >= 0.0) || !cloud_length_m.is_finite() || !relative_phase_rad.is_finite() {
                return Err(Error::Config("cloud length must be finite and non-negative".into()));
            }
        }
        if let ModePolicy::FullSum { detuning_multiple } = self.mode_policy {
            if !(detuning_multiple > 0.0) {
                return Err(Error::Config("full-sum detuning multiple must be positive".into()));
            }
        }
        Ok(())
    }
}

/// An intermediate level retained by the window, with its resonant mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Intermediate {
    pub level: LevelId,
    /// Ground to intermediate transition frequency, Hz.
    pub transition_hz: f64,
    pub linewidth_hz: f64,
    pub nearest_mode: i64,
    /// `nu_nearest - transition`, Hz.
    pub detuning_hz: f64,
}

/// One term of the two-photon amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct PathAmplitude {
    pub pair: (i64, i64),
    pub ground: Sublevel,
    pub intermediate: Sublevel,
    pub final_state: Sublevel,
    pub value: Complex64,
    pub intermediate_detuning_hz: f64,
}

/// Resonant-pair summary for one intermediate level.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRow {
    pub label: String,
    pub pair: (i64, i64),
    pub detuning_hz: f64,
    pub two_photon_detuning_hz: f64,
    /// Signed reduced dipoles (radial times `<F'||C1||F>`), ground leg then upper leg.
    pub dipoles: (f64, f64),
    pub amplitude: Complex64,
    pub relative_magnitude: f64,
    pub phase_deg: f64,
}

/// `1 / (i 2pi (nu_transition - nu_mode) + pi gamma)` for `detuning = nu_mode - nu_transition`.
#[inline]
pub fn lorentzian(detuning_hz: f64, linewidth_hz: f64) -> Complex64 {
    Complex64::new(PI * linewidth_hz, -2.0 * PI * detuning_hz).inv()
}

fn check_denominator(detuning_hz: f64, linewidth_hz: f64, what: &str) -> Result<()> {
    if detuning_hz == 0.0 && linewidth_hz == 0.0 {
        Err(Error::Physics(format!(
            "{what} is exactly resonant with zero linewidth; a positive linewidth is required"
        )))
    } else {
        Ok(())
    }
}

/// Prepared evaluation: intermediates, angular couplings and two-photon sums.
#[derive(Clone, Debug)]
pub struct Excitation {
    cfg: ExcitationConfig,
    intermediates: Vec<Intermediate>,
    ground_sublevels: Vec<Sublevel>,
    final_sublevels: Vec<Sublevel>,
    /// `couplings[i][g * n_final + f]`: summed dipole product over intermediate sublevels.
    couplings: Vec<Vec<f64>>,
    final_transition_hz: f64,
    final_linewidth_hz: f64,
    sums: Vec<i64>,
}

impl Excitation {
    pub fn new(cfg: &ExcitationConfig) -> Result<Self> {
        cfg.validate()?;
        let atom = &cfg.atom;
        let comb = &cfg.comb;
        let q = cfg.polarization;
        let ground_sublevels: Vec<Sublevel> = atom.sublevels(cfg.ground).collect();
        let final_sublevels: Vec<Sublevel> = atom.sublevels(cfg.final_level).collect();

        let mut intermediates = Vec::new();
        let mut couplings = Vec::new();
        for id in atom.level_ids() {
            if id == cfg.ground || id == cfg.final_level {
                continue;
            }
            if atom.radial_moment(cfg.ground, id).is_none() || atom.radial_moment(id, cfg.final_level).is_none() {
                continue;
            }
            let transition = atom.transition_frequency(cfg.ground, id);
            let nearest = comb.mode_index_near(transition).unwrap_or_else(|_| {
                if transition < comb.mode(comb.n_min).value() {
                    comb.n_min
                } else {
                    comb.n_max
                }
            });
            let detuning = comb.mode(nearest).detuning_from(transition);
            if detuning.abs() >= cfg.intermediate_window_hz {
                continue;
            }
            let mut table = vec![0.0; ground_sublevels.len() * final_sublevels.len()];
            for (gi, &g) in ground_sublevels.iter().enumerate() {
                for (fi, &f) in final_sublevels.iter().enumerate() {
                    let mut total = 0.0;
                    for mid in atom.sublevels(id) {
                        let lower = atom.dipole_moment(g, mid, q)?;
                        if lower == 0.0 {
                            continue;
                        }
                        total += lower * atom.dipole_moment(mid, f, q)?;
                    }
                    table[gi * final_sublevels.len() + fi] = total;
                }
            }
            if table.iter().all(|&c| c == 0.0) {
                continue;
            }
            intermediates.push(Intermediate {
                level: id,
                transition_hz: transition,
                linewidth_hz: atom.level(id).linewidth_hz,
                nearest_mode: nearest,
                detuning_hz: detuning,
            });
            couplings.push(table);
        }
        if intermediates.is_empty() {
            return Err(Error::Physics(format!(
                "no dipole-connected intermediate level within {} Hz of a comb mode",
                cfg.intermediate_window_hz
            )));
        }

        let final_transition_hz = atom.transition_frequency(cfg.ground, cfg.final_level);
        let final_linewidth_hz = atom.level(cfg.final_level).linewidth_hz;
        let sums = match cfg.mode_policy {
            ModePolicy::ResonantOnly => vec![nearest_sum_index(comb, final_transition_hz)?],
            ModePolicy::FullSum { detuning_multiple } => {
                let reach = detuning_multiple * final_linewidth_hz;
                let lo = ((final_transition_hz - 2.0 * comb.f_o - reach) / comb.f_r)
                    .ceil()
                    .max((2 * comb.n_min) as f64) as i64;
                let hi = ((final_transition_hz - 2.0 * comb.f_o + reach) / comb.f_r)
                    .floor()
                    .min((2 * comb.n_max) as f64) as i64;
                let ks: Vec<i64> = (lo..=hi)
                    .filter(|&k| {
                        reach.is_infinite()
                            || comb.pair_sum_frequency(k).detuning_from(final_transition_hz).abs() <= reach
                    })
                    .collect();
                if ks.is_empty() {
                    return Err(Error::Physics(
                        "no two-photon sum frequency of the comb lies within the final-state window".into(),
                    ));
                }
                ks
            }
        };
        for &k in &sums {
            let d = comb.pair_sum_frequency(k).detuning_from(final_transition_hz);
            check_denominator(d, final_linewidth_hz, "a two-photon mode sum")?;
        }
        for it in &intermediates {
            if it.linewidth_hz == 0.0 {
                check_denominator(it.detuning_hz, 0.0, "a comb mode")?;
            }
        }

        Ok(Excitation {
            cfg: cfg.clone(),
            intermediates,
            ground_sublevels,
            final_sublevels,
            couplings,
            final_transition_hz,
            final_linewidth_hz,
            sums,
        })
    }

    pub fn config(&self) -> &ExcitationConfig {
        &self.cfg
    }

    /// Same prepared evaluation under a different phase mask.
    pub fn with_mask(&self, mask: PhaseMask) -> Self {
        let mut out = self.clone();
        out.cfg.mask = mask;
        out
    }

    pub fn intermediates(&self) -> &[Intermediate] {
        &self.intermediates
    }

    pub fn ground_sublevels(&self) -> &[Sublevel] {
        &self.ground_sublevels
    }

    pub fn final_sublevels(&self) -> &[Sublevel] {
        &self.final_sublevels
    }

    /// Two-photon sum indices `K = n + m` included in the evaluation.
    pub fn pair_sums(&self) -> &[i64] {
        &self.sums
    }

    pub fn final_transition_hz(&self) -> f64 {
        self.final_transition_hz
    }

    /// The resonant pair `(n, K - n)` used for intermediate `idx` in resonant-only mode.
    pub fn resonant_pair(&self, idx: usize) -> Result<(i64, i64)> {
        let k = nearest_sum_index(&self.cfg.comb, self.final_transition_hz)?;
        let n = self.intermediates[idx].nearest_mode;
        let m = k - n;
        if !self.cfg.comb.contains(m) {
            return Err(Error::Physics(format!(
                "partner mode {m} of the resonant pair lies outside the comb"
            )));
        }
        Ok((n, m))
    }

    fn final_denominator(&self, k: i64) -> Complex64 {
        let d = self.cfg.comb.pair_sum_frequency(k).detuning_from(self.final_transition_hz);
        lorentzian(d, self.final_linewidth_hz)
    }

    #[inline]
    fn bracket(&self, idx: usize, n: i64, m: i64) -> Complex64 {
        let it = &self.intermediates[idx];
        let comb = &self.cfg.comb;
        lorentzian(comb.mode(n).detuning_from(it.transition_hz), it.linewidth_hz)
            + lorentzian(comb.mode(m).detuning_from(it.transition_hz), it.linewidth_hz)
    }

    /// Spectral part of one pair for intermediate `idx`: everything but the dipoles.
    fn pair_spectral(&self, idx: usize, n: i64, m: i64, field: &impl Fn(i64) -> Complex64) -> Complex64 {
        let w = field(n) * field(m);
        if w == Complex64::new(0.0, 0.0) {
            return w;
        }
        w * self.final_denominator(n + m) * self.bracket(idx, n, m)
    }

    /// Shaped field of mode `n` at position `z` (ignored for a traveling wave).
    pub fn mode_field(&self, n: i64, z: f64) -> Complex64 {
        let comb = &self.cfg.comb;
        let nu = comb.mode(n).value();
        let mut w = Complex64::from_polar(comb.envelope.field(nu), self.cfg.mask.phase_at(nu));
        if let Geometry::StandingWave { relative_phase_rad, .. } = self.cfg.geometry {
            w *= 2.0 * (2.0 * PI * nu * z / SPEED_OF_LIGHT + 0.5 * relative_phase_rad).cos();
        }
        w
    }

    /// Amplitude of one pair through one intermediate sublevel.
    pub fn pair_amplitude(
        &self,
        n: i64,
        m: i64,
        ground: Sublevel,
        intermediate: Sublevel,
        final_state: Sublevel,
    ) -> Result<Complex64> {
        let comb = &self.cfg.comb;
        for idx in [n, m] {
            if !comb.contains(idx) {
                return Err(Error::Comb(format!("mode index {idx} outside the comb")));
            }
        }
        let atom = &self.cfg.atom;
        let q = self.cfg.polarization;
        let dipoles = atom.dipole_moment(ground, intermediate, q)? * atom.dipole_moment(intermediate, final_state, q)?;
        if dipoles == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let it = self
            .intermediates
            .iter()
            .position(|it| it.level == intermediate.level);
        let linewidth = atom.level(intermediate.level).linewidth_hz;
        let transition = atom.transition_frequency(ground.level, intermediate.level);
        let dn = comb.mode(n).detuning_from(transition);
        let dm = comb.mode(m).detuning_from(transition);
        let df = comb.pair_sum_frequency(n + m).detuning_from(self.final_transition_hz);
        check_denominator(dn, linewidth, "mode n")?;
        check_denominator(dm, linewidth, "mode m")?;
        check_denominator(df, self.final_linewidth_hz, "the mode pair")?;
        let field = |k| self.mode_field(k, 0.0);
        let spectral = match it {
            Some(idx) => self.pair_spectral(idx, n, m, &field),
            None => {
                field(n)
                    * field(m)
                    * lorentzian(df, self.final_linewidth_hz)
                    * (lorentzian(dn, linewidth) + lorentzian(dm, linewidth))
            }
        };
        Ok(spectral * dipoles)
    }

    /// Per-intermediate spectral sums for the field configuration at `z`.
    pub fn spectral_sums(&self, z: f64) -> Vec<Complex64> {
        match self.cfg.mode_policy {
            ModePolicy::ResonantOnly => {
                let field = |k| self.mode_field(k, z);
                (0..self.intermediates.len())
                    .map(|idx| match self.resonant_pair(idx) {
                        Ok((n, m)) => self.pair_spectral(idx, n, m, &field),
                        Err(_) => Complex64::new(0.0, 0.0),
                    })
                    .collect()
            }
            ModePolicy::FullSum { .. } => self.full_spectral_sums(z),
        }
    }

    fn full_spectral_sums(&self, z: f64) -> Vec<Complex64> {
        let comb = &self.cfg.comb;
        let n_min = comb.n_min;
        let fields: Vec<Complex64> = (0..comb.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|off| self.mode_field(n_min + off as i64, z))
            .collect();
        let field = |k: i64| fields[(k - n_min) as usize];
        let count = self.intermediates.len();
        let mut totals = vec![Complex64::new(0.0, 0.0); count];
        for &k in &self.sums {
            let pairs: Vec<(i64, i64)> = comb.two_photon_pairs(k).collect();
            let chunk_sums: Vec<Vec<Complex64>> = pairs
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut acc = vec![Complex64::new(0.0, 0.0); count];
                    for &(n, m) in chunk {
                        let w = field(n) * field(m);
                        if w == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for (idx, a) in acc.iter_mut().enumerate() {
                            *a += w * self.bracket(idx, n, m);
                        }
                    }
                    acc
                })
                .collect();
            let denominator = self.final_denominator(k);
            for (idx, total) in totals.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for c in &chunk_sums {
                    s += c[idx];
                }
                *total += denominator * s;
            }
        }
        totals
    }

    fn combine(&self, sums: &[Complex64], gi: usize, fi: usize) -> Complex64 {
        let nf = self.final_sublevels.len();
        let mut amp = Complex64::new(0.0, 0.0);
        for (idx, s) in sums.iter().enumerate() {
            amp += *s * self.couplings[idx][gi * nf + fi];
        }
        amp
    }

    fn population_from_sums(&self, sums: &[Complex64]) -> f64 {
        let mut total = 0.0;
        for gi in 0..self.ground_sublevels.len() {
            for fi in 0..self.final_sublevels.len() {
                total += self.combine(sums, gi, fi).norm_sqr();
            }
        }
        total / self.ground_sublevels.len() as f64
    }

    fn sublevel_index(list: &[Sublevel], s: Sublevel) -> Result<usize> {
        list.iter()
            .position(|&x| x == s)
            .ok_or_else(|| Error::Angular(format!("sublevel mF = {} not in the configured level", s.mf)))
    }

    /// Coherent sum over intermediates and pairs for one ground and final sublevel.
    pub fn total_amplitude(&self, ground: Sublevel, final_state: Sublevel) -> Result<Complex64> {
        let gi = Self::sublevel_index(&self.ground_sublevels, ground)?;
        let fi = Self::sublevel_index(&self.final_sublevels, final_state)?;
        let sums = self.spectral_sums(0.0);
        Ok(self.combine(&sums, gi, fi))
    }

    /// Final-state population at `z`, averaged over ground sublevels with equal weights.
    pub fn population_at(&self, z: f64) -> f64 {
        self.population_from_sums(&self.spectral_sums(z))
    }

    /// Population for the configured geometry.
    pub fn population(&self) -> Result<f64> {
        let value = match self.cfg.geometry {
            Geometry::TravelingWave => self.population_at(0.0),
            Geometry::StandingWave { .. } => self.standing_wave_population()?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Numerical(format!("population evaluated to {value}")))
        }
    }

    /// Average over `samples` positions `z_k = k L / samples` across the cloud.
    pub fn standing_wave_population(&self) -> Result<f64> {
        let Geometry::StandingWave { cloud_length_m, samples, .. } = self.cfg.geometry else {
            return Err(Error::Config("standing-wave population needs standing-wave geometry".into()));
        };
        if samples < 1 {
            return Err(Error::Config("standing wave needs at least one spatial sample".into()));
        }
        let values: Vec<f64> = match self.cfg.mode_policy {
            ModePolicy::ResonantOnly => (0..samples)
                .into_par_iter()
                .with_min_len(256)
                .map(|k| self.population_at(k as f64 * cloud_length_m / samples as f64))
                .collect(),
            ModePolicy::FullSum { .. } => (0..samples)
                .map(|k| self.population_at(k as f64 * cloud_length_m / samples as f64))
                .collect(),
        };
        Ok(values.iter().sum::<f64>() / samples as f64)
    }

    /// Individual resonant-pair terms for one ground and final sublevel.
    pub fn path_amplitudes(&self, ground: Sublevel, final_state: Sublevel) -> Result<Vec<PathAmplitude>> {
        let mut out = Vec::new();
        for (idx, it) in self.intermediates.iter().enumerate() {
            let (n, m) = self.resonant_pair(idx)?;
            for mid in self.cfg.atom.sublevels(it.level) {
                let value = self.pair_amplitude(n, m, ground, mid, final_state)?;
                if value == Complex64::new(0.0, 0.0) {
                    continue;
                }
                out.push(PathAmplitude {
                    pair: (n, m),
                    ground,
                    intermediate: mid,
                    final_state,
                    value,
                    intermediate_detuning_hz: it.detuning_hz,
                });
            }
        }
        Ok(out)
    }

    /// One row per intermediate: resonant pair, detunings, reduced dipoles, amplitude.
    pub fn path_table(&self) -> Result<Vec<PathRow>> {
        let atom = &self.cfg.atom;
        let field = |k| self.mode_field(k, 0.0);
        let mut rows = Vec::new();
        for (idx, it) in self.intermediates.iter().enumerate() {
            let (n, m) = self.resonant_pair(idx)?;
            let radial_lower = atom.radial_moment(self.cfg.ground, it.level).unwrap_or(0.0);
            let radial_upper = atom.radial_moment(it.level, self.cfg.final_level).unwrap_or(0.0);
            let lower = radial_lower * atom.reduced_angular_factor(self.cfg.ground, it.level)?;
            let upper = radial_upper * atom.reduced_angular_factor(it.level, self.cfg.final_level)?;
            let amplitude = self.pair_spectral(idx, n, m, &field) * lower * upper;
            rows.push(PathRow {
                label: atom.level(it.level).label.clone(),
                pair: (n, m),
                detuning_hz: it.detuning_hz,
                two_photon_detuning_hz: self
                    .cfg
                    .comb
                    .pair_sum_frequency(n + m)
                    .detuning_from(self.final_transition_hz),
                dipoles: (lower, upper),
                amplitude,
                relative_magnitude: 0.0,
                phase_deg: amplitude.arg().to_degrees(),
            });
        }
        let largest = rows.iter().map(|r| r.amplitude.norm()).fold(0.0, f64::max);
        if largest > 0.0 {
            for r in &mut rows {
                r.relative_magnitude = r.amplitude.norm() / largest;
            }
        }
        Ok(rows)
    }
}

/// Sum index `K` whose `K f_r + 2 f_o` is nearest `nu`, ties going low.
pub fn nearest_sum_index(comb: &CombSpec, nu: f64) -> Result<i64> {
    let lower = ((nu - 2.0 * comb.f_o) / comb.f_r).floor() as i64;
    let mut best = lower - 1;
    let mut best_err = comb.pair_sum_frequency(best).detuning_from(nu).abs();
    for k in [lower, lower + 1, lower + 2] {
        let err = comb.pair_sum_frequency(k).detuning_from(nu).abs();
        if err < best_err {
            best = k;
            best_err = err;
        }
    }
    if best < 2 * comb.n_min || best > 2 * comb.n_max {
        return Err(Error::Physics(format!("two-photon frequency {nu} Hz is outside the comb")));
    }
    Ok(best)
}

/// Population for `cfg` (geometry-aware).
pub fn population(cfg: &ExcitationConfig) -> Result<f64> {
    Excitation::new(cfg)?.population()
}

pub fn total_amplitude(cfg: &ExcitationConfig, ground: Sublevel, final_state: Sublevel) -> Result<Complex64> {
    Excitation::new(cfg)?.total_amplitude(ground, final_state)
}

pub fn standing_wave_population(cfg: &ExcitationConfig) -> Result<f64> {
    Excitation::new(cfg)?.standing_wave_population()
}

//! Fringe fits, visibility, fringe shifts and enhancement scans.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::excitation::{Excitation, ExcitationConfig, ModePolicy};
use crate::shaper::PhaseMask;

/// `rho = c1 + c2 cos(phi + c3)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeFit {
    pub c1: f64,
    pub c2: f64,
    /// Phase offset in `[0, pi)`.
    pub c3: f64,
    pub residual_rms: f64,
}

impl FringeFit {
    pub fn visibility(&self) -> Result<f64> {
        visibility(self)
    }

    pub fn model(&self, phi: f64) -> f64 {
        self.c1 + self.c2 * (phi + self.c3).cos().powi(2)
    }
}

/// Linear least-squares coefficients of `a + b cos(h phi) + c sin(h phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub residual_rms: f64,
}

pub fn fit_harmonic(samples: &[(f64, f64)], harmonic: f64) -> Result<HarmonicFit> {
    if samples.len() < 4 {
        return Err(Error::Numerical(format!(
            "fringe fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(p, y)| !p.is_finite() || !y.is_finite()) {
        return Err(Error::Numerical("fringe samples must be finite".into()));
    }
    let design = DMatrix::from_fn(samples.len(), 3, |r, c| {
        let x = harmonic * samples[r].0;
        match c {
            0 => 1.0,
            1 => x.cos(),
            _ => x.sin(),
        }
    });
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let svd = design.clone().svd(true, true);
    let largest = svd.singular_values.max();
    if svd.rank(1e-9 * largest) < 3 {
        return Err(Error::Numerical(
            "fringe design matrix is rank deficient (phases do not resolve the fringe)".into(),
        ));
    }
    let coef = svd
        .solve(&y, 1e-12 * largest)
        .map_err(|e| Error::Numerical(format!("least-squares solve failed: {e}")))?;
    let residual = &design * &coef - &y;
    Ok(HarmonicFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        residual_rms: (residual.norm_squared() / samples.len() as f64).sqrt(),
    })
}

/// Least-squares fit through `cos^2(x) = (1 + cos 2x) / 2`.
pub fn fit_fringe(samples: &[(f64, f64)]) -> Result<FringeFit> {
    if let (Some(lo), Some(hi)) = (
        samples.iter().map(|s| s.0).reduce(f64::min),
        samples.iter().map(|s| s.0).reduce(f64::max),
    ) {
        if hi - lo < PI * (1.0 - 1e-12) {
            return Err(Error::Numerical(format!(
                "fringe samples span {} rad, at least pi is required",
                hi - lo
            )));
        }
    }
    let h = fit_harmonic(samples, 2.0)?;
    let c2 = 2.0 * h.b.hypot(h.c);
    let c3 = if c2 == 0.0 { 0.0 } else { (0.5 * (-h.c).atan2(h.b)).rem_euclid(PI) };
    Ok(FringeFit {
        c1: h.a - 0.5 * c2,
        c2,
        c3: if c3 >= PI { 0.0 } else { c3 },
        residual_rms: h.residual_rms,
    })
}

pub fn visibility(fit: &FringeFit) -> Result<f64> {
    if fit.c1 == 0.0 && fit.c2 == 0.0 {
        return Err(Error::Numerical("visibility undefined for a zero fringe".into()));
    }
    Ok(fit.c2 / (2.0 * fit.c1 + fit.c2))
}

/// Wraps an angle difference of a period-pi fringe into `(-pi/2, pi/2]`.
pub fn wrap_half_period(delta: f64) -> f64 {
    if delta > -FRAC_PI_2 && delta <= FRAC_PI_2 {
        return delta;
    }
    let w = delta - PI * (delta / PI).round();
    if w <= -FRAC_PI_2 {
        w + PI
    } else if w > FRAC_PI_2 {
        w - PI
    } else {
        w
    }
}

pub fn fringe_shift_difference(a: &FringeFit, b: &FringeFit) -> f64 {
    wrap_half_period(a.c3 - b.c3)
}

/// `count` equally spaced phases on `[0, 2 pi)`.
pub fn phase_grid(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect()
}

/// Population versus the step phase of the 772-784 nm window.
pub fn fringe_scan(cfg: &ExcitationConfig, phis: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut distinct: Vec<f64> = phis.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 8 {
        return Err(Error::Config(format!(
            "a fringe scan needs at least 8 distinct phases, got {}",
            distinct.len()
        )));
    }
    if distinct[distinct.len() - 1] - distinct[0] < PI * (1.0 - 1e-12) {
        return Err(Error::Config("fringe scan phases must span at least pi".into()));
    }
    let base = Excitation::new(cfg)?;
    phis.par_iter()
        .map(|&phi| Ok((phi, base.with_mask(PhaseMask::experiment1(phi)).population()?)))
        .collect()
}

/// Result of translating a mask across the spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct EnhancementScan {
    /// `(offset, ratio)` with offsets measured from the best position.
    pub points: Vec<(f64, f64)>,
    /// Translation, in absolute terms, giving the largest ratio.
    pub peak_translation_hz: f64,
    pub peak_ratio: f64,
    pub reference_population: f64,
}

/// Population with the translated mask divided by the unshaped population.
pub fn enhancement_scan(cfg: &ExcitationConfig, mask: &PhaseMask, offsets: &[f64]) -> Result<EnhancementScan> {
    if !matches!(cfg.mode_policy, ModePolicy::FullSum { .. }) {
        return Err(Error::Config("enhancement scans need the full-sum mode policy".into()));
    }
    if offsets.is_empty() {
        return Err(Error::Config("enhancement scan needs at least one offset".into()));
    }
    let base = Excitation::new(cfg)?.with_mask(PhaseMask::zero());
    let reference = base.population()?;
    if !(reference > 0.0) {
        return Err(Error::Physics("unshaped population is zero; ratio undefined".into()));
    }
    let mut ratios = Vec::with_capacity(offsets.len());
    for &offset in offsets {
        ratios.push(base.with_mask(mask.translate(offset)).population()? / reference);
    }
    let (best, &peak_ratio) = ratios
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty scan");
    let peak = offsets[best];
    Ok(EnhancementScan {
        points: offsets.iter().zip(&ratios).map(|(&o, &r)| (o - peak, r)).collect(),
        peak_translation_hz: peak,
        peak_ratio,
        reference_population: reference,
    })
}

/// Power of discrete Fourier harmonic `k` of uniformly spaced samples.
pub fn fourier_power(values: &[f64], k: usize) -> f64 {
    let n = values.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (j, v) in values.iter().enumerate() {
        let x = 2.0 * PI * (k * j) as f64 / n;
        re += v * x.cos();
        im -= v * x.sin();
    }
    (re * re + im * im) / (n * n)
}

//! Piecewise-constant spectral phase masks, optionally pixelated.

use std::f64::consts::PI;

use crate::comb::wavelength_to_frequency;
use crate::error::{Error, Result};

/// One phase band `[from_hz, to_hz)` on a zero background.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub from_hz: f64,
    pub to_hz: f64,
    pub phase_rad: f64,
}

/// Spectral phase defined on frequency breakpoints.
///
/// `phases[k]` applies between `breakpoints[k - 1]` (inclusive) and
/// `breakpoints[k]` (exclusive); the first and last entries extend to
/// infinity. Translation is kept as a separate shift so that translating back
/// and forth restores the original mask bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMask {
    breakpoints: Vec<f64>,
    phases: Vec<f64>,
    pixel_width: f64,
    pixel_offset: f64,
    shift: f64,
}

impl PhaseMask {
    pub fn new(breakpoints: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != breakpoints.len() + 1 {
            return Err(Error::Mask(format!(
                "{} breakpoints need {} phases, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                phases.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Mask("breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Mask("breakpoints must be strictly increasing".into()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Mask("phases must be finite".into()));
        }
        Ok(PhaseMask {
            breakpoints,
            phases,
            pixel_width: 0.0,
            pixel_offset: 0.0,
            shift: 0.0,
        })
    }

    pub fn uniform(phase: f64) -> Self {
        PhaseMask::new(Vec::new(), vec![phase]).expect("a single finite phase is a valid mask")
    }

    pub fn zero() -> Self {
        Self::uniform(0.0)
    }

    /// Bands of given phase on a zero background. Bands may touch but not overlap.
    pub fn from_segments(segments: &[Segment]) -> Result<Self> {
        let mut bands: Vec<Segment> = segments
            .iter()
            .copied()
            .filter(|s| s.to_hz != s.from_hz)
            .collect();
        for s in &bands {
            if !(s.from_hz < s.to_hz) {
                return Err(Error::Mask(format!(
                    "segment [{}, {}) Hz is reversed or not finite",
                    s.from_hz, s.to_hz
                )));
            }
        }
        bands.sort_by(|a, b| a.from_hz.total_cmp(&b.from_hz));
        if let Some(w) = bands.windows(2).find(|w| w[1].from_hz < w[0].to_hz) {
            return Err(Error::Mask(format!(
                "segments [{}, {}) and [{}, {}) Hz overlap",
                w[0].from_hz, w[0].to_hz, w[1].from_hz, w[1].to_hz
            )));
        }
        let mut breakpoints = Vec::new();
        let mut phases = vec![0.0];
        for s in bands {
            if breakpoints.last() == Some(&s.from_hz) {
                *phases.last_mut().unwrap() = s.phase_rad;
            } else {
                breakpoints.push(s.from_hz);
                phases.push(s.phase_rad);
            }
            breakpoints.push(s.to_hz);
            phases.push(0.0);
        }
        PhaseMask::new(breakpoints, phases)
    }

    /// Phase `phi` between 784 nm and 772 nm, zero elsewhere.
    pub fn experiment1(phi: f64) -> Self {
        PhaseMask::from_segments(&[Segment {
            from_hz: wavelength_to_frequency(784e-9),
            to_hz: wavelength_to_frequency(772e-9),
            phase_rad: phi,
        }])
        .expect("fixed window is valid")
    }

    /// A pi band of width `width_x` just below each edge frequency.
    pub fn experiment2(edge_a: f64, edge_b: f64, width_a: f64, width_b: f64) -> Result<Self> {
        if !(width_a >= 0.0 && width_b >= 0.0) {
            return Err(Error::Mask("band widths must be non-negative".into()));
        }
        let a = Segment { from_hz: edge_a - width_a, to_hz: edge_a, phase_rad: PI };
        let b = Segment { from_hz: edge_b - width_b, to_hz: edge_b, phase_rad: PI };
        let (lo, hi) = if a.from_hz <= b.from_hz { (a, b) } else { (b, a) };
        if width_a > 0.0 && width_b > 0.0 && hi.from_hz < lo.to_hz {
            return Err(Error::Mask(format!(
                "pi bands [{}, {}) and [{}, {}) Hz overlap",
                lo.from_hz, lo.to_hz, hi.from_hz, hi.to_hz
            )));
        }
        PhaseMask::from_segments(&[a, b])
    }

    pub fn with_pixels(mut self, pixel_width: f64, pixel_offset: f64) -> Result<Self> {
        if !(pixel_width >= 0.0) || !pixel_width.is_finite() || !pixel_offset.is_finite() {
            return Err(Error::Mask(format!(
                "pixel width {pixel_width} Hz and offset {pixel_offset} Hz must be finite, width non-negative"
            )));
        }
        self.pixel_width = pixel_width;
        self.pixel_offset = pixel_offset;
        Ok(self)
    }

    /// Same mask moved by `delta` Hz, pixel grid included.
    pub fn translate(&self, delta: f64) -> Self {
        PhaseMask { shift: self.shift + delta, ..self.clone() }
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn pixel_width(&self) -> f64 {
        self.pixel_width
    }

    /// Breakpoints in absolute frequency, after translation.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|b| b + self.shift).collect()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    fn ideal_phase(&self, nu: f64) -> f64 {
        self.phases[self.breakpoints.partition_point(|&b| b <= nu)]
    }

    /// Phase applied to light at `nu`.
    pub fn phase_at(&self, nu: f64) -> f64 {
        let local = nu - self.shift;
        if self.pixel_width > 0.0 {
            let pixel = ((local - self.pixel_offset) / self.pixel_width).floor();
            self.ideal_phase(self.pixel_offset + (pixel + 0.5) * self.pixel_width)
        } else {
            self.ideal_phase(local)
        }
    }
}

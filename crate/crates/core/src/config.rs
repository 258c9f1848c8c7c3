//! Run configuration documents.
//!
//! One TOML document per run. Physical quantities carry their unit in the key
//! name (`f_r_Hz`, `center_nm`, `phase_rad`, ...).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::atom::AtomSystem;
use crate::comb::{wavelength_to_frequency, CombSpec, SpectralEnvelope, DEFAULT_FIELD_FLOOR};
use crate::error::{Error, Result};
use crate::excitation::{
    ExcitationConfig, Geometry, ModePolicy, DEFAULT_CLOUD_LENGTH_M, DEFAULT_DETUNING_MULTIPLE,
    DEFAULT_INTERMEDIATE_WINDOW_HZ, DEFAULT_SPATIAL_SAMPLES,
};
use crate::shaper::{PhaseMask, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fringe,
    Enhance,
    Paths,
    ScanMask,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fringe => "fringe",
            Experiment::Enhance => "enhance",
            Experiment::Paths => "paths",
            Experiment::ScanMask => "scan-mask",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    /// Atomic data document; the bundled 87Rb data when absent.
    pub atom_data_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub comb: CombSection,
    pub excitation: ExcitationSection,
    #[serde(default)]
    pub mask: MaskSection,
    #[serde(default)]
    pub fringe: FringeSection,
    pub enhance: Option<EnhanceSection>,
    pub scan_mask: Option<ScanMaskSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombSection {
    #[serde(rename = "f_r_Hz")]
    pub f_r_hz: f64,
    #[serde(rename = "f_o_Hz")]
    pub f_o_hz: f64,
    pub center_nm: f64,
    /// Intensity FWHM of the Gaussian envelope.
    pub fwhm_nm: f64,
    #[serde(default = "one")]
    pub peak_field: f64,
    /// Field level, relative to the peak, at which the mode range is cut.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    pub n_min: Option<i64>,
    pub n_max: Option<i64>,
}

fn one() -> f64 {
    1.0
}

fn default_truncation() -> f64 {
    DEFAULT_FIELD_FLOOR
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    #[default]
    ResonantOnly,
    FullSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryName {
    #[default]
    TravelingWave,
    StandingWave,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationSection {
    pub ground: String,
    #[serde(rename = "final")]
    pub final_level: String,
    /// Intermediates expected to be resonant; checked by `validate`.
    #[serde(default)]
    pub resonant_intermediates: Vec<String>,
    #[serde(rename = "intermediate_window_Hz", default = "default_window")]
    pub intermediate_window_hz: f64,
    #[serde(default)]
    pub polarization: i32,
    #[serde(default)]
    pub mode_policy: PolicyName,
    #[serde(default = "default_multiple")]
    pub detuning_multiple: f64,
    #[serde(default)]
    pub geometry: GeometryName,
    #[serde(default = "default_cloud_um")]
    pub cloud_length_um: f64,
    #[serde(default = "default_samples")]
    pub spatial_samples: usize,
    #[serde(default)]
    pub relative_phase_rad: f64,
    /// Linewidth overrides, `label -> Hz`.
    #[serde(rename = "linewidth_overrides_Hz", default)]
    pub linewidth_overrides_hz: std::collections::BTreeMap<String, f64>,
}

fn default_window() -> f64 {
    DEFAULT_INTERMEDIATE_WINDOW_HZ
}

fn default_multiple() -> f64 {
    DEFAULT_DETUNING_MULTIPLE
}

fn default_cloud_um() -> f64 {
    DEFAULT_CLOUD_LENGTH_M * 1e6
}

fn default_samples() -> usize {
    DEFAULT_SPATIAL_SAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MaskSection {
    #[serde(default)]
    pub segment: Vec<SegmentSpec>,
    #[serde(rename = "pixel_width_GHz", default)]
    pub pixel_width_ghz: f64,
    #[serde(rename = "offset_GHz", default)]
    pub offset_ghz: f64,
}

/// One band, given either in wavelength or in frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub from_nm: Option<f64>,
    pub to_nm: Option<f64>,
    #[serde(rename = "from_THz")]
    pub from_thz: Option<f64>,
    #[serde(rename = "to_THz")]
    pub to_thz: Option<f64>,
    pub phase_rad: f64,
}

impl SegmentSpec {
    fn to_segment(&self) -> Result<Segment> {
        let (from, to) = match (self.from_nm, self.to_nm, self.from_thz, self.to_thz) {
            (Some(a), Some(b), None, None) => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::Config("mask wavelengths must be positive".into()));
                }
                let (x, y) = (wavelength_to_frequency(a * 1e-9), wavelength_to_frequency(b * 1e-9));
                (x.min(y), x.max(y))
            }
            (None, None, Some(a), Some(b)) => (a.min(b) * 1e12, a.max(b) * 1e12),
            _ => {
                return Err(Error::Config(
                    "mask segment needs either from_nm/to_nm or from_THz/to_THz".into(),
                ))
            }
        };
        Ok(Segment { from_hz: from, to_hz: to, phase_rad: self.phase_rad })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringeSection {
    #[serde(default = "default_phi_points")]
    pub phi_points: usize,
    #[serde(default)]
    pub phi_start_rad: f64,
    /// Exclusive end of the phase grid.
    #[serde(default = "two_pi")]
    pub phi_stop_rad: f64,
}

impl Default for FringeSection {
    fn default() -> Self {
        FringeSection { phi_points: default_phi_points(), phi_start_rad: 0.0, phi_stop_rad: two_pi() }
    }
}

fn default_phi_points() -> usize {
    32
}

fn two_pi() -> f64 {
    2.0 * PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnhanceSection {
    /// Levels whose resonance with the ground level marks each pi-band edge.
    pub edge_a_level: String,
    pub edge_b_level: String,
    /// Band widths; half the edge separation when absent.
    #[serde(rename = "width_a_THz")]
    pub width_a_thz: Option<f64>,
    #[serde(rename = "width_b_THz")]
    pub width_b_thz: Option<f64>,
    #[serde(rename = "offset_start_THz")]
    pub offset_start_thz: f64,
    #[serde(rename = "offset_stop_THz")]
    pub offset_stop_thz: f64,
    pub offset_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanParameter {
    /// Translation of the whole mask.
    #[serde(rename = "offset_Hz")]
    OffsetHz,
    /// Phase of one segment.
    #[serde(rename = "phase_rad")]
    PhaseRad,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanMaskSection {
    pub parameter: ScanParameter,
    /// Segment index for `phase_rad` scans.
    #[serde(default)]
    pub segment: usize,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid run configuration: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, String)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok((cfg, text))
    }

    /// Loads the atom, resolving a relative data path against `base_dir`.
    pub fn atom(&self, base_dir: &Path) -> Result<AtomSystem> {
        let mut atom = match &self.atom_data_path {
            None => AtomSystem::rb87(),
            Some(p) => {
                let full = if p.is_absolute() { p.clone() } else { base_dir.join(p) };
                if !full.exists() {
                    return Err(Error::Config(format!("atom data file {} does not exist", full.display())));
                }
                AtomSystem::load(&full)?
            }
        };
        for (label, &hz) in &self.excitation.linewidth_overrides_hz {
            let id = atom.find(label)?;
            atom.set_linewidth(id, hz)?;
        }
        Ok(atom)
    }

    pub fn comb_spec(&self) -> Result<CombSpec> {
        let c = &self.comb;
        let envelope = SpectralEnvelope::new(c.center_nm * 1e-9, c.fwhm_nm * 1e-9, c.peak_field)?;
        match (c.n_min, c.n_max) {
            (Some(lo), Some(hi)) => CombSpec::new(c.f_r_hz, c.f_o_hz, lo, hi, envelope),
            (None, None) => CombSpec::truncated(c.f_r_hz, c.f_o_hz, envelope, c.truncation),
            _ => Err(Error::Config("comb n_min and n_max must be given together".into())),
        }
    }

    /// The user-defined mask of the `[mask]` section.
    pub fn mask(&self) -> Result<PhaseMask> {
        self.mask_with_phase(None)
    }

    /// The `[mask]` mask with the phase of one segment replaced.
    pub fn mask_with_phase(&self, replace: Option<(usize, f64)>) -> Result<PhaseMask> {
        let mut segments = self
            .mask
            .segment
            .iter()
            .map(SegmentSpec::to_segment)
            .collect::<Result<Vec<_>>>()?;
        if let Some((k, phase)) = replace {
            let n = segments.len();
            segments
                .get_mut(k)
                .ok_or_else(|| Error::Config(format!("mask segment {k} does not exist ({n} segments)")))?
                .phase_rad = phase;
        }
        PhaseMask::from_segments(&segments)?
            .with_pixels(self.mask.pixel_width_ghz * 1e9, self.mask.offset_ghz * 1e9)
    }

    pub fn excitation(&self, base_dir: &Path) -> Result<ExcitationConfig> {
        let atom = Arc::new(self.atom(base_dir)?);
        let ground = atom.find(&self.excitation.ground)?;
        let final_level = atom.find(&self.excitation.final_level)?;
        let e = &self.excitation;
        let mut cfg = ExcitationConfig::new(self.comb_spec()?, atom, ground, final_level);
        cfg.mask = self.mask()?;
        cfg.intermediate_window_hz = e.intermediate_window_hz;
        cfg.polarization = e.polarization;
        cfg.mode_policy = match e.mode_policy {
            PolicyName::ResonantOnly => ModePolicy::ResonantOnly,
            PolicyName::FullSum => ModePolicy::FullSum { detuning_multiple: e.detuning_multiple },
        };
        cfg.geometry = match e.geometry {
            GeometryName::TravelingWave => Geometry::TravelingWave,
            GeometryName::StandingWave => Geometry::StandingWave {
                cloud_length_m: e.cloud_length_um * 1e-6,
                samples: e.spatial_samples,
                relative_phase_rad: e.relative_phase_rad,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn phi_grid(&self) -> Result<Vec<f64>> {
        let f = &self.fringe;
        if f.phi_points == 0 || !(f.phi_stop_rad > f.phi_start_rad) {
            return Err(Error::Config("fringe phase grid is empty".into()));
        }
        let step = (f.phi_stop_rad - f.phi_start_rad) / f.phi_points as f64;
        Ok((0..f.phi_points).map(|k| f.phi_start_rad + step * k as f64).collect())
    }

    pub fn enhance_section(&self) -> Result<&EnhanceSection> {
        self.enhance
            .as_ref()
            .ok_or_else(|| Error::Config("`enhance` needs an [enhance] section".into()))
    }

    /// The pi-band mask and translation grid of the `[enhance]` section.
    pub fn enhancement_mask(&self, cfg: &ExcitationConfig) -> Result<(PhaseMask, Vec<f64>)> {
        let e = self.enhance_section()?;
        let atom = &cfg.atom;
        let edge_a = atom.transition_frequency(cfg.ground, atom.find(&e.edge_a_level)?);
        let edge_b = atom.transition_frequency(cfg.ground, atom.find(&e.edge_b_level)?);
        let half = 0.5 * (edge_a - edge_b).abs();
        let wa = e.width_a_thz.map_or(half, |w| w * 1e12);
        let wb = e.width_b_thz.map_or(half, |w| w * 1e12);
        let mask = PhaseMask::experiment2(edge_a, edge_b, wa, wb)?
            .with_pixels(self.mask.pixel_width_ghz * 1e9, self.mask.offset_ghz * 1e9)?;
        if e.offset_points == 0 {
            return Err(Error::Config("enhance offset_points must be positive".into()));
        }
        let offsets = linspace(e.offset_start_thz * 1e12, e.offset_stop_thz * 1e12, e.offset_points);
        Ok((mask, offsets))
    }

    pub fn scan_section(&self) -> Result<&ScanMaskSection> {
        self.scan_mask
            .as_ref()
            .ok_or_else(|| Error::Config("`scan-mask` needs a [scan_mask] section".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
experiment = "fringe"

[comb]
f_r_Hz = 100.59660605e6
f_o_Hz = 16.94e6
center_nm = 778.0
fwhm_nm = 55.0

[excitation]
ground = "5S1/2 F=2"
final = "5D3/2 F=1"
"#;

    #[test]
    fn minimal_config_builds() {
        let cfg = RunConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(cfg.experiment, Some(Experiment::Fringe));
        let ex = cfg.excitation(Path::new(".")).unwrap();
        assert_eq!(ex.mode_policy, ModePolicy::ResonantOnly);
        assert_eq!(cfg.phi_grid().unwrap().len(), 32);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = BASIC.replace("center_nm", "centre_nm");
        assert!(matches!(RunConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn zero_repetition_rate_fails() {
        let cfg = RunConfig::from_toml_str(&BASIC.replace("100.59660605e6", "0.0")).unwrap();
        assert!(cfg.comb_spec().is_err());
    }

    #[test]
    fn segment_units() {
        let text = format!(
            "{BASIC}\n[[mask.segment]]\nfrom_nm = 784.0\nto_nm = 772.0\nphase_rad = 1.0\n\n[[mask.segment]]\nfrom_THz = 390.0\nto_THz = 391.0\nphase_rad = 2.0\n"
        );
        let mask = RunConfig::from_toml_str(&text).unwrap().mask().unwrap();
        assert_eq!(mask.phase_at(wavelength_to_frequency(778e-9)), 1.0);
        assert_eq!(mask.phase_at(390.5e12), 2.0);
        let bad = format!("{BASIC}\n[[mask.segment]]\nfrom_nm = 784.0\nto_THz = 391.0\nphase_rad = 1.0\n");
        assert!(RunConfig::from_toml_str(&bad).unwrap().mask().is_err());
    }

    #[test]
    fn missing_atom_file_names_path() {
        let text = format!("atom_data_path = \"nowhere/rb.toml\"\n{BASIC}");
        let err = RunConfig::from_toml_str(&text).unwrap().atom(Path::new("/tmp")).unwrap_err();
        assert!(err.to_string().contains("nowhere/rb.toml"), "{err}");
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(-1.0, 1.0, 3), vec![-1.0, 0.0, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}

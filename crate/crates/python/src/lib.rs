//! Python bindings for the comb excitation model.

use std::path::Path;
use std::sync::Arc;

use diamond_comb::analysis::{self, FringeFit};
use diamond_comb::angular::{self, HalfInt};
use diamond_comb::atom::AtomSystem;
use diamond_comb::comb::{CombSpec, SpectralEnvelope};
use diamond_comb::config::RunConfig;
use diamond_comb::excitation::{self, Excitation as CoreExcitation, ExcitationConfig, Geometry, ModePolicy};
use diamond_comb::shaper::{PhaseMask as CoreMask, Segment};
use diamond_comb::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn half(x: f64) -> PyResult<HalfInt> {
    HalfInt::from_f64(x).ok_or_else(|| PyValueError::new_err(format!("{x} is not a multiple of 1/2")))
}

#[pyclass(name = "Atom", module = "diamond_comb_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Atom {
    inner: Arc<AtomSystem>,
}

#[pymethods]
impl Atom {
    /// Bundled 87Rb data.
    #[staticmethod]
    fn rb87() -> Self {
        Atom { inner: Arc::new(AtomSystem::rb87()) }
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Atom { inner: Arc::new(AtomSystem::load(path).map_err(to_py)?) })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.levels().iter().map(|l| l.label.clone()).collect()
    }

    fn energy_hz(&self, label: &str) -> PyResult<f64> {
        let id = self.inner.find(label).map_err(to_py)?;
        Ok(self.inner.level(id).energy_hz)
    }

    fn linewidth_hz(&self, label: &str) -> PyResult<f64> {
        let id = self.inner.find(label).map_err(to_py)?;
        Ok(self.inner.level(id).linewidth_hz)
    }

    fn transition_frequency(&self, lower: &str, upper: &str) -> PyResult<f64> {
        let a = self.inner.find(lower).map_err(to_py)?;
        let b = self.inner.find(upper).map_err(to_py)?;
        Ok(self.inner.transition_frequency(a, b))
    }

    fn __repr__(&self) -> String {
        format!("Atom({} levels)", self.inner.levels().len())
    }
}

#[pyclass(name = "Comb", module = "diamond_comb_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Comb {
    inner: CombSpec,
}

#[pymethods]
impl Comb {
    /// Gaussian comb truncated where the field falls below `floor` of its peak.
    #[new]
    #[pyo3(signature = (f_r_hz, f_o_hz, center_nm = 778.0, fwhm_nm = 55.0, floor = 1e-4))]
    fn new(f_r_hz: f64, f_o_hz: f64, center_nm: f64, fwhm_nm: f64, floor: f64) -> PyResult<Self> {
        let env = SpectralEnvelope::new(center_nm * 1e-9, fwhm_nm * 1e-9, 1.0).map_err(to_py)?;
        Ok(Comb { inner: CombSpec::truncated(f_r_hz, f_o_hz, env, floor).map_err(to_py)? })
    }

    /// Flat comb over an explicit mode range.
    #[staticmethod]
    #[pyo3(signature = (f_r_hz, f_o_hz, n_min, n_max, center_nm = 778.0))]
    fn flat(f_r_hz: f64, f_o_hz: f64, n_min: i64, n_max: i64, center_nm: f64) -> PyResult<Self> {
        let env = SpectralEnvelope::flat(center_nm * 1e-9, 1.0).map_err(to_py)?;
        Ok(Comb { inner: CombSpec::new(f_r_hz, f_o_hz, n_min, n_max, env).map_err(to_py)? })
    }

    #[getter]
    fn f_r(&self) -> f64 {
        self.inner.f_r
    }

    #[getter]
    fn f_o(&self) -> f64 {
        self.inner.f_o
    }

    #[getter]
    fn n_min(&self) -> i64 {
        self.inner.n_min
    }

    #[getter]
    fn n_max(&self) -> i64 {
        self.inner.n_max
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn mode_frequency(&self, n: i64) -> PyResult<f64> {
        self.inner.mode_frequency(n).map_err(to_py)
    }

    fn field(&self, n: i64) -> f64 {
        self.inner.field(n)
    }

    fn mode_index_near(&self, nu_hz: f64) -> PyResult<i64> {
        self.inner.mode_index_near(nu_hz).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Comb(f_r={} Hz, f_o={} Hz, modes {}..={})",
            self.inner.f_r, self.inner.f_o, self.inner.n_min, self.inner.n_max
        )
    }
}

#[pyclass(name = "PhaseMask", module = "diamond_comb_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PhaseMask {
    inner: CoreMask,
}

#[pymethods]
impl PhaseMask {
    /// Piecewise-constant mask from `(from_hz, to_hz, phase_rad)` segments.
    #[new]
    #[pyo3(signature = (segments = Vec::new()))]
    fn new(segments: Vec<(f64, f64, f64)>) -> PyResult<Self> {
        let segments: Vec<Segment> = segments
            .into_iter()
            .map(|(from_hz, to_hz, phase_rad)| Segment { from_hz, to_hz, phase_rad })
            .collect();
        Ok(PhaseMask { inner: CoreMask::from_segments(&segments).map_err(to_py)? })
    }

    #[staticmethod]
    fn window(phi: f64) -> Self {
        PhaseMask { inner: CoreMask::experiment1(phi) }
    }

    #[staticmethod]
    fn pi_bands(edge_a_hz: f64, edge_b_hz: f64, width_a_hz: f64, width_b_hz: f64) -> PyResult<Self> {
        Ok(PhaseMask { inner: CoreMask::experiment2(edge_a_hz, edge_b_hz, width_a_hz, width_b_hz).map_err(to_py)? })
    }

    fn with_pixels(&self, pixel_width_hz: f64, pixel_offset_hz: f64) -> PyResult<Self> {
        Ok(PhaseMask { inner: self.inner.clone().with_pixels(pixel_width_hz, pixel_offset_hz).map_err(to_py)? })
    }

    fn translate(&self, delta_hz: f64) -> Self {
        PhaseMask { inner: self.inner.translate(delta_hz) }
    }

    fn phase_at(&self, nu_hz: f64) -> f64 {
        self.inner.phase_at(nu_hz)
    }

    #[getter]
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    #[getter]
    fn phases(&self) -> Vec<f64> {
        self.inner.phases().to_vec()
    }
}

#[pyclass(name = "Excitation", module = "diamond_comb_py", frozen, skip_from_py_object)]
struct Excitation {
    cfg: ExcitationConfig,
}

impl Excitation {
    fn with(&self, mask: Option<&PhaseMask>) -> ExcitationConfig {
        match mask {
            Some(m) => self.cfg.with_mask(m.inner.clone()),
            None => self.cfg.clone(),
        }
    }
}

fn fit_dict<'py>(py: Python<'py>, fit: &FringeFit) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("c1", fit.c1)?;
    d.set_item("c2", fit.c2)?;
    d.set_item("c3", fit.c3)?;
    d.set_item("residual_rms", fit.residual_rms)?;
    d.set_item("visibility", fit.visibility().ok())?;
    Ok(d)
}

#[pymethods]
impl Excitation {
    #[new]
    #[pyo3(signature = (
        comb,
        atom,
        ground,
        final_level,
        full_sum = false,
        standing_wave = None,
        intermediate_window_hz = None,
        polarization = 0,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        comb: &Comb,
        atom: &Atom,
        ground: &str,
        final_level: &str,
        full_sum: bool,
        standing_wave: Option<(f64, usize)>,
        intermediate_window_hz: Option<f64>,
        polarization: i32,
    ) -> PyResult<Self> {
        let g = atom.inner.find(ground).map_err(to_py)?;
        let f = atom.inner.find(final_level).map_err(to_py)?;
        let mut cfg = ExcitationConfig::new(comb.inner.clone(), atom.inner.clone(), g, f);
        if full_sum {
            cfg.mode_policy = ModePolicy::full_sum();
        }
        if let Some((cloud_length_m, samples)) = standing_wave {
            cfg.geometry = Geometry::StandingWave { cloud_length_m, samples, relative_phase_rad: 0.0 };
        }
        if let Some(w) = intermediate_window_hz {
            cfg.intermediate_window_hz = w;
        }
        cfg.polarization = polarization;
        cfg.validate().map_err(to_py)?;
        Ok(Excitation { cfg })
    }

    /// Excitation described by a run configuration file.
    #[staticmethod]
    fn from_config(path: &str) -> PyResult<Self> {
        let (run, _) = RunConfig::load(path).map_err(to_py)?;
        let base = Path::new(path).parent().unwrap_or(Path::new("."));
        Ok(Excitation { cfg: run.excitation(base).map_err(to_py)? })
    }

    #[pyo3(signature = (mask = None))]
    fn population(&self, py: Python<'_>, mask: Option<PyRef<'_, PhaseMask>>) -> PyResult<f64> {
        let cfg = self.with(mask.as_deref());
        py.detach(|| excitation::population(&cfg)).map_err(to_py)
    }

    /// `(phi, population)` with the window mask at each phase.
    fn fringe_scan(&self, py: Python<'_>, phis: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        py.detach(|| analysis::fringe_scan(&self.cfg, &phis)).map_err(to_py)
    }

    /// Fringe over `points` phases in [0, pi), fitted to `c1 + c2 cos^2(phi + c3)`.
    #[pyo3(signature = (points = 32))]
    fn fringe<'py>(&self, py: Python<'py>, points: usize) -> PyResult<Bound<'py, PyDict>> {
        let scan = py.detach(|| analysis::fringe_scan(&self.cfg, &analysis::phase_grid(points))).map_err(to_py)?;
        let fit = analysis::fit_fringe(&scan).map_err(to_py)?;
        let d = fit_dict(py, &fit)?;
        d.set_item("scan", scan)?;
        Ok(d)
    }

    /// Ratio of shaped to unshaped full-sum population as `mask` is translated.
    fn enhancement_scan<'py>(
        &self,
        py: Python<'py>,
        mask: &PhaseMask,
        offsets_hz: Vec<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let scan = py
            .detach(|| analysis::enhancement_scan(&self.cfg, &mask.inner, &offsets_hz))
            .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("points", scan.points)?;
        d.set_item("peak_translation_hz", scan.peak_translation_hz)?;
        d.set_item("peak_ratio", scan.peak_ratio)?;
        d.set_item("reference_population", scan.reference_population)?;
        Ok(d)
    }

    fn path_table<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let ex = CoreExcitation::new(&self.cfg).map_err(to_py)?;
        let rows = ex.path_table().map_err(to_py)?;
        rows.into_iter()
            .map(|row| {
                let d = PyDict::new(py);
                d.set_item("intermediate", row.label)?;
                d.set_item("pair", row.pair)?;
                d.set_item("detuning_hz", row.detuning_hz)?;
                d.set_item("two_photon_detuning_hz", row.two_photon_detuning_hz)?;
                d.set_item("dipoles", row.dipoles)?;
                d.set_item("amplitude", row.amplitude)?;
                d.set_item("relative_magnitude", row.relative_magnitude)?;
                d.set_item("phase_deg", row.phase_deg)?;
                Ok(d)
            })
            .collect()
    }

    fn intermediates(&self) -> PyResult<Vec<(String, f64)>> {
        let ex = CoreExcitation::new(&self.cfg).map_err(to_py)?;
        Ok(ex
            .intermediates()
            .iter()
            .map(|it| (self.cfg.atom.level(it.level).label.clone(), it.detuning_hz))
            .collect())
    }
}

/// Fit `(phi, population)` samples to `c1 + c2 cos^2(phi + c3)`.
#[pyfunction]
fn fit_fringe<'py>(py: Python<'py>, samples: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let fit = analysis::fit_fringe(&samples).map_err(to_py)?;
    fit_dict(py, &fit)
}

#[pyfunction]
fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> PyResult<f64> {
    angular::wigner3j(half(j1)?, half(j2)?, half(j3)?, half(m1)?, half(m2)?, half(m3)?).map_err(to_py)
}

#[pyfunction]
fn wigner6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> PyResult<f64> {
    angular::wigner6j(half(j1)?, half(j2)?, half(j3)?, half(j4)?, half(j5)?, half(j6)?).map_err(to_py)
}

/// Single-resonance denominator for `detuning = nu_mode - nu_transition`.
#[pyfunction]
fn lorentzian(detuning_hz: f64, linewidth_hz: f64) -> Complex64 {
    excitation::lorentzian(detuning_hz, linewidth_hz)
}

#[pymodule]
fn diamond_comb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Atom>()?;
    m.add_class::<Comb>()?;
    m.add_class::<PhaseMask>()?;
    m.add_class::<Excitation>()?;
    m.add_function(wrap_pyfunction!(fit_fringe, m)?)?;
    m.add_function(wrap_pyfunction!(wigner3j, m)?)?;
    m.add_function(wrap_pyfunction!(wigner6j, m)?)?;
    m.add_function(wrap_pyfunction!(lorentzian, m)?)?;
    Ok(())
}

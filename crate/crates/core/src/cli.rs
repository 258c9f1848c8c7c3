//! Command-line driver.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analysis::{enhancement_scan, fit_fringe, fringe_scan};
use crate::config::{linspace, Experiment, RunConfig, ScanParameter};
use crate::error::{Error, Result};
use crate::excitation::Excitation;
use crate::output::{Cell, OutputSet, Table};
use crate::validation::{check_declared, format_survey, resonance_survey};

#[derive(Debug, Parser)]
#[command(name = "diamond-comb", version, about = "Comb-driven two-photon excitation of a diamond atom")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; overrides `output_path` from the configuration.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for the parallel sums. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Reserved; the simulation has no stochastic component.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Population versus step phase, with fringe fit.
    Fringe,
    /// Pi-band mask translated across the spectrum.
    Enhance,
    /// Resonant-pair amplitude and phase of each intermediate.
    Paths,
    /// Sweep of a user-defined mask parameter.
    ScanMask,
    /// Check the configuration and list resonant modes without running.
    Validate,
}

impl Command {
    fn experiment(self) -> Option<Experiment> {
        match self {
            Command::Fringe => Some(Experiment::Fringe),
            Command::Enhance => Some(Experiment::Enhance),
            Command::Paths => Some(Experiment::Paths),
            Command::ScanMask => Some(Experiment::ScanMask),
            Command::Validate => None,
        }
    }
}

struct Loaded {
    config: RunConfig,
    text: String,
    base_dir: PathBuf,
}

fn load(cli: &Cli) -> Result<Loaded> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let (config, text) = RunConfig::load(path)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, text, base_dir })
}

fn output_dir(cli: &Cli, loaded: &Loaded) -> Result<PathBuf> {
    if let Some(dir) = &cli.output {
        return Ok(dir.clone());
    }
    match &loaded.config.output_path {
        Some(p) if p.is_absolute() => Ok(p.clone()),
        Some(p) => Ok(loaded.base_dir.join(p)),
        None => Err(Error::Config("no output directory: pass --output or set output_path".into())),
    }
}

/// Runs one subcommand, writing human-readable progress to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let mut buffer = Vec::new();
    let result = match cli.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            pool.install(|| dispatch(cli, &mut buffer))
        }
        None => dispatch(cli, &mut buffer),
    };
    out.write_all(&buffer).map_err(|e| Error::io("<stdout>", e))?;
    result
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let loaded = load(cli)?;
    if let (Some(want), Some(have)) = (cli.command.experiment(), loaded.config.experiment) {
        if want != have {
            return Err(Error::Config(format!(
                "configuration is for `{}`, not `{}`",
                have.name(),
                want.name()
            )));
        }
    }
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match cli.command {
        Command::Validate => {
            let report = validate(&loaded)?;
            out.write_all(report.as_bytes()).map_err(io)?;
            Ok(())
        }
        Command::Fringe => run_fringe(cli, &loaded, out),
        Command::Enhance => run_enhance(cli, &loaded, out),
        Command::Paths => run_paths(cli, &loaded, out),
        Command::ScanMask => run_scan_mask(cli, &loaded, out),
    }
}

fn validate(loaded: &Loaded) -> Result<String> {
    let rc = &loaded.config;
    let cfg = rc.excitation(&loaded.base_dir)?;
    let atom = &cfg.atom;
    let ex = Excitation::new(&cfg)?;
    let survey = resonance_survey(&cfg.comb, atom, cfg.ground, cfg.final_level)?;
    let declared = rc
        .excitation
        .resonant_intermediates
        .iter()
        .map(|l| atom.find(l))
        .collect::<Result<Vec<_>>>()?;
    check_declared(atom, &survey[0], &declared)?;
    if rc.enhance.is_some() {
        rc.enhancement_mask(&cfg)?;
    }
    if rc.scan_mask.is_some() {
        scan_values(rc)?;
    }
    let mut report = format!(
        "configuration valid\ncomb: f_r = {} Hz, f_o = {} Hz, modes {}..={} ({} modes)\nintermediates in window: {}\n",
        rc.comb.f_r_hz,
        rc.comb.f_o_hz,
        cfg.comb.n_min,
        cfg.comb.n_max,
        cfg.comb.len(),
        ex.intermediates()
            .iter()
            .map(|i| atom.level(i.level).label.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    report.push_str(&format_survey(atom, &survey));
    Ok(report)
}

fn run_fringe(cli: &Cli, loaded: &Loaded, out: &mut dyn Write) -> Result<()> {
    let rc = &loaded.config;
    let cfg = rc.excitation(&loaded.base_dir)?;
    let scan = fringe_scan(&cfg, &rc.phi_grid()?)?;
    let fit = fit_fringe(&scan)?;
    let vis = fit.visibility()?;

    let mut table = Table::new(&["phi_rad", "population"]);
    for &(phi, pop) in &scan {
        table.push(vec![phi.into(), pop.into()]);
    }
    let mut summary = Table::new(&["c1", "c2", "c3_rad", "visibility", "residual_rms"]);
    summary.push(vec![fit.c1.into(), fit.c2.into(), fit.c3.into(), vis.into(), fit.residual_rms.into()]);

    let mut set = OutputSet::new(output_dir(cli, loaded)?);
    set.add_table("fringe.csv", &table)?;
    set.add_table("summary.csv", &summary)?;
    let dir = set.dir().to_path_buf();
    set.write("fringe", &loaded.text, cli.seed)?;
    writeln!(
        out,
        "visibility {vis:.4}  c3 {:.4} rad  ({} points) -> {}",
        fit.c3,
        scan.len(),
        dir.display()
    )
    .map_err(|e| Error::io("<stdout>", e))
}

fn run_enhance(cli: &Cli, loaded: &Loaded, out: &mut dyn Write) -> Result<()> {
    let rc = &loaded.config;
    let cfg = rc.excitation(&loaded.base_dir)?;
    let (mask, offsets) = rc.enhancement_mask(&cfg)?;
    let scan = enhancement_scan(&cfg, &mask, &offsets)?;

    let mut table = Table::new(&["offset_Hz", "ratio"]);
    for &(o, r) in &scan.points {
        table.push(vec![o.into(), r.into()]);
    }
    let mut summary = Table::new(&["peak_translation_Hz", "peak_ratio", "reference_population"]);
    summary.push(vec![
        scan.peak_translation_hz.into(),
        scan.peak_ratio.into(),
        scan.reference_population.into(),
    ]);
    let mut set = OutputSet::new(output_dir(cli, loaded)?);
    set.add_table("enhance.csv", &table)?;
    set.add_table("summary.csv", &summary)?;
    let dir = set.dir().to_path_buf();
    set.write("enhance", &loaded.text, cli.seed)?;
    writeln!(
        out,
        "peak ratio {:.4} at translation {:.4} THz -> {}",
        scan.peak_ratio,
        scan.peak_translation_hz / 1e12,
        dir.display()
    )
    .map_err(|e| Error::io("<stdout>", e))
}

fn run_paths(cli: &Cli, loaded: &Loaded, out: &mut dyn Write) -> Result<()> {
    let rc = &loaded.config;
    let cfg = rc.excitation(&loaded.base_dir)?;
    let rows = Excitation::new(&cfg)?.path_table()?;
    let mut table = Table::new(&[
        "intermediate",
        "n",
        "m",
        "detuning_Hz",
        "two_photon_detuning_Hz",
        "dipole_lower",
        "dipole_upper",
        "dipole_sign_product",
        "relative_amplitude",
        "phase_deg",
    ]);
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    for r in &rows {
        let sign = (r.dipoles.0 * r.dipoles.1).signum() as i64;
        table.push(vec![
            r.label.as_str().into(),
            r.pair.0.into(),
            r.pair.1.into(),
            r.detuning_hz.into(),
            r.two_photon_detuning_hz.into(),
            r.dipoles.0.into(),
            r.dipoles.1.into(),
            Cell::Int(sign),
            r.relative_magnitude.into(),
            r.phase_deg.into(),
        ]);
        writeln!(
            out,
            "{:<10} detuning {:>+9.3} MHz  |a| {:.3}  phase {:>+7.1} deg  dipole sign {:+}",
            r.label,
            r.detuning_hz / 1e6,
            r.relative_magnitude,
            r.phase_deg,
            sign
        )
        .map_err(io)?;
    }
    let mut set = OutputSet::new(output_dir(cli, loaded)?);
    set.add_table("paths.csv", &table)?;
    set.write("paths", &loaded.text, cli.seed)?;
    Ok(())
}

fn scan_values(rc: &RunConfig) -> Result<Vec<f64>> {
    let s = rc.scan_section()?;
    if s.points == 0 {
        return Err(Error::Config("scan_mask points must be positive".into()));
    }
    if s.parameter == ScanParameter::PhaseRad {
        rc.mask_with_phase(Some((s.segment, 0.0)))?;
    }
    Ok(linspace(s.start, s.stop, s.points))
}

fn run_scan_mask(cli: &Cli, loaded: &Loaded, out: &mut dyn Write) -> Result<()> {
    let rc = &loaded.config;
    let cfg = rc.excitation(&loaded.base_dir)?;
    let section = rc.scan_section()?;
    let values = scan_values(rc)?;
    let base = Excitation::new(&cfg)?;
    let mut table = Table::new(&[
        match section.parameter {
            ScanParameter::OffsetHz => "offset_Hz",
            ScanParameter::PhaseRad => "phase_rad",
        },
        "population",
    ]);
    for &v in &values {
        let mask = match section.parameter {
            ScanParameter::OffsetHz => cfg.mask.translate(v),
            ScanParameter::PhaseRad => rc.mask_with_phase(Some((section.segment, v)))?,
        };
        table.push(vec![v.into(), base.with_mask(mask).population()?.into()]);
    }
    let mut set = OutputSet::new(output_dir(cli, loaded)?);
    set.add_table("scan.csv", &table)?;
    let dir = set.dir().to_path_buf();
    set.write("scan-mask", &loaded.text, cli.seed)?;
    writeln!(out, "{} scan points -> {}", values.len(), dir.display()).map_err(|e| Error::io("<stdout>", e))
}

/// Entry point for the binary: parse, run, map failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

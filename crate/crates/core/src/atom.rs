//! Hyperfine level structure and electric-dipole couplings.
//!
//! Matrix elements follow the Edmonds/Condon-Shortley convention. For a
//! transition from a ket `|L J F mF>` to a bra `<L' J' F' mF'|` driven by
//! polarization component `q` (so `mF' = mF + q`):
//!
//! ```text
//! <F' mF'|C1_q|F mF> = (-1)^(F'-mF') (F' 1 F; -mF' q mF) <F'||C1||F>
//! <F'||C1||F>        = (-1)^(J'+I+F+1) sqrt((2F'+1)(2F+1)) {J' F' I; F J 1} <J'||C1||J>
//! <J'||C1||J>        = (-1)^(L'+S+J+1) sqrt((2J'+1)(2J+1)) {L' J' S; J L 1} <L'||C1||L>
//! <L'||C1||L>        = (-1)^L' sqrt((2L'+1)(2L+1)) (L' 1 L; 0 0 0)
//! ```
//!
//! The radial integral for each pair of fine-structure terms comes from the
//! data file and multiplies this angular factor.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::angular::{parity_sign, wigner3j, wigner6j, HalfInt};
use crate::error::{Error, Result};

/// Bundled 87Rb data document.
pub const RB87_TOML: &str = include_str!("../data/rb87.toml");

/// Tolerance for comparing level spacings with the hyperfine constants.
pub const SPLITTING_TOLERANCE_HZ: f64 = 1.0e3;

/// Index of a level inside its [`AtomSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct HyperfineLevel {
    pub label: String,
    pub term: String,
    pub l: u32,
    pub j: HalfInt,
    pub f: HalfInt,
    /// Absolute optical frequency of the level, Hz.
    pub energy_hz: f64,
    /// Natural linewidth (FWHM), Hz.
    pub linewidth_hz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sublevel {
    pub level: LevelId,
    pub mf: HalfInt,
}

impl Sublevel {
    pub fn new(level: LevelId, mf: HalfInt) -> Self {
        Sublevel { level, mf }
    }
}

/// A fine-structure term with its hyperfine constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub name: String,
    pub l: u32,
    pub j: HalfInt,
    pub hyperfine_a_hz: f64,
    pub hyperfine_b_hz: f64,
}

/// Signed radial integral between two fine-structure terms.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialDipole {
    pub lower: String,
    pub upper: String,
    /// Signed radial integral, Bohr radii.
    pub moment_a0: f64,
}

#[derive(Clone, Debug)]
pub struct AtomSystem {
    pub name: String,
    pub nuclear_spin: HalfInt,
    pub electron_spin: HalfInt,
    terms: Vec<Term>,
    levels: Vec<HyperfineLevel>,
    dipoles: Vec<RadialDipole>,
    by_label: HashMap<String, LevelId>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDocument {
    atom: String,
    nuclear_spin: f64,
    #[serde(default = "default_electron_spin")]
    electron_spin: f64,
    #[serde(rename = "term", default)]
    terms: Vec<TermRecord>,
    #[serde(rename = "level")]
    levels: Vec<LevelRecord>,
    #[serde(rename = "dipole", default)]
    dipoles: Vec<DipoleRecord>,
}

fn default_electron_spin() -> f64 {
    0.5
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    name: String,
    #[serde(rename = "L")]
    l: u32,
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "hyperfine_A_Hz", default)]
    a_hz: f64,
    #[serde(rename = "hyperfine_B_Hz", default)]
    b_hz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelRecord {
    label: String,
    term: String,
    #[serde(rename = "L")]
    l: u32,
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "energy_Hz")]
    energy_hz: f64,
    #[serde(rename = "linewidth_Hz")]
    linewidth_hz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DipoleRecord {
    lower: String,
    upper: String,
    reduced_moment_a0: f64,
    #[serde(default = "default_sign")]
    sign: i32,
}

fn default_sign() -> i32 {
    1
}

fn half_int(value: f64, what: &str) -> Result<HalfInt> {
    HalfInt::from_f64(value)
        .ok_or_else(|| Error::AtomData(format!("{what} = {value} is not a multiple of 1/2")))
}

/// Hyperfine energy shift from the magnetic-dipole and electric-quadrupole constants.
pub fn hyperfine_shift(a_hz: f64, b_hz: f64, j: HalfInt, i: HalfInt, f: HalfInt) -> f64 {
    let (j, i, f) = (j.value(), i.value(), f.value());
    let k = f * (f + 1.0) - i * (i + 1.0) - j * (j + 1.0);
    let mut shift = a_hz * k / 2.0;
    if j > 0.5 && i > 0.5 && b_hz != 0.0 {
        shift += b_hz * (1.5 * k * (k + 1.0) - 2.0 * i * (i + 1.0) * j * (j + 1.0))
            / (4.0 * i * (2.0 * i - 1.0) * j * (2.0 * j - 1.0));
    }
    shift
}

impl AtomSystem {
    /// The bundled 87Rb system.
    pub fn rb87() -> Self {
        Self::from_toml_str(RB87_TOML).expect("bundled 87Rb data is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::AtomData(format!("{}: {e}", path.display())))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: AtomDocument =
            toml::from_str(text).map_err(|e| Error::AtomData(format!("malformed document: {e}")))?;
        Self::from_document(doc)
    }

    fn from_document(doc: AtomDocument) -> Result<Self> {
        let nuclear_spin = half_int(doc.nuclear_spin, "nuclear_spin")?;
        let electron_spin = half_int(doc.electron_spin, "electron_spin")?;
        if nuclear_spin.twice() < 0 || electron_spin.twice() < 0 {
            return Err(Error::AtomData("spins must be non-negative".into()));
        }

        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let j = half_int(t.j, "J")?;
            if terms.iter().any(|other: &Term| other.name == t.name) {
                return Err(Error::AtomData(format!("duplicate term {}", t.name)));
            }
            terms.push(Term {
                name: t.name,
                l: t.l,
                j,
                hyperfine_a_hz: t.a_hz,
                hyperfine_b_hz: t.b_hz,
            });
        }

        let mut levels = Vec::with_capacity(doc.levels.len());
        let mut by_label = HashMap::new();
        for rec in doc.levels {
            let level = HyperfineLevel {
                j: half_int(rec.j, "J")?,
                f: half_int(rec.f, "F")?,
                l: rec.l,
                energy_hz: rec.energy_hz,
                linewidth_hz: rec.linewidth_hz,
                label: rec.label,
                term: rec.term,
            };
            validate_level(&level, nuclear_spin, electron_spin)?;
            if let Some(term) = terms.iter().find(|t| t.name == level.term) {
                if term.l != level.l || term.j != level.j {
                    return Err(Error::AtomData(format!(
                        "level {} disagrees with term {} on L or J",
                        level.label, term.name
                    )));
                }
            }
            if by_label.insert(level.label.clone(), LevelId(levels.len())).is_some() {
                return Err(Error::AtomData(format!("duplicate level {}", level.label)));
            }
            levels.push(level);
        }
        if levels.is_empty() {
            return Err(Error::AtomData("no levels defined".into()));
        }

        let mut dipoles = Vec::with_capacity(doc.dipoles.len());
        for d in doc.dipoles {
            let lower = term_quantum_numbers(&levels, &d.lower)?;
            let upper = term_quantum_numbers(&levels, &d.upper)?;
            check_dipole_selection(&d.lower, lower, &d.upper, upper)?;
            if d.sign != 1 && d.sign != -1 {
                return Err(Error::AtomData(format!(
                    "dipole {} - {}: sign must be +1 or -1",
                    d.lower, d.upper
                )));
            }
            if !d.reduced_moment_a0.is_finite() {
                return Err(Error::AtomData(format!(
                    "dipole {} - {}: moment must be finite",
                    d.lower, d.upper
                )));
            }
            dipoles.push(RadialDipole {
                lower: d.lower,
                upper: d.upper,
                moment_a0: f64::from(d.sign) * d.reduced_moment_a0,
            });
        }

        let system = AtomSystem {
            name: doc.atom,
            nuclear_spin,
            electron_spin,
            terms,
            levels,
            dipoles,
            by_label,
        };
        system.check_hyperfine_splittings()?;
        system.check_ground_linewidths()?;
        Ok(system)
    }

    /// Term holding the lowest-energy level.
    pub fn ground_term(&self) -> &str {
        let lowest = self
            .levels
            .iter()
            .min_by(|a, b| a.energy_hz.total_cmp(&b.energy_hz))
            .expect("at least one level");
        &lowest.term
    }

    fn check_ground_linewidths(&self) -> Result<()> {
        let ground = self.ground_term();
        match self.levels.iter().find(|l| l.term == ground && l.linewidth_hz != 0.0) {
            Some(l) => Err(Error::AtomData(format!(
                "ground level {} must have zero linewidth",
                l.label
            ))),
            None => Ok(()),
        }
    }

    /// Level spacings within each term must follow its A/B constants.
    fn check_hyperfine_splittings(&self) -> Result<()> {
        for term in &self.terms {
            let members: Vec<&HyperfineLevel> =
                self.levels.iter().filter(|l| l.term == term.name).collect();
            for pair in members.windows(2) {
                let expected = hyperfine_shift(
                    term.hyperfine_a_hz,
                    term.hyperfine_b_hz,
                    term.j,
                    self.nuclear_spin,
                    pair[1].f,
                ) - hyperfine_shift(
                    term.hyperfine_a_hz,
                    term.hyperfine_b_hz,
                    term.j,
                    self.nuclear_spin,
                    pair[0].f,
                );
                let actual = pair[1].energy_hz - pair[0].energy_hz;
                if (actual - expected).abs() > SPLITTING_TOLERANCE_HZ {
                    return Err(Error::AtomData(format!(
                        "splitting {} -> {} is {actual} Hz but the hyperfine constants give {expected} Hz",
                        pair[0].label, pair[1].label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> &[HyperfineLevel] {
        &self.levels
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dipoles(&self) -> &[RadialDipole] {
        &self.dipoles
    }

    pub fn level_ids(&self) -> impl Iterator<Item = LevelId> {
        (0..self.levels.len()).map(LevelId)
    }

    pub fn level(&self, id: LevelId) -> &HyperfineLevel {
        &self.levels[id.0]
    }

    pub fn find(&self, label: &str) -> Result<LevelId> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| Error::AtomData(format!("unknown level {label:?}")))
    }

    pub fn sublevels(&self, id: LevelId) -> impl Iterator<Item = Sublevel> + '_ {
        self.level(id).f.projections().map(move |mf| Sublevel::new(id, mf))
    }

    /// `energy(b) - energy(a)` in Hz.
    pub fn transition_frequency(&self, a: LevelId, b: LevelId) -> f64 {
        self.level(b).energy_hz - self.level(a).energy_hz
    }

    /// Signed radial integral between the terms of two levels, if tabulated.
    pub fn radial_moment(&self, a: LevelId, b: LevelId) -> Option<f64> {
        let (ta, tb) = (&self.level(a).term, &self.level(b).term);
        self.dipoles
            .iter()
            .find(|d| (&d.lower == ta && &d.upper == tb) || (&d.lower == tb && &d.upper == ta))
            .map(|d| d.moment_a0)
    }

    /// Replace the linewidth of one level (ground levels must stay at zero).
    pub fn set_linewidth(&mut self, id: LevelId, linewidth_hz: f64) -> Result<()> {
        let mut level = self.level(id).clone();
        level.linewidth_hz = linewidth_hz;
        validate_level(&level, self.nuclear_spin, self.electron_spin)?;
        let previous = std::mem::replace(&mut self.levels[id.0], level);
        if let Err(e) = self.check_ground_linewidths() {
            self.levels[id.0] = previous;
            return Err(e);
        }
        Ok(())
    }

    /// Replace the signed radial integral between two terms.
    pub fn set_radial_moment(&mut self, lower: &str, upper: &str, moment_a0: f64) -> Result<()> {
        let entry = self
            .dipoles
            .iter_mut()
            .find(|d| (d.lower == lower && d.upper == upper) || (d.lower == upper && d.upper == lower))
            .ok_or_else(|| Error::AtomData(format!("no dipole entry {lower} - {upper}")))?;
        if !moment_a0.is_finite() {
            return Err(Error::AtomData("dipole moment must be finite".into()));
        }
        entry.moment_a0 = moment_a0;
        Ok(())
    }

    fn check_sublevel(&self, s: Sublevel) -> Result<&HyperfineLevel> {
        let level = self
            .levels
            .get(s.level.0)
            .ok_or_else(|| Error::Angular(format!("level index {} out of range", s.level.0)))?;
        if s.mf.twice().abs() > level.f.twice() || (level.f.twice() - s.mf.twice()) % 2 != 0 {
            return Err(Error::Angular(format!(
                "mF = {} is not a projection of F = {} ({})",
                s.mf, level.f, level.label
            )));
        }
        Ok(level)
    }

    /// Reduced angular factor `<L' J' F'||C1||L J F>` for bra `to`, ket `from`.
    pub fn reduced_angular_factor(&self, from: LevelId, to: LevelId) -> Result<f64> {
        let ket = self.level(from);
        let bra = self.level(to);
        let s = self.electron_spin;
        let i = self.nuclear_spin;
        let one = HalfInt::ONE;
        let (lb, lk) = (HalfInt::from_int(bra.l as i32), HalfInt::from_int(ket.l as i32));

        let orbital = parity_sign(lb.twice())
            * f64::from(lb.multiplicity() * lk.multiplicity()).sqrt()
            * wigner3j(lb, one, lk, HalfInt::ZERO, HalfInt::ZERO, HalfInt::ZERO)?;
        if orbital == 0.0 {
            return Ok(0.0);
        }
        let fine = parity_sign((lb + s + ket.j + one).twice())
            * f64::from(bra.j.multiplicity() * ket.j.multiplicity()).sqrt()
            * wigner6j(lb, bra.j, s, ket.j, lk, one)?;
        let hyperfine = parity_sign((bra.j + i + ket.f + one).twice())
            * f64::from(bra.f.multiplicity() * ket.f.multiplicity()).sqrt()
            * wigner6j(bra.j, bra.f, i, ket.f, ket.j, one)?;
        Ok(orbital * fine * hyperfine)
    }

    /// Signed angular factor `<to| C1_q |from>`; zero when the transition is forbidden.
    pub fn angular_dipole_factor(&self, from: Sublevel, to: Sublevel, q: i32) -> Result<f64> {
        check_polarization(q)?;
        let ket = self.check_sublevel(from)?;
        let bra = self.check_sublevel(to)?;
        let q = HalfInt::from_int(q);
        if to.mf != from.mf + q {
            return Ok(0.0);
        }
        let projection =
            parity_sign((bra.f - to.mf).twice()) * wigner3j(bra.f, HalfInt::ONE, ket.f, -to.mf, q, from.mf)?;
        if projection == 0.0 {
            return Ok(0.0);
        }
        Ok(projection * self.reduced_angular_factor(from.level, to.level)?)
    }

    /// Full dipole matrix element in Bohr radii (radial integral times angular factor).
    pub fn dipole_moment(&self, from: Sublevel, to: Sublevel, q: i32) -> Result<f64> {
        match self.radial_moment(from.level, to.level) {
            Some(radial) => Ok(radial * self.angular_dipole_factor(from, to, q)?),
            None => Ok(0.0),
        }
    }
}

pub(crate) fn check_polarization(q: i32) -> Result<()> {
    if (-1..=1).contains(&q) {
        Ok(())
    } else {
        Err(Error::Angular(format!("polarization index q = {q} must be -1, 0 or +1")))
    }
}

fn validate_level(level: &HyperfineLevel, i: HalfInt, s: HalfInt) -> Result<()> {
    let fail = |msg: String| Err(Error::AtomData(format!("level {}: {msg}", level.label)));
    let (j, f) = (level.j.twice(), level.f.twice());
    if j < 0 || f < 0 {
        return fail("J and F must be non-negative".into());
    }
    let l2 = 2 * level.l as i32;
    if j < (l2 - s.twice()).abs() || j > l2 + s.twice() || (l2 + s.twice() + j) % 2 != 0 {
        return fail(format!("J = {} cannot be formed from L = {}", level.j, level.l));
    }
    if f < (j - i.twice()).abs() || f > j + i.twice() || (j + i.twice() + f) % 2 != 0 {
        return fail(format!("F = {} violates |J - I| <= F <= J + I", level.f));
    }
    if !level.energy_hz.is_finite() {
        return fail("energy must be finite".into());
    }
    if !(level.linewidth_hz >= 0.0) || !level.linewidth_hz.is_finite() {
        return fail("linewidth must be finite and non-negative".into());
    }
    Ok(())
}

fn term_quantum_numbers(levels: &[HyperfineLevel], term: &str) -> Result<(u32, HalfInt)> {
    levels
        .iter()
        .find(|l| l.term == term)
        .map(|l| (l.l, l.j))
        .ok_or_else(|| Error::AtomData(format!("dipole refers to missing term {term:?}")))
}

fn check_dipole_selection(
    lower_name: &str,
    (l_lower, j_lower): (u32, HalfInt),
    upper_name: &str,
    (l_upper, j_upper): (u32, HalfInt),
) -> Result<()> {
    let dl = l_upper as i32 - l_lower as i32;
    if dl.abs() != 1 {
        return Err(Error::AtomData(format!(
            "dipole {lower_name} - {upper_name} violates the electric-dipole rule (delta L = {dl})"
        )));
    }
    let dj = (j_upper.twice() - j_lower.twice()).abs();
    if dj > 2 || (j_upper.twice() == 0 && j_lower.twice() == 0) {
        return Err(Error::AtomData(format!(
            "dipole {lower_name} - {upper_name} violates the electric-dipole rule on J"
        )));
    }
    Ok(())
}

//! Resonance bookkeeping: which comb modes sit on which transitions.

use std::fmt::Write as _;

use crate::atom::{AtomSystem, LevelId};
use crate::comb::CombSpec;
use crate::error::{Error, Result};
use crate::excitation::nearest_sum_index;

#[derive(Clone, Debug, PartialEq)]
pub enum LegKind {
    /// Single-photon transition, nearest comb mode.
    Single,
    /// Ground to final through two photons, nearest pair sum `K f_r + 2 f_o`.
    TwoPhoton,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leg {
    pub from: LevelId,
    pub to: LevelId,
    pub kind: LegKind,
    pub transition_hz: f64,
    /// Mode index `N`, or the pair sum `K` for a two-photon leg.
    pub index: i64,
    /// Comb frequency minus transition frequency.
    pub detuning_hz: f64,
    /// Largest linewidth of the two levels.
    pub tolerance_hz: f64,
}

impl Leg {
    pub fn near_resonant(&self) -> bool {
        self.detuning_hz.abs() <= self.tolerance_hz
    }
}

/// All legs of every two-photon path from `ground` to `final_level`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiamondLegs {
    pub ground: LevelId,
    pub final_level: LevelId,
    pub intermediates: Vec<LevelId>,
    pub legs: Vec<Leg>,
}

impl DiamondLegs {
    pub fn leg(&self, from: LevelId, to: LevelId) -> Option<&Leg> {
        self.legs.iter().find(|l| l.from == from && l.to == to)
    }

    pub fn two_photon(&self) -> &Leg {
        self.legs
            .iter()
            .find(|l| l.kind == LegKind::TwoPhoton)
            .expect("two-photon leg always present")
    }

    /// Smallest single-photon detuning magnitude among the legs.
    pub fn min_single_detuning(&self) -> f64 {
        self.legs
            .iter()
            .filter(|l| l.kind == LegKind::Single)
            .map(|l| l.detuning_hz.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

fn single_leg(comb: &CombSpec, atom: &AtomSystem, from: LevelId, to: LevelId) -> Result<Leg> {
    let transition = atom.transition_frequency(from, to);
    let index = comb.mode_index_near(transition).map_err(|_| {
        Error::Physics(format!(
            "{} -> {} at {transition} Hz has no comb mode within f_r/2",
            atom.level(from).label,
            atom.level(to).label
        ))
    })?;
    Ok(Leg {
        from,
        to,
        kind: LegKind::Single,
        transition_hz: transition,
        index,
        detuning_hz: comb.mode(index).detuning_from(transition),
        tolerance_hz: atom.level(from).linewidth_hz.max(atom.level(to).linewidth_hz),
    })
}

pub fn diamond_legs(comb: &CombSpec, atom: &AtomSystem, ground: LevelId, final_level: LevelId) -> Result<DiamondLegs> {
    let mut intermediates = Vec::new();
    let mut legs = Vec::new();
    for id in atom.level_ids() {
        if id == ground || id == final_level {
            continue;
        }
        let lower = atom.radial_moment(ground, id).unwrap_or(0.0) * atom.reduced_angular_factor(ground, id)?;
        let upper =
            atom.radial_moment(id, final_level).unwrap_or(0.0) * atom.reduced_angular_factor(id, final_level)?;
        if lower == 0.0 || upper == 0.0 {
            continue;
        }
        intermediates.push(id);
        legs.push(single_leg(comb, atom, ground, id)?);
        legs.push(single_leg(comb, atom, id, final_level)?);
    }
    let transition = atom.transition_frequency(ground, final_level);
    let k = nearest_sum_index(comb, transition)?;
    legs.push(Leg {
        from: ground,
        to: final_level,
        kind: LegKind::TwoPhoton,
        transition_hz: transition,
        index: k,
        detuning_hz: comb.pair_sum_frequency(k).detuning_from(transition),
        tolerance_hz: atom.level(final_level).linewidth_hz,
    });
    Ok(DiamondLegs { ground, final_level, intermediates, legs })
}

/// Legs for the configured ground level and every other level of its term.
pub fn resonance_survey(
    comb: &CombSpec,
    atom: &AtomSystem,
    ground: LevelId,
    final_level: LevelId,
) -> Result<Vec<DiamondLegs>> {
    let term = atom.level(ground).term.clone();
    let mut out = vec![diamond_legs(comb, atom, ground, final_level)?];
    for id in atom.level_ids() {
        if id != ground && atom.level(id).term == term {
            out.push(diamond_legs(comb, atom, id, final_level)?);
        }
    }
    Ok(out)
}

/// Checks that both legs of each declared intermediate, and the two-photon
/// closure, are within the relevant linewidth.
pub fn check_declared(atom: &AtomSystem, legs: &DiamondLegs, declared: &[LevelId]) -> Result<()> {
    for &id in declared {
        if !legs.intermediates.contains(&id) {
            return Err(Error::Physics(format!(
                "{} is not dipole-connected to both {} and {}",
                atom.level(id).label,
                atom.level(legs.ground).label,
                atom.level(legs.final_level).label
            )));
        }
        for leg in [legs.leg(legs.ground, id), legs.leg(id, legs.final_level)].into_iter().flatten() {
            if !leg.near_resonant() {
                return Err(Error::Physics(format!(
                    "declared resonant transition {} -> {} is detuned by {:.3} MHz (linewidth {:.3} MHz)",
                    atom.level(leg.from).label,
                    atom.level(leg.to).label,
                    leg.detuning_hz / 1e6,
                    leg.tolerance_hz / 1e6
                )));
            }
        }
    }
    if !declared.is_empty() && !legs.two_photon().near_resonant() {
        let tp = legs.two_photon();
        return Err(Error::Physics(format!(
            "two-photon resonance detuned by {:.3} MHz (linewidth {:.3} MHz)",
            tp.detuning_hz / 1e6,
            tp.tolerance_hz / 1e6
        )));
    }
    Ok(())
}

pub fn format_survey(atom: &AtomSystem, survey: &[DiamondLegs]) -> String {
    let mut out = String::new();
    for d in survey {
        let _ = writeln!(
            out,
            "{} -> {}",
            atom.level(d.ground).label,
            atom.level(d.final_level).label
        );
        for leg in &d.legs {
            let what = match leg.kind {
                LegKind::Single => "mode",
                LegKind::TwoPhoton => "sum K",
            };
            let _ = writeln!(
                out,
                "  {:<10} -> {:<10} {what} {:>9}  detuning {:>+10.4} MHz  {}",
                atom.level(leg.from).label,
                atom.level(leg.to).label,
                leg.index,
                leg.detuning_hz / 1e6,
                if leg.near_resonant() { "near-resonant" } else { "detuned" }
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{SpectralEnvelope, DEFAULT_FIELD_FLOOR};

    fn comb(f_r: f64) -> CombSpec {
        let env = SpectralEnvelope::new(778e-9, 55e-9, 1.0).unwrap();
        CombSpec::truncated(f_r, 16.94e6, env, DEFAULT_FIELD_FLOOR).unwrap()
    }

    #[test]
    fn upper_ground_diamond_is_resonant() {
        let atom = AtomSystem::rb87();
        let g = atom.find("5S1/2 F=2").unwrap();
        let f = atom.find("5D3/2 F=1").unwrap();
        let legs = diamond_legs(&comb(100.596_606_05e6), &atom, g, f).unwrap();
        let declared = [atom.find("5P1/2 F=2").unwrap(), atom.find("5P3/2 F=2").unwrap()];
        check_declared(&atom, &legs, &declared).unwrap();
        assert!(legs.two_photon().detuning_hz.abs() < 0.66e6);
    }

    #[test]
    fn lower_ground_diamond_fails_on_first_comb() {
        let atom = AtomSystem::rb87();
        let g = atom.find("5S1/2 F=1").unwrap();
        let f = atom.find("5D3/2 F=1").unwrap();
        let legs = diamond_legs(&comb(100.596_606_05e6), &atom, g, f).unwrap();
        let declared = [atom.find("5P1/2 F=2").unwrap(), atom.find("5P3/2 F=2").unwrap()];
        assert!(check_declared(&atom, &legs, &declared).is_err());
        let legs = diamond_legs(&comb(100.596_605_25e6), &atom, g, f).unwrap();
        check_declared(&atom, &legs, &declared).unwrap();
    }
}

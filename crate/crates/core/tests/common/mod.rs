#![allow(dead_code)]

pub mod cg;
pub mod synthetic;

use std::sync::Arc;

use diamond_comb::atom::AtomSystem;
use diamond_comb::comb::{CombSpec, SpectralEnvelope, DEFAULT_FIELD_FLOOR};
use diamond_comb::excitation::ExcitationConfig;

/// Repetition rate closing the diamond from the upper ground level.
pub const F_R_UPPER: f64 = 100.596_606_05e6;
/// Repetition rate closing the diamond from the lower ground level.
pub const F_R_LOWER: f64 = 100.596_605_25e6;
pub const F_O: f64 = 16.94e6;

pub fn rb_comb(f_r: f64, floor: f64) -> CombSpec {
    let env = SpectralEnvelope::new(778e-9, 55e-9, 1.0).unwrap();
    CombSpec::truncated(f_r, F_O, env, floor).unwrap()
}

/// Resonant-only, traveling-wave, zero-mask configuration for `ground -> 5D3/2 F=1`.
pub fn rb_config(ground: &str, f_r: f64) -> ExcitationConfig {
    let atom = Arc::new(AtomSystem::rb87());
    let g = atom.find(ground).unwrap();
    let f = atom.find("5D3/2 F=1").unwrap();
    ExcitationConfig::new(rb_comb(f_r, DEFAULT_FIELD_FLOOR), atom, g, f)
}

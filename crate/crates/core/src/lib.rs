//! Two-photon excitation of a diamond-configuration atom by a shaped optical
//! frequency comb.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod angular;
pub mod atom;
pub mod cli;
pub mod comb;
pub mod config;
pub mod error;
pub mod excitation;
pub mod output;
pub mod shaper;
pub mod validation;

pub use error::{Error, Result};

//! Deterministic simulator and analysis toolkit for dual balanced-photodiode
//! heterodyne correlation receivers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod correlator;
pub mod error;
pub mod harness;
pub mod photon;
pub mod rng;
pub mod waveform;

pub use error::{Error, Result};

//! Multi-user expurgated PPM for LED downlinks.
//!
//! This crate holds the allocation-only core: cyclic difference-set (BIBD)
//! and optical orthogonal code construction, per-user constellations for
//! coded-MEPPM, divided-MEPPM and code-cycle modulation, the shot-noise
//! channel, correlation and single-user detectors, and the closed-form
//! error expressions used to check simulations.
//!
//! Everything here is `no_std` + `alloc`. File formats, the parallel Monte
//! Carlo engine and the command-line tool live in the `meppm` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod channel;
pub mod codes;
pub mod detection;
mod error;
pub mod link;
pub mod modulation;

pub use error::{Error, Result};

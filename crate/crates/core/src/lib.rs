//! Ray-optics simulation of beam splitting in a magnetised optical cavity and
//! the sensitivity analysis built on top of it.
//!
//! * [`optics`]: ABCD matrices, rays, splitting kicks, mirrors
//! * [`cavity`]: multi-traversal bifurcating ensembles
//! * [`profile`]: Gaussian profile algebra and detector binning
//! * [`sensitivity`]: growth fits, shot noise, minimum coupling
//! * [`axion`]: mixing parameters and mass reach
//! * [`pascal`]: toy lattice comparing two multiplicity bookkeepings
//! * [`signal`]: field-on versus field-off detector signals

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axion;
pub mod cavity;
pub mod error;
pub mod optics;
pub mod pascal;
pub mod profile;
pub mod sensitivity;
pub mod signal;

pub use error::{Error, Result};

/// Formats a number with 17 significant digits so that CSV output
/// round-trips bit-exactly.
pub fn format_sci(x: f64) -> String {
    format!("{x:.16e}")
}

//! Resolution model of a two-photon coincidence scanning microscope, with
//! widefield and confocal references.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coincidence;
pub mod error;
pub mod geometry;
pub mod optics;
pub mod psf;
pub mod quadrature;
pub mod scansim;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use optics::{MicroscopeConfig, MicroscopeParams, PumpMode};
pub use psf::Instrument;

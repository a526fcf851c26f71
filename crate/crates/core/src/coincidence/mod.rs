//! Coincidence amplitude, time-order gate and sample models.

mod amplitude;
pub mod dispersion;
pub mod sample;

pub use amplitude::{
    amplitude, amplitude_with, coincidence_rate, QuadratureSpec, TRUNCATION_AIRY_RADII,
};
pub(crate) use amplitude::{gate_factor, Imager};
pub use dispersion::{Branch, DispersionModel, IndexDescriptor, IndexFn, IndexModel, ThinCrystal};
pub use sample::{Raster, SampleTransmittance};

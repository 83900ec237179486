//! Periodic Fourier field algebra: grids, transforms, fractional derivatives,
//! Sobolev norms, Leray projection and dealiased products.

mod fft;
mod field;
mod grid;
mod nonlinear;
pub mod snapshot;

pub use field::{FourierMultiply, SpectralField, VectorField, DIVERGENCE_TOLERANCE};
pub use grid::{Grid, ModeTables};
pub use nonlinear::{advect, dealiased_product, exact_product, Advected};

#[allow(unused_imports)]
pub(crate) use fft::{real_to_spectral, to_physical, to_spectral};
pub(crate) use field::{lambda_symbol, sobolev_weight};

//! Pseudo-spectral laboratory for the viscous, non-resistive MHD system
//!
//! ```text
//! u_t - Δu + (u·∇)u + ∇p = (B·∇)B,   ∇·u = 0
//! B_t + (u·∇)B = (B·∇)u,             ∇·B = 0
//! ```
//!
//! together with the heat and Stokes machinery behind its local existence
//! theory. Every analytic estimate of that theory (heat smoothing, the
//! missing `L¹(H²)` regularity, maximal regularity, the a-priori bounds and
//! the existence-time bootstrap) has a numerical counterpart here that
//! measures both sides and reports the margin.
//!
//! Fields live on the periodic box `[0, 2πL)^d`, `d ∈ {2, 3}`, and are stored
//! as Fourier coefficients; fractional derivatives, the heat semigroup and the
//! Leray projector are exact Fourier multipliers.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod heat;
pub mod maxreg;
pub mod mhd;
pub mod quadrature;
pub mod random;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
pub use report::EstimateReport;
pub use spectral::{Grid, SpectralField, VectorField};

//! Functional inequalities, the ODE comparison bound and the existence time
//! assembled from them.

mod existence;
mod inequalities;
mod ode;

pub use existence::{existence_time, tstar1_lhs, tstar2_lhs, TSTAR1_LIMIT};
pub use inequalities::{
    algebra_constant_estimate, commutator_ensemble, commutator_estimate_check, interpolation_check,
    interpolation_ensemble, young_exponents_check, CommutatorReport, EnsembleEstimate,
    InterpolationRatios,
};
pub use ode::{comparison_horizon, ode_comparison_bound, ode_integrate, OdeParams, OdeTrajectory};

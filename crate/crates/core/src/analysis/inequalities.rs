//! Sobolev interpolation, the algebra property, the transport commutator
//! bound and the Young exponent identity, measured on concrete fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::random::{random_real_field, random_vector_field, SpectrumShape};
use crate::report::EstimateReport;
use crate::spectral::{
    advect, dealiased_product, Grid, SpectralField, VectorField, DIVERGENCE_TOLERANCE,
};

/// Ratios of `‖f‖_s` to `‖f‖_{s0}^{1-θ} ‖f‖_{s1}^θ`, `s = (1-θ)s0 + θ s1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationRatios {
    pub theta: f64,
    /// with `‖Λ^σ f‖`; at most one (Hölder on the Fourier side)
    pub homogeneous: f64,
    /// with the full `H^σ` norms
    pub inhomogeneous: f64,
}

/// Ensemble maximum of a ratio, with the running maxima as samples were added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    pub samples: usize,
    pub max: f64,
    pub running_max: Vec<f64>,
}

impl EnsembleEstimate {
    fn from_values(values: &[f64]) -> Self {
        let mut running_max = Vec::with_capacity(values.len());
        let mut max = 0.0f64;
        for &v in values {
            max = max.max(v);
            running_max.push(max);
        }
        Self {
            samples: values.len(),
            max,
            running_max,
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn interpolation_check(
    f: &SpectralField,
    s0: f64,
    s: f64,
    s1: f64,
) -> Result<InterpolationRatios> {
    if !(s0 < s && s < s1) {
        return Err(invalid(
            "orders",
            format!("need s0 < s < s1, got ({s0}, {s}, {s1})"),
        ));
    }
    let theta = (s - s0) / (s1 - s0);
    let hom = |o: f64| f.homogeneous_norm(o);
    let inh = |o: f64| f.sobolev_norm(o);
    Ok(InterpolationRatios {
        theta,
        homogeneous: ratio(hom(s)?, hom(s0)?.powf(1.0 - theta) * hom(s1)?.powf(theta)),
        inhomogeneous: ratio(inh(s)?, inh(s0)?.powf(1.0 - theta) * inh(s1)?.powf(theta)),
    })
}

fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x0100_0000_01b3).wrapping_add(i as u64)
}

/// Homogeneous and inhomogeneous ensemble maxima over `count` random fields.
pub fn interpolation_ensemble(
    grid: Grid,
    seed: u64,
    count: usize,
    orders: (f64, f64, f64),
) -> Result<(EnsembleEstimate, EnsembleEstimate)> {
    let (s0, s, s1) = orders;
    let ratios = (0..count)
        .into_par_iter()
        .map(|i| {
            let f = random_real_field(grid, sample_seed(seed, i), SpectrumShape::smooth());
            interpolation_check(&f, s0, s, s1)
        })
        .collect::<Result<Vec<_>>>()?;
    let hom: Vec<f64> = ratios.iter().map(|r| r.homogeneous).collect();
    let inh: Vec<f64> = ratios.iter().map(|r| r.inhomogeneous).collect();
    Ok((
        EnsembleEstimate::from_values(&hom),
        EnsembleEstimate::from_values(&inh),
    ))
}

fn require_algebra(dim: usize, s: f64) -> Result<()> {
    if !(s > dim as f64 / 2.0) {
        return Err(invalid(
            "s",
            format!("need s > d/2 = {}, got {s}", dim as f64 / 2.0),
        ));
    }
    Ok(())
}

/// Ensemble max of `‖fg‖_{H^s} / (‖f‖_{H^s} ‖g‖_{H^s})` over random
/// band-limited real pairs: a lower bound for the algebra constant.
pub fn algebra_constant_estimate(
    grid: Grid,
    seed: u64,
    count: usize,
    s: f64,
) -> Result<EnsembleEstimate> {
    require_algebra(grid.dim(), s)?;
    let values = (0..count)
        .into_par_iter()
        .map(|i| {
            let base = sample_seed(seed, i);
            let f = random_real_field(grid, base, SpectrumShape::smooth());
            let g = random_real_field(grid, base ^ 0xa5a5_a5a5, SpectrumShape::smooth());
            algebra_ratio(&f, &g, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleEstimate::from_values(&values))
}

/// `‖fg‖_{H^s} / (‖f‖_{H^s} ‖g‖_{H^s})` with a dealiased product.
pub(crate) fn algebra_ratio(f: &SpectralField, g: &SpectralField, s: f64) -> Result<f64> {
    let fg = dealiased_product(f, g)?;
    Ok(ratio(
        fg.sobolev_norm(s)?,
        f.sobolev_norm(s)? * g.sobolev_norm(s)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    /// `|⟨Λ^s[(u·∇)B], Λ^s B⟩|`
    pub lhs: f64,
    /// `‖∇u‖_{H^s} ‖B‖²_{H^s}`
    pub rhs: f64,
    /// `lhs / rhs` (0 when both vanish)
    pub ratio: f64,
}

pub fn commutator_estimate_check(
    u: &VectorField,
    b: &VectorField,
    s: f64,
) -> Result<CommutatorReport> {
    require_algebra(u.grid().dim(), s)?;
    if u.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let residual = u.divergence_residual();
    if residual > DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree { residual });
    }
    let transport = advect(u, b)?;
    let lhs = transport.lambda_pow(s)?.inner(&b.lambda_pow(s)?)?.re.abs();
    let grad_u = (u.homogeneous_norm(s + 1.0)?.powi(2) + u.homogeneous_norm(1.0)?.powi(2)).sqrt();
    let rhs = grad_u * b.sobolev_norm(s)?.powi(2);
    Ok(CommutatorReport {
        lhs,
        rhs,
        ratio: ratio(lhs, rhs),
    })
}

/// Ensemble max of the commutator ratio over random divergence-free pairs.
pub fn commutator_ensemble(
    grid: Grid,
    seed: u64,
    count: usize,
    s: f64,
) -> Result<EnsembleEstimate> {
    require_algebra(grid.dim(), s)?;
    let values = (0..count)
        .into_par_iter()
        .map(|i| {
            let base = sample_seed(seed, i);
            let u = random_vector_field(grid, base, SpectrumShape::smooth(), true);
            let b = random_vector_field(grid, base ^ 0x5a5a_5a5a, SpectrumShape::smooth(), true);
            commutator_estimate_check(&u, &b, s).map(|r| r.ratio)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleEstimate::from_values(&values))
}

/// The exponents `(1+ε, 2(1+ε)/(ε(1-ε)), 2/ε)` of the three-term Young
/// inequality are conjugate: their reciprocals sum to one.
pub fn young_exponents_check(eps: f64) -> Result<EstimateReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("need 0 < eps < 1, got {eps}")));
    }
    let sum = 1.0 / (1.0 + eps) + eps * (1.0 - eps) / (2.0 * (1.0 + eps)) + eps / 2.0;
    Ok(EstimateReport::equal(
        "young/reciprocal-sum",
        sum,
        1.0,
        4.0 * f64::EPSILON,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn grid() -> Grid {
        Grid::new(2, 32, 1.0).unwrap()
    }

    #[test]
    fn single_mode_interpolation_is_sharp() {
        let f =
            SpectralField::single_mode(grid(), &[3, 1], Complex64::new(0.4, -0.2), true).unwrap();
        let r = interpolation_check(&f, 0.7, 1.2, 1.7).unwrap();
        assert!((r.homogeneous - 1.0).abs() < 1e-14);
        assert!(r.inhomogeneous <= 1.0 + 1e-14);
    }

    #[test]
    fn two_modes_interpolate_strictly() {
        let g = grid();
        let mut f = SpectralField::single_mode(g, &[1, 0], Complex64::new(1.0, 0.0), true).unwrap();
        let h = SpectralField::single_mode(g, &[0, 5], Complex64::new(1.0, 0.0), true).unwrap();
        for (a, b) in f.coeffs_mut().iter_mut().zip(h.coeffs()) {
            *a += b;
        }
        let r = interpolation_check(&f, 0.0, 1.0, 2.0).unwrap();
        // ‖f‖²_σ = 2(1 + 25^σ): ratio = sqrt(26 / sqrt(2 · 626))
        let expect = (26.0 / (2.0f64 * 626.0).sqrt()).sqrt();
        assert!((r.homogeneous - expect).abs() < 1e-14);
        assert!(r.homogeneous < 1.0);
        assert!(interpolation_check(&f, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn algebra_ratio_of_constants() {
        let g = grid();
        let one = SpectralField::constant(g, 1.0);
        let norm1 = one.sobolev_norm(1.5).unwrap();
        let r = algebra_ratio(&one, &one, 1.5).unwrap();
        assert!((r - 1.0 / norm1).abs() < 1e-14);
        let other = random_real_field(g, 3, SpectrumShape::band(4.0));
        let r = algebra_ratio(&one, &other, 1.5).unwrap();
        assert!((r - 1.0 / norm1).abs() < 1e-13);
        assert!(algebra_constant_estimate(g, 1, 4, 1.0).is_err());
    }

    #[test]
    fn ensemble_maxima_are_running() {
        let e = EnsembleEstimate::from_values(&[0.5, 0.2, 0.9, 0.1]);
        assert_eq!(e.running_max, vec![0.5, 0.5, 0.9, 0.9]);
        assert_eq!(e.max, 0.9);
    }

    #[test]
    fn commutator_with_resting_velocity_is_zero() {
        let g = grid();
        let b = random_vector_field(g, 2, SpectrumShape::smooth(), true);
        let r = commutator_estimate_check(&VectorField::zeros(g), &b, 1.5).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
        let bad = random_vector_field(g, 2, SpectrumShape::smooth(), false);
        assert!(commutator_estimate_check(&bad, &b, 1.5).is_err());
    }

    #[test]
    fn young_identity_holds() {
        for eps in [0.1, 0.5, 0.9] {
            assert!(young_exponents_check(eps).unwrap().passed);
        }
    }
}

//! Exact heat semigroup on the grid and numerical checks of its smoothing
//! estimates; the grid-free counterexample lives in [`counterexample`].

pub mod counterexample;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::CompositeRule;
use crate::report::EstimateReport;
use crate::spectral::{lambda_symbol, FourierMultiply, SpectralField};

/// `e^{tΔ} u₀`: every coefficient multiplied by `e^{-|k|² t}`.
pub fn heat_evolve<F: FourierMultiply>(u0: &F, t: f64) -> Result<F> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("time must be >= 0, got {t}")));
    }
    Ok(u0.apply_multiplier(|k2| (-k2 * t).exp()))
}

/// Exactness of `e^{tΔ}` on `u₀` at tolerance `tol`:
///
/// * `heat/mode-decay`: worst relative deviation, over the nonzero modes of
///   `u₀`, of `(e^{tΔ}u₀)^(k) / û₀(k)` from `e^{-|k|²t}` with `|k|²` rebuilt
///   from the integer lattice index;
/// * `heat/semigroup-law`: `‖e^{tΔ}e^{τΔ}u₀ - e^{(t+τ)Δ}u₀‖ / ‖e^{(t+τ)Δ}u₀‖`.
///
/// Modes whose decay factor underflows below `1e-300` are skipped.
pub fn semigroup_exactness(
    u0: &SpectralField,
    t: f64,
    tau: f64,
    tol: f64,
) -> Result<Vec<EstimateReport>> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("time must be >= 0, got {tau}")));
    }
    let evolved = heat_evolve(u0, t)?;
    let grid = *u0.grid();
    let mut worst = 0.0f64;
    for (i, (&a, &b)) in u0.coeffs().iter().zip(evolved.coeffs()).enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        let m = grid.lattice(i);
        let k2 = m[..grid.dim()]
            .iter()
            .map(|&mj| (mj as f64 / grid.length()).powi(2))
            .sum::<f64>();
        let expect = (-k2 * t).exp();
        if expect < 1e-300 {
            continue;
        }
        worst = worst.max(((b / a).re - expect).abs().max((b / a).im.abs()) / expect);
    }
    let twice = heat_evolve(&heat_evolve(u0, tau)?, t)?;
    let once = heat_evolve(u0, t + tau)?;
    let scale = once.l2_norm();
    let gap = if scale > 0.0 {
        (&twice - &once).l2_norm() / scale
    } else {
        twice.l2_norm()
    };
    Ok(vec![
        EstimateReport::at_most_abs("heat/mode-decay", worst, 0.0, tol),
        EstimateReport::at_most_abs("heat/semigroup-law", gap, 0.0, tol),
    ])
}

/// Energy of a field grouped by shell: pairs `(|k|², V Σ_{shell} |û|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSpectrum {
    shells: Vec<(f64, f64)>,
}

impl ShellSpectrum {
    pub fn of<F: FourierMultiply>(f: &F) -> Self {
        Self::from_pairs(f.mode_energies())
    }

    pub(crate) fn from_pairs(mut shells: Vec<(f64, f64)>) -> Self {
        shells.retain(|&(_, e)| e != 0.0);
        shells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(shells.len());
        for (k2, e) in shells {
            match merged.last_mut() {
                Some(last) if last.0 == k2 => last.1 += e,
                _ => merged.push((k2, e)),
            }
        }
        Self { shells: merged }
    }

    pub fn shells(&self) -> &[(f64, f64)] {
        &self.shells
    }

    /// `‖Λ^σ e^{tΔ} f‖²`.
    pub fn homogeneous_sq(&self, sigma: f64, t: f64) -> f64 {
        self.shells
            .iter()
            .map(|&(k2, e)| e * lambda_symbol(k2, 2.0 * sigma) * (-2.0 * k2 * t).exp())
            .sum()
    }

    /// `‖e^{tΔ} f‖²_{H^σ}` (plain `L²` at `σ = 0`).
    pub fn sobolev_sq(&self, sigma: f64, t: f64) -> f64 {
        if sigma == 0.0 {
            self.homogeneous_sq(0.0, t)
        } else {
            self.homogeneous_sq(sigma, t) + self.homogeneous_sq(0.0, t)
        }
    }

    pub fn max_k2(&self) -> f64 {
        self.shells.last().map_or(0.0, |s| s.0)
    }
}

/// Explicit constant of the `L^q(0,T; H^{s+2})` smoothing bound,
/// `C_q = ((2-q)/(2-2q))^{(2-q)/2} 2^{-q/2}`, from Hölder with exponents
/// `2/q`, `2/(2-q)` and the weighted bound `∫ t‖u‖²_{H^{s+2}} <= ½‖u₀‖²_{H^s}`.
pub fn cq_constant(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid("q", format!("must lie in (0, 1), got {q}")));
    }
    Ok(((2.0 - q) / (2.0 - 2.0 * q)).powf(0.5 * (2.0 - q)) * 2f64.powf(-0.5 * q))
}

/// Graded Gauss–Legendre rule on `[0, T]` (ratio 2 panels toward `t = 0`).
pub fn default_time_rule(horizon: f64) -> CompositeRule {
    CompositeRule::graded(0.0, horizon, horizon * 2f64.powi(-40), 10)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub s: f64,
    pub horizon: f64,
    pub q: f64,
    /// `sup_t ‖u(t)‖²_{H^s}` over the quadrature nodes and both endpoints.
    pub sup_hs: f64,
    /// `∫₀^T ‖u‖²_{H^{s+1}}`
    pub int_hs1: f64,
    /// `∫₀^T t ‖u‖²_{H^{s+2}}`
    pub int_weighted: f64,
    /// `∫₀^T ‖u‖^q_{H^{s+2}}`
    pub int_lq: f64,
    /// `‖u₀‖²_{H^s}`
    pub bound: f64,
    /// `C_q T^{1-q} ‖u₀‖^q_{H^s}`
    pub lq_bound: f64,
    pub cq: f64,
    pub margin_sup: f64,
    pub margin_hs1: f64,
    pub margin_weighted: f64,
    pub margin_lq: f64,
    /// `∫₀^T ‖Λ^{s+1}u‖² + ½‖Λ^s u(T)‖²`
    pub energy_lhs: f64,
    /// `½‖Λ^s u₀‖²`
    pub energy_rhs: f64,
    /// `(T/2)‖Λ^{s+1}u(T)‖² + ∫₀^T t‖Λ^{s+2}u‖²`
    pub weighted_lhs: f64,
    /// `¼‖Λ^s u₀‖²`
    pub weighted_rhs: f64,
}

impl SmoothingReport {
    /// Individual checks at a single tolerance (see [`Self::checks_split`]).
    pub fn checks(&self, tol: f64) -> Vec<EstimateReport> {
        self.checks_split(tol, tol)
    }

    /// The bounds with an absolute margin tolerance `bound_tol`, the energy
    /// identity to `identity_tol` relative.
    pub fn checks_split(&self, bound_tol: f64, identity_tol: f64) -> Vec<EstimateReport> {
        vec![
            EstimateReport::at_most_abs("heat/sup-Hs", self.sup_hs, self.bound, bound_tol),
            EstimateReport::at_most_abs("heat/L2-Hs+1", self.int_hs1, self.bound, bound_tol),
            EstimateReport::at_most_abs(
                "heat/weighted-Hs+2",
                self.int_weighted,
                self.bound,
                bound_tol,
            ),
            EstimateReport::at_most_abs("heat/Lq-Hs+2", self.int_lq, self.lq_bound, bound_tol)
                .with_constant(self.cq),
            EstimateReport::equal(
                "heat/energy-identity",
                self.energy_lhs,
                self.energy_rhs,
                identity_tol,
            ),
            EstimateReport::at_most_abs(
                "heat/weighted-identity",
                self.weighted_lhs,
                self.weighted_rhs,
                bound_tol,
            ),
        ]
    }
}

/// Measures the heat smoothing quantities for `u₀` on `[0, T]` with the
/// exact semigroup at the nodes of `rule` (which must cover `[0, T]`).
pub fn verify_smoothing<F: FourierMultiply>(
    u0: &F,
    s: f64,
    horizon: f64,
    q: f64,
    rule: &CompositeRule,
) -> Result<SmoothingReport> {
    if !(s >= 0.0) {
        return Err(invalid("s", format!("must be >= 0, got {s}")));
    }
    if !(horizon > 0.0 && horizon <= 1.0) {
        return Err(invalid("T", format!("must lie in (0, 1], got {horizon}")));
    }
    let cq = cq_constant(q)?;
    let spec = ShellSpectrum::of(u0);

    let mut sup_hs = spec.sobolev_sq(s, 0.0).max(spec.sobolev_sq(s, horizon));
    let (mut int_hs1, mut int_weighted, mut int_lq, mut int_lam1) = (0.0, 0.0, 0.0, 0.0);
    let mut int_t_lam2 = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        sup_hs = sup_hs.max(spec.sobolev_sq(s, t));
        let hs2 = spec.sobolev_sq(s + 2.0, t);
        int_hs1 += w * spec.sobolev_sq(s + 1.0, t);
        int_weighted += w * t * hs2;
        int_lq += w * hs2.powf(0.5 * q);
        int_lam1 += w * spec.homogeneous_sq(s + 1.0, t);
        int_t_lam2 += w * t * spec.homogeneous_sq(s + 2.0, t);
    }
    let bound = spec.sobolev_sq(s, 0.0);
    let lq_bound = cq * horizon.powf(1.0 - q) * bound.powf(0.5 * q);
    let lam_s0 = spec.homogeneous_sq(s, 0.0);
    Ok(SmoothingReport {
        s,
        horizon,
        q,
        sup_hs,
        int_hs1,
        int_weighted,
        int_lq,
        bound,
        lq_bound,
        cq,
        margin_sup: bound - sup_hs,
        margin_hs1: bound - int_hs1,
        margin_weighted: bound - int_weighted,
        margin_lq: lq_bound - int_lq,
        energy_lhs: int_lam1 + 0.5 * spec.homogeneous_sq(s, horizon),
        energy_rhs: 0.5 * lam_s0,
        weighted_lhs: 0.5 * horizon * spec.homogeneous_sq(s + 1.0, horizon) + int_t_lam2,
        weighted_rhs: 0.25 * lam_s0,
    })
}

//! Forced heat equation with zero initial datum and the estimates built on
//! it: `L^r(0,T; Ḣ^{s+2})` maximal regularity and the combined Stokes bound
//! with nonzero initial data.
//!
//! Forcing is sampled in time and interpolated linearly between samples.
//! On each segment the Duhamel integral against `e^{-|k|²(t-s)}` is then
//! exact: with `z = -|k|²τ`,
//! `û(t_i+τ) = e^z û(t_i) + τ φ₁(z) f̂_i + τ² φ₂(z) (f̂_{i+1} - f̂_i)/h`.
//! Time norms use Gauss–Legendre panels graded toward each segment start.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::heat::cq_constant;
use crate::quadrature::CompositeRule;
use crate::random::{random_vector_field, SpectrumShape};
use crate::report::EstimateReport;
use crate::spectral::{lambda_symbol, sobolev_weight, Grid, SpectralField, VectorField};

const PANEL_ORDER: usize = 10;

/// Time samples of a forcing (or solution) on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTrace {
    grid: Grid,
    times: Vec<f64>,
    samples: Vec<VectorField>,
}

impl ForcingTrace {
    /// `times` must start at 0 and increase strictly; one sample per time.
    pub fn new(times: Vec<f64>, samples: Vec<VectorField>) -> Result<Self> {
        if times.is_empty() || samples.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if times.len() != samples.len() {
            return Err(invalid(
                "samples",
                format!("{} times but {} samples", times.len(), samples.len()),
            ));
        }
        if times[0] != 0.0 {
            return Err(invalid("times", "first sample time must be 0"));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times", "must be finite and strictly increasing"));
        }
        let grid = *samples[0].grid();
        let ncomp = samples[0].len();
        if samples.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        if samples.iter().any(|s| s.len() != ncomp) {
            return Err(invalid("samples", "component counts differ"));
        }
        Ok(Self {
            grid,
            times,
            samples,
        })
    }

    pub fn from_scalars(times: Vec<f64>, samples: Vec<SpectralField>) -> Result<Self> {
        Self::new(
            times,
            samples.into_iter().map(VectorField::scalar).collect(),
        )
    }

    /// The same field at every time.
    pub fn constant(field: VectorField, times: Vec<f64>) -> Result<Self> {
        let samples = vec![field; times.len()];
        Self::new(times, samples)
    }

    /// `segments + 1` equally spaced times on `[0, T]`.
    pub fn uniform_times(horizon: f64, segments: usize) -> Vec<f64> {
        (0..=segments)
            .map(|j| horizon * j as f64 / segments as f64)
            .collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[VectorField] {
        &self.samples
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn components(&self) -> usize {
        self.samples[0].len()
    }

    /// Piecewise-linear interpolant at `t ∈ [0, T]`.
    pub fn sample_at(&self, t: f64) -> Result<VectorField> {
        if !(t >= 0.0 && t <= self.horizon()) {
            return Err(invalid("t", format!("{t} outside [0, {}]", self.horizon())));
        }
        let j = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        if j + 1 >= self.times.len() {
            return Ok(self.samples[j].clone());
        }
        let theta = (t - self.times[j]) / (self.times[j + 1] - self.times[j]);
        let a = self.samples[j].scaled(1.0 - theta);
        let b = self.samples[j + 1].scaled(theta);
        Ok(a.add(&b))
    }

    /// Leray projection of every sample (needs `d` components).
    pub fn leray_projected(&self) -> Result<Self> {
        if self.components() != self.grid.dim() {
            return Err(invalid(
                "forcing",
                "Leray projection needs a d-component trace",
            ));
        }
        Ok(Self {
            grid: self.grid,
            times: self.times.clone(),
            samples: self
                .samples
                .iter()
                .map(VectorField::leray_project)
                .collect(),
        })
    }
}

/// Random vector forcing with independent band-limited samples at
/// `segments + 1` equally spaced times.
pub fn random_forcing(
    grid: Grid,
    seed: u64,
    horizon: f64,
    segments: usize,
    shape: SpectrumShape,
    divergence_free: bool,
) -> Result<ForcingTrace> {
    if segments == 0 || !(horizon > 0.0) {
        return Err(invalid("forcing", "need T > 0 and at least one segment"));
    }
    let times = ForcingTrace::uniform_times(horizon, segments);
    let samples = (0..times.len())
        .map(|j| {
            let sub = seed.wrapping_mul(0x9e37_79b9).wrapping_add(j as u64 + 1);
            random_vector_field(grid, sub, shape, divergence_free)
        })
        .collect();
    ForcingTrace::new(times, samples)
}

/// `(e^z - 1)/z`
fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z)/z²`
fn phi2(z: f64) -> f64 {
    if z.abs() < 0.1 {
        // Σ z^k/(k+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 1..14 {
            term *= z / (k as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Nonzero `(component, mode)` slots of a trace, plus optional initial data.
struct ActiveModes {
    volume: f64,
    k2: Vec<f64>,
    slots: Vec<(usize, usize)>,
    /// `values[j][a]`: forcing sample `j` at slot `a`.
    values: Vec<Vec<Complex64>>,
    /// initial datum at each slot
    initial: Vec<Complex64>,
}

impl ActiveModes {
    fn of(trace: &ForcingTrace, initial: Option<&VectorField>) -> Self {
        let grid = trace.grid;
        let tables = grid.tables();
        let ncomp = trace.components();
        let mut slots = Vec::new();
        for c in 0..ncomp {
            for i in 0..grid.len() {
                let zero = Complex64::default();
                let forced = trace
                    .samples
                    .iter()
                    .any(|s| s.component(c).coeffs()[i] != zero);
                let seeded = initial.is_some_and(|u| u.component(c).coeffs()[i] != zero);
                if forced || seeded {
                    slots.push((c, i));
                }
            }
        }
        let values = trace
            .samples
            .iter()
            .map(|s| {
                slots
                    .iter()
                    .map(|&(c, i)| s.component(c).coeffs()[i])
                    .collect()
            })
            .collect();
        let initial = match initial {
            Some(u) => slots
                .iter()
                .map(|&(c, i)| u.component(c).coeffs()[i])
                .collect(),
            None => vec![Complex64::default(); slots.len()],
        };
        Self {
            volume: grid.volume(),
            k2: slots.iter().map(|&(_, i)| tables.k2[i]).collect(),
            slots,
            values,
            initial,
        }
    }

    fn weights(&self, w: impl Fn(f64) -> f64) -> Vec<f64> {
        self.k2.iter().map(|&k2| w(k2)).collect()
    }

    fn energy(&self, vals: &[Complex64], weight: &[f64]) -> f64 {
        self.volume
            * vals
                .iter()
                .zip(weight)
                .map(|(v, w)| w * v.norm_sqr())
                .sum::<f64>()
    }

    fn to_field(&self, grid: Grid, ncomp: usize, vals: &[Complex64], divfree: bool) -> VectorField {
        let mut comps = vec![SpectralField::zeros(grid); ncomp];
        for (&(c, i), v) in self.slots.iter().zip(vals) {
            comps[c].coeffs_mut()[i] = *v;
        }
        VectorField::from_parts(comps, divfree)
    }

    /// Marches the zero-data Duhamel solution across all segments, calling
    /// `visit(t, weight, u, f)` at every quadrature node, and returns the
    /// solution at the sample times.
    fn sweep(
        &self,
        times: &[f64],
        mut visit: impl FnMut(f64, f64, &[Complex64], &[Complex64]),
    ) -> Vec<Vec<Complex64>> {
        let n = self.slots.len();
        let lam_max = self.k2.iter().cloned().fold(1.0, f64::max);
        let finest = 0.25 / lam_max;
        let mut u = vec![Complex64::default(); n];
        let mut out = vec![u.clone()];
        let mut un = vec![Complex64::default(); n];
        let mut fn_ = vec![Complex64::default(); n];
        for j in 0..times.len() - 1 {
            let (t0, t1) = (times[j], times[j + 1]);
            let h = t1 - t0;
            let (f0, f1) = (&self.values[j], &self.values[j + 1]);
            let slope: Vec<Complex64> = f0.iter().zip(f1).map(|(a, b)| (b - a) / h).collect();
            let rule = CompositeRule::graded(t0, t1, finest, PANEL_ORDER);
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let tau = t - t0;
                for a in 0..n {
                    un[a] = advance(self.k2[a], tau, u[a], f0[a], slope[a]);
                    fn_[a] = f0[a] + slope[a] * tau;
                }
                visit(t, w, &un, &fn_);
            }
            for a in 0..n {
                u[a] = advance(self.k2[a], h, u[a], f0[a], slope[a]);
            }
            out.push(u.clone());
        }
        out
    }
}

#[inline]
fn advance(lambda: f64, tau: f64, u: Complex64, f: Complex64, slope: Complex64) -> Complex64 {
    let z = -lambda * tau;
    u * z.exp() + f * (tau * phi1(z)) + slope * (tau * tau * phi2(z))
}

/// Solution of `∂ₜu - Δu = f`, `u(0) = 0`, at the sample times of `f`.
pub fn duhamel_solve(f: &ForcingTrace) -> Result<ForcingTrace> {
    let modes = ActiveModes::of(f, None);
    let sols = modes.sweep(&f.times, |_, _, _, _| {});
    let divfree = f.samples.iter().all(VectorField::is_divergence_free);
    let samples = sols
        .iter()
        .map(|v| modes.to_field(f.grid, f.components(), v, divfree))
        .collect();
    ForcingTrace::new(f.times.clone(), samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxRegReport {
    pub r: f64,
    pub s: f64,
    pub horizon: f64,
    /// `‖u‖_{L^r(0,T; Ḣ^{s+2})}`
    pub lhs: f64,
    /// `‖f‖_{L^r(0,T; H^s)}`
    pub rhs: f64,
    /// `‖f‖_{L^r(0,T; Ḣ^s)}`
    pub rhs_homogeneous: f64,
    pub ratio: f64,
    pub homogeneous_ratio: f64,
    /// `‖u‖_{L²(0,T;L²)} / ‖f‖_{L²(0,T;L²)}`
    pub l2_inhom: f64,
    /// `e^T`
    pub l2_bound: f64,
}

impl MaxRegReport {
    /// At `r = 2` the homogeneous constant is 1 and the `L²` ratio is at
    /// most `e^T`; other exponents only carry the `L²` check. Both checks
    /// compare ratios, so `tol` is absolute.
    pub fn checks(&self, tol: f64) -> Vec<EstimateReport> {
        let mut out = Vec::new();
        if self.r == 2.0 {
            out.push(
                EstimateReport::at_most_abs(
                    "maxreg/L2-homogeneous",
                    self.homogeneous_ratio,
                    1.0,
                    tol,
                )
                .with_constant(1.0),
            );
        }
        out.push(
            EstimateReport::at_most_abs("maxreg/L2L2", self.l2_inhom, self.l2_bound, tol)
                .with_constant(self.l2_bound),
        );
        out
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon <= 1.0) {
        return Err(invalid("T", format!("must lie in (0, 1], got {horizon}")));
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(invalid("r", format!("time exponent must be > 1, got {r}")));
    }
    Ok(())
}

/// Both sides of the `L^r(0,T; Ḣ^{s+2})` maximal-regularity bound for the
/// zero-data solution driven by `f`, with `T` the trace horizon.
pub fn maxreg_ratio(f: &ForcingTrace, s: f64, r: f64) -> Result<MaxRegReport> {
    check_r(r)?;
    let horizon = f.horizon();
    check_horizon(horizon)?;
    let modes = ActiveModes::of(f, None);
    let wu = modes.weights(|k2| lambda_symbol(k2, 2.0 * (s + 2.0)));
    let wf = modes.weights(sobolev_weight(s)?);
    let wfh = modes.weights(|k2| lambda_symbol(k2, 2.0 * s));
    let ones = vec![1.0; modes.k2.len()];
    let half_r = 0.5 * r;
    let (mut iu, mut if_, mut ifh, mut iu0, mut if0) = (0.0, 0.0, 0.0, 0.0, 0.0);
    modes.sweep(&f.times, |_, w, u, fv| {
        iu += w * modes.energy(u, &wu).powf(half_r);
        if_ += w * modes.energy(fv, &wf).powf(half_r);
        ifh += w * modes.energy(fv, &wfh).powf(half_r);
        iu0 += w * modes.energy(u, &ones);
        if0 += w * modes.energy(fv, &ones);
    });
    let (lhs, rhs, rhs_h) = (iu.powf(1.0 / r), if_.powf(1.0 / r), ifh.powf(1.0 / r));
    let div = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    Ok(MaxRegReport {
        r,
        s,
        horizon,
        lhs,
        rhs,
        rhs_homogeneous: rhs_h,
        ratio: div(lhs, rhs),
        homogeneous_ratio: div(lhs, rhs_h),
        l2_inhom: div(iu0.sqrt(), if0.sqrt()),
        l2_bound: horizon.exp(),
    })
}

/// Everything measured for the Stokes problem with initial data `u₀` and
/// forcing `f`, split as `u = v + w` (free heat flow plus zero-data forced part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesReport {
    pub s: f64,
    pub eps: f64,
    pub r: f64,
    pub horizon: f64,
    /// `∫₀^T ‖u‖_{H^{s+1}}`
    pub lhs: f64,
    /// `∫₀^T ‖v‖_{H^{s+1}}`
    pub heat_part: f64,
    /// `∫₀^T ‖w‖_{H^{s+1}}`
    pub forced_part: f64,
    /// `M₁ = ‖u₀‖_{H^{s-1+ε}}`
    pub initial_norm: f64,
    /// `‖f‖_{L^r(0,T; H^{s-1})}`
    pub forcing_norm: f64,
    /// `‖Pf‖_{L^r(0,T; H^{s-1})}`
    pub projected_forcing_norm: f64,
    /// `∫₀^T ‖v‖^{1-ε}_{H^{s+1+ε}} ‖v‖^ε_{H^{s+ε}}`
    pub interpolated: f64,
    /// `(∫‖v‖^q_{H^{s+1+ε}})^{(2-ε)/2} (∫‖v‖²_{H^{s+ε}})^{ε/2}`, `q = 2(1-ε)/(2-ε)`
    pub holder_product: f64,
    pub q: f64,
    /// `∫₀^T ‖v‖^q_{H^{s+1+ε}}` and its heat bound `C_q T^{1-q} M₁^q`
    pub lq_integral: f64,
    pub lq_bound: f64,
    /// `∫₀^T ‖v‖²_{H^{s+ε}}` and its heat bound `M₁²`
    pub l2_integral: f64,
    pub l2_bound: f64,
    /// `C_q^{(2-ε)/2}`: the constant the interpolation argument yields
    pub proof_c_eps: f64,
    /// `proof_c_eps T^{ε/2} M₁`
    pub heat_bound: f64,
    /// `‖w‖_{L^r(0,T; H^{s+1})}`
    pub forced_lr: f64,
    /// `heat_part / (T^{ε/2} M₁)`
    pub empirical_c_eps: f64,
    /// `forced_part / (T^{1-1/r} ‖f‖_{L^r H^{s-1}})`
    pub empirical_c_r: f64,
}

impl StokesReport {
    pub fn checks(&self, tol: f64) -> Vec<EstimateReport> {
        let t_r = self.horizon.powf(1.0 - 1.0 / self.r);
        vec![
            EstimateReport::at_most(
                "stokes/splitting",
                self.lhs,
                self.heat_part + self.forced_part,
                tol,
            ),
            EstimateReport::at_most(
                "stokes/interpolation",
                self.heat_part,
                self.interpolated,
                tol,
            ),
            EstimateReport::at_most("stokes/holder", self.interpolated, self.holder_product, tol),
            EstimateReport::at_most("stokes/heat-Lq", self.lq_integral, self.lq_bound, tol),
            EstimateReport::at_most("stokes/heat-L2", self.l2_integral, self.l2_bound, tol),
            EstimateReport::at_most("stokes/heat-branch", self.heat_part, self.heat_bound, tol)
                .with_constant(self.proof_c_eps),
            EstimateReport::at_most(
                "stokes/forced-holder",
                self.forced_part,
                t_r * self.forced_lr,
                tol,
            ),
            EstimateReport::at_most(
                "stokes/projection",
                self.projected_forcing_norm,
                self.forcing_norm,
                tol,
            ),
        ]
    }

    /// `C_ε T^{ε/2} M₁ + C_r T^{1-1/r} ‖f‖` for given constants.
    pub fn combined_bound(&self, c_eps: f64, c_r: f64) -> f64 {
        c_eps * self.horizon.powf(0.5 * self.eps) * self.initial_norm
            + c_r * self.horizon.powf(1.0 - 1.0 / self.r) * self.forcing_norm
    }
}

fn lr_norm(trace: &ForcingTrace, weight: impl Fn(f64) -> f64, r: f64) -> f64 {
    let modes = ActiveModes::of(trace, None);
    let w = modes.weights(weight);
    let mut acc = 0.0;
    modes.sweep(&trace.times, |_, q, _, f| {
        acc += q * modes.energy(f, &w).powf(0.5 * r)
    });
    acc.powf(1.0 / r)
}

/// `C_ε = C_q^{(2-ε)/2}` with `q = 2(1-ε)/(2-ε)`: the initial-data constant
/// obtained from Hölder interpolation between the `L^q(H^{s+2})` and
/// `L²(H^{s+1})` smoothing bounds.
pub fn proof_c_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("need 0 < eps < 1, got {eps}")));
    }
    let q = 2.0 * (1.0 - eps) / (2.0 - eps);
    Ok(cq_constant(q)?.powf(0.5 * (2.0 - eps)))
}

/// Measures the Stokes estimate with nonzero divergence-free `u₀`.
pub fn stokes_ic_estimate(
    u0: &VectorField,
    f: &ForcingTrace,
    s: f64,
    eps: f64,
    r: f64,
) -> Result<StokesReport> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(invalid("s", format!("must be > 1, got {s}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    check_r(r)?;
    let horizon = f.horizon();
    check_horizon(horizon)?;
    if *u0.grid() != *f.grid() {
        return Err(Error::GridMismatch);
    }
    let residual = u0.divergence_residual();
    if u0.len() != u0.grid().dim() || residual > crate::spectral::DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree { residual });
    }

    let pf = f.leray_projected()?;
    let modes = ActiveModes::of(&pf, Some(u0));
    let w_s1 = modes.weights(sobolev_weight(s + 1.0)?);
    let w_top = modes.weights(sobolev_weight(s + 1.0 + eps)?);
    let w_mid = modes.weights(sobolev_weight(s + eps)?);
    let q = 2.0 * (1.0 - eps) / (2.0 - eps);
    let mut v = vec![Complex64::default(); modes.slots.len()];
    let mut total = v.clone();
    let (mut lhs, mut heat, mut forced, mut forced_lr) = (0.0, 0.0, 0.0, 0.0);
    let (mut interp, mut lq, mut l2) = (0.0, 0.0, 0.0);
    modes.sweep(&pf.times, |t, w, wv, _| {
        for a in 0..v.len() {
            v[a] = modes.initial[a] * (-modes.k2[a] * t).exp();
            total[a] = v[a] + wv[a];
        }
        lhs += w * modes.energy(&total, &w_s1).sqrt();
        let v1 = modes.energy(&v, &w_s1).sqrt();
        let vtop = modes.energy(&v, &w_top).sqrt();
        let vmid = modes.energy(&v, &w_mid).sqrt();
        heat += w * v1;
        interp += w * vtop.powf(1.0 - eps) * vmid.powf(eps);
        lq += w * vtop.powf(q);
        l2 += w * vmid * vmid;
        let e = modes.energy(wv, &w_s1);
        forced += w * e.sqrt();
        forced_lr += w * e.powf(0.5 * r);
    });
    let forced_lr = forced_lr.powf(1.0 / r);
    let initial_norm = u0.sobolev_norm(s - 1.0 + eps)?;
    let forcing_norm = lr_norm(f, sobolev_weight(s - 1.0)?, r);
    let projected_forcing_norm = lr_norm(&pf, sobolev_weight(s - 1.0)?, r);
    let cq = cq_constant(q)?;
    let proof_c_eps = proof_c_eps(eps)?;
    let t_eps = horizon.powf(0.5 * eps);
    let t_r = horizon.powf(1.0 - 1.0 / r);
    let div = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    Ok(StokesReport {
        s,
        eps,
        r,
        horizon,
        lhs,
        heat_part: heat,
        forced_part: forced,
        initial_norm,
        forcing_norm,
        projected_forcing_norm,
        interpolated: interp,
        holder_product: lq.powf(0.5 * (2.0 - eps)) * l2.powf(0.5 * eps),
        q,
        lq_integral: lq,
        lq_bound: cq * horizon.powf(1.0 - q) * initial_norm.powf(q),
        l2_integral: l2,
        l2_bound: initial_norm * initial_norm,
        proof_c_eps,
        heat_bound: proof_c_eps * t_eps * initial_norm,
        forced_lr,
        empirical_c_eps: div(heat, t_eps * initial_norm),
        empirical_c_r: div(forced, t_r * forcing_norm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(2, 16, 1.0).unwrap()
    }

    fn unit_mode(m: &[i64]) -> SpectralField {
        SpectralField::single_mode(grid(), m, Complex64::new(1.0, 0.0), true).unwrap()
    }

    #[test]
    fn phi_functions_match_closed_forms() {
        for &z in &[-0.05f64, -0.0999, -0.1, -3.0, 0.07] {
            assert!((phi1(z) - (z.exp() - 1.0) / z).abs() < 1e-12);
            assert!(
                (phi2(z) - (z.exp() - 1.0 - z) / (z * z)).abs() < 1e-12,
                "z={z}"
            );
        }
        // leading Taylor terms where the closed forms cancel
        let z = -1e-6f64;
        assert!((phi1(z) - (1.0 + z / 2.0 + z * z / 6.0)).abs() < 4e-16);
        assert!((phi2(z) - (0.5 + z / 6.0 + z * z / 24.0)).abs() < 4e-16);
        assert_eq!(phi2(0.0), 0.5);
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let f = ForcingTrace::constant(
            VectorField::zeros(grid()),
            ForcingTrace::uniform_times(1.0, 4),
        )
        .unwrap();
        let u = duhamel_solve(&f).unwrap();
        assert!(u.samples().iter().all(|s| s.l2_norm() == 0.0));
    }

    #[test]
    fn constant_single_mode_closed_form() {
        let times = ForcingTrace::uniform_times(0.8, 5);
        let f = ForcingTrace::constant(VectorField::scalar(unit_mode(&[1, 2])), times).unwrap();
        let u = duhamel_solve(&f).unwrap();
        let lam = 5.0;
        for (t, s) in u.times().iter().zip(u.samples()) {
            let c = s.component(0).coeff(&[1, 2]).unwrap();
            let exact = (1.0 - (-lam * t).exp()) / lam;
            assert!((c.re - exact).abs() < 1e-15, "t={t}");
            assert_eq!(c.im, 0.0);
        }
    }

    #[test]
    fn linear_forcing_matches_mode_ode() {
        // f(t) = t on one mode: û(t) = t/λ - (1 - e^{-λt})/λ²
        let times = ForcingTrace::uniform_times(1.0, 3);
        let samples = times
            .iter()
            .map(|&t| unit_mode(&[0, 3]).scaled(t))
            .collect();
        let f = ForcingTrace::from_scalars(times, samples).unwrap();
        let u = duhamel_solve(&f).unwrap();
        let lam: f64 = 9.0;
        for (t, s) in u.times().iter().zip(u.samples()) {
            let c = s.component(0).coeff(&[0, 3]).unwrap().re;
            let exact = t / lam - (1.0 - (-lam * t).exp()) / (lam * lam);
            assert!((c - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn steady_forcing_approaches_inverse_laplacian() {
        let times = ForcingTrace::uniform_times(40.0, 4);
        let f = ForcingTrace::constant(VectorField::scalar(unit_mode(&[2, 0])), times).unwrap();
        let u = duhamel_solve(&f).unwrap();
        let last = u
            .samples()
            .last()
            .unwrap()
            .component(0)
            .coeff(&[2, 0])
            .unwrap();
        assert!((last.re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_mode_ratio_closed_form() {
        let horizon = 0.5;
        let f = ForcingTrace::constant(
            VectorField::scalar(unit_mode(&[1, 1])),
            ForcingTrace::uniform_times(horizon, 2),
        )
        .unwrap();
        let rep = maxreg_ratio(&f, 0.0, 2.0).unwrap();
        let lam: f64 = 2.0;
        let inner = horizon - 2.0 * (1.0 - (-lam * horizon).exp()) / lam
            + (1.0 - (-2.0 * lam * horizon).exp()) / (2.0 * lam);
        let exact = (inner / horizon).sqrt();
        assert!((rep.homogeneous_ratio - exact).abs() < 1e-12);
        assert!(rep.homogeneous_ratio < 1.0);
        assert!(rep.checks(1e-9).iter().all(|c| c.passed));
    }

    #[test]
    fn rejects_bad_exponents_and_horizons() {
        let f = random_forcing(grid(), 1, 0.5, 4, SpectrumShape::band(3.0), false).unwrap();
        assert!(maxreg_ratio(&f, 0.0, 1.0).is_err());
        assert!(maxreg_ratio(&f, 0.0, 0.5).is_err());
        let long = random_forcing(grid(), 1, 2.0, 4, SpectrumShape::band(3.0), false).unwrap();
        assert!(maxreg_ratio(&long, 0.0, 2.0).is_err());
    }

    #[test]
    fn trace_validation() {
        assert!(matches!(
            ForcingTrace::new(vec![], vec![]),
            Err(Error::EmptyTrace)
        ));
        let z = VectorField::zeros(grid());
        assert!(ForcingTrace::new(vec![0.1, 0.2], vec![z.clone(), z.clone()]).is_err());
        assert!(ForcingTrace::new(vec![0.0, 0.0], vec![z.clone(), z.clone()]).is_err());
        assert!(ForcingTrace::new(vec![0.0], vec![z.clone(), z]).is_err());
    }

    #[test]
    fn interpolation_between_samples() {
        let times = vec![0.0, 1.0];
        let f = ForcingTrace::from_scalars(
            times,
            vec![unit_mode(&[1, 0]), unit_mode(&[1, 0]).scaled(3.0)],
        )
        .unwrap();
        let mid = f.sample_at(0.25).unwrap();
        assert!((mid.component(0).coeff(&[1, 0]).unwrap().re - 1.5).abs() < 1e-15);
        assert!(f.sample_at(1.5).is_err());
    }

    #[test]
    fn stokes_branches() {
        let g = grid();
        let u0 = random_vector_field(g, 4, SpectrumShape::band(4.0), true);
        let zero =
            ForcingTrace::constant(VectorField::zeros(g), ForcingTrace::uniform_times(0.5, 4))
                .unwrap();
        let rep = stokes_ic_estimate(&u0, &zero, 1.5, 0.5, 2.0).unwrap();
        assert_eq!(rep.forced_part, 0.0);
        assert!((rep.lhs - rep.heat_part).abs() < 1e-14 * rep.lhs);
        assert!(
            rep.checks(1e-10).iter().all(|c| c.passed),
            "{:?}",
            rep.checks(1e-10)
        );

        let f = random_forcing(g, 5, 0.5, 8, SpectrumShape::band(4.0), false).unwrap();
        let rep = stokes_ic_estimate(&VectorField::zeros(g), &f, 1.5, 0.5, 4.0 / 3.0).unwrap();
        assert_eq!(rep.heat_part, 0.0);
        assert!((rep.lhs - rep.forced_part).abs() < 1e-14 * rep.lhs);
        assert!(rep.checks(1e-10).iter().all(|c| c.passed));

        let bad = random_vector_field(g, 4, SpectrumShape::band(4.0), false);
        assert!(stokes_ic_estimate(&bad, &f, 1.5, 0.5, 2.0).is_err());
        assert!(stokes_ic_estimate(&u0, &f, 1.0, 0.5, 2.0).is_err());
        assert!(stokes_ic_estimate(&u0, &f, 1.5, 1.0, 2.0).is_err());
    }
}

//! Initial datum in `L²(ℝ^d)` whose heat evolution is not in `L¹(0,T; Ḣ²)`.
//!
//! The datum is radial, `û₀(ξ) = 1 / (|ξ|^{d/2} log(2 + |ξ|))`, so every
//! quantity reduces to a one-dimensional integral in `ρ = |ξ|` times the
//! measure of the unit sphere. Nothing here touches a lattice: divergence
//! needs unbounded frequency support.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, CompositeRule};

/// Neglected radial tail allowed, relative to the retained integral.
pub const TAIL_TOLERANCE: f64 = 1e-10;

const RADIAL_OPTS: AdaptiveOptions = AdaptiveOptions {
    abs_tol: 0.0,
    rel_tol: 1e-12,
    max_intervals: 4000,
};

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(invalid("d", format!("dimension {dim} not in {{2, 3}}")))
    }
}

/// `|S^{d-1}|`: `2π` for `d = 2`, `4π` for `d = 3`.
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

/// `c` in `∫_{|ξ|<=j} |ξ|^{4-d} dξ = c j⁴`, i.e. `|S^{d-1}| / 4`.
pub fn shell_constant(dim: usize) -> f64 {
    sphere_measure(dim) / 4.0
}

/// `û₀(ρ) = 1 / (ρ^{d/2} log(2 + ρ))`.
pub fn counterexample_profile(rho: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    if !(rho > 0.0) {
        return Err(invalid("rho", format!("must be > 0, got {rho}")));
    }
    Ok(profile(rho, dim))
}

#[inline]
fn profile(rho: f64, dim: usize) -> f64 {
    1.0 / (rho.powf(0.5 * dim as f64) * (2.0 + rho).ln())
}

/// Radial density of `‖u(t)‖²_{Ḣ²}` without the sphere factor:
/// `ρ⁴ û₀(ρ)² e^{-2ρ²t} ρ^{d-1}`.
#[inline]
fn h2_density(rho: f64, t: f64, dim: usize) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let p = profile(rho, dim);
    rho.powi(4) * p * p * (-2.0 * rho * rho * t).exp() * rho.powi(dim as i32 - 1)
}

/// Upper bound for `∫_R^∞ ρ³ e^{-2ρ²t} / log²(2+ρ) dρ`, using
/// `∫_R^∞ ρ³ e^{-aρ²} dρ = e^{-aR²}(aR² + 1) / (2a²)` with `a = 2t`.
pub fn gaussian_tail_bound(t: f64, rho_max: f64) -> f64 {
    let a = 2.0 * t;
    let ar2 = a * rho_max * rho_max;
    (-ar2).exp() * (ar2 + 1.0) / (2.0 * a * a) / (2.0 + rho_max).ln().powi(2)
}

/// `∫_0^R` of a radial density over dyadic panels, each integrated adaptively.
fn radial_integral(density: impl Fn(f64) -> f64, upper: f64) -> Result<f64> {
    let mut breaks = vec![0.0];
    let mut b = 1.0f64.min(upper);
    loop {
        breaks.push(b);
        if b >= upper {
            break;
        }
        b = (2.0 * b).min(upper);
    }
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate_adaptive(&density, w[0], w[1], RADIAL_OPTS)?.value;
    }
    Ok(total)
}

/// `∫_0^R ρ⁴ û₀² e^{-2ρ²t} ρ^{d-1} dρ` with its tail bound.
fn truncated_h2(t: f64, dim: usize, rho_max: f64) -> Result<(f64, f64)> {
    let retained = radial_integral(|r| h2_density(r, t, dim), rho_max)?;
    Ok((retained, gaussian_tail_bound(t, rho_max)))
}

/// `‖u(t)‖_{Ḣ²}` for the counterexample datum.
///
/// With `rho_max = None` the cutoff is doubled until the Gaussian tail bound
/// drops below [`TAIL_TOLERANCE`] of the retained integral; an explicit
/// cutoff that fails that test is an error.
pub fn counterexample_h2_norm(t: f64, dim: usize, rho_max: Option<f64>) -> Result<f64> {
    check_dim(dim)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be > 0, got {t}")));
    }
    let retained = match rho_max {
        Some(r) => {
            let (retained, tail) = truncated_h2(t, dim, r)?;
            if tail > TAIL_TOLERANCE * retained {
                return Err(Error::Quadrature(format!(
                    "cutoff {r} leaves tail {tail:e} > {TAIL_TOLERANCE:e} x {retained:e}"
                )));
            }
            retained
        }
        None => {
            let mut r = (4.0 / t.sqrt()).max(4.0);
            loop {
                let (retained, tail) = truncated_h2(t, dim, r)?;
                if tail <= TAIL_TOLERANCE * retained {
                    break retained;
                }
                r *= 2.0;
            }
        }
    };
    Ok((sphere_measure(dim) * retained).sqrt())
}

/// `(∫_{|ξ|<=j} |ξ|⁴ |û₀|² e^{-2|ξ|²t} dξ)^{1/2}` (`t = 0` allowed).
pub fn restricted_h2_norm(t: f64, dim: usize, j: f64) -> Result<f64> {
    check_dim(dim)?;
    let v = radial_integral(|r| h2_density(r, t, dim), j)?;
    Ok((sphere_measure(dim) * v).sqrt())
}

/// `S(N) = Σ_{j=j₀}^{N} 1 / ((j+1) log(2+j))`, compensated summation.
pub fn harmonic_log_sum(j0: u64, n: u64) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for j in j0..=n {
        let x = 1.0 / ((j as f64 + 1.0) * (j as f64 + 2.0).ln());
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Smallest `j₀` with `j₀^{-2} <= T`.
pub fn first_index(horizon: f64) -> u64 {
    let mut j = horizon.powf(-0.5).ceil().max(1.0) as u64;
    while j > 1 && ((j - 1) as f64).powi(-2) <= horizon {
        j -= 1;
    }
    while (j as f64).powi(-2) > horizon {
        j += 1;
    }
    j
}

/// Largest `N` with `(N+1)^{-2} >= t_min`, so all slices up to `N` lie in `[t_min, T]`.
pub fn last_index(t_min: f64) -> u64 {
    let mut n = t_min.powf(-0.5).floor() as u64;
    while n > 0 && ((n + 1) as f64).powi(-2) < t_min {
        n -= 1;
    }
    while ((n + 2) as f64).powi(-2) >= t_min {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t_min: f64,
    /// `I(t_min) = ∫_{t_min}^T ‖u(t)‖_{Ḣ²} dt`
    pub integral: f64,
    pub n_terms: u64,
    /// `S(N)` with `N = N(t_min)`
    pub partial_sum: f64,
    /// `I / S`
    pub ratio: f64,
    /// `e^{-1} c_shell^{1/2} S(N)`, the lower bound the slicing argument gives for `I`
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceScan {
    pub dim: usize,
    pub horizon: f64,
    pub j0: u64,
    pub shell_constant: f64,
    pub rows: Vec<ScanRow>,
}

/// `I(t_min)` and `S(N(t_min))` for each requested `t_min`.
///
/// The time integral uses 10-point Gauss–Legendre panels whose breakpoints
/// are `T 2^{-k}` together with every requested `t_min`.
pub fn counterexample_divergence_scan(
    dim: usize,
    horizon: f64,
    t_mins: &[f64],
) -> Result<DivergenceScan> {
    check_dim(dim)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("T", format!("must be > 0, got {horizon}")));
    }
    if t_mins.iter().any(|&t| !(t > 0.0 && t < horizon)) {
        return Err(invalid("t_min", "every t_min must lie in (0, T)"));
    }
    let mut sorted = t_mins.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();
    let smallest = *sorted
        .last()
        .ok_or_else(|| invalid("t_min", "empty list"))?;

    let mut breaks = vec![horizon];
    let mut t = horizon;
    while t / 2.0 > smallest {
        t /= 2.0;
        breaks.push(t);
    }
    breaks.extend(&sorted);
    breaks.sort_by(|a, b| b.total_cmp(a));
    breaks.dedup();

    // panel integrals, largest t first
    let mut panels = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        let rule = CompositeRule::on_panels(&[w[1], w[0]], 10);
        let mut v = 0.0;
        for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
            v += wt * counterexample_h2_norm(t, dim, None)?;
        }
        panels.push((w[1], v));
    }

    let j0 = first_index(horizon);
    let c_shell = shell_constant(dim);
    let mut rows = Vec::with_capacity(sorted.len());
    for &t_min in &sorted {
        let integral: f64 = panels
            .iter()
            .filter(|(lo, _)| *lo >= t_min)
            .map(|(_, v)| v)
            .sum();
        let n_terms = last_index(t_min);
        let partial_sum = if n_terms >= j0 {
            harmonic_log_sum(j0, n_terms)
        } else {
            0.0
        };
        rows.push(ScanRow {
            t_min,
            integral,
            n_terms,
            partial_sum,
            ratio: if partial_sum > 0.0 {
                integral / partial_sum
            } else {
                f64::INFINITY
            },
            lower_bound: c_shell.sqrt() * partial_sum / E,
        });
    }
    Ok(DivergenceScan {
        dim,
        horizon,
        j0,
        shell_constant: c_shell,
        rows,
    })
}

/// The five quantities of one time slice `[(j+1)^{-2}, j^{-2}]` in the
/// lower-bound argument; each should dominate the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub j: u64,
    /// `∫_slice ‖u(t)‖_{Ḣ²} dt`
    pub full: f64,
    /// same, frequencies restricted to `|ξ| <= j`
    pub restricted: f64,
    /// `e^{-1} |slice| Q_j^{1/2}`, `Q_j = ∫_{|ξ|<=j} |ξ|⁴|û₀|² dξ`
    pub frozen: f64,
    /// `e^{-1} Q_j^{1/2} / (j²(j+1))`
    pub interval: f64,
    /// `e^{-1} c_shell^{1/2} / ((j+1) log(2+j))`
    pub shell: f64,
    /// `restricted / (|slice| Q_j^{1/2})`: the sharp factor replacing `e^{-1}`.
    pub sharp_exp_factor: f64,
    /// `Q_j log²(2+j) / j⁴`: the sharp factor replacing `c_shell`.
    pub sharp_shell_factor: f64,
}

impl ChainRow {
    /// Margins of the four steps (each should be >= 0).
    pub fn margins(&self) -> [f64; 4] {
        [
            self.full - self.restricted,
            self.restricted - self.frozen,
            self.frozen - self.interval,
            self.interval - self.shell,
        ]
    }
}

/// Evaluates the slice-by-slice lower-bound chain for `j = j₀ … j_max`.
pub fn lower_bound_chain(dim: usize, horizon: f64, j_max: u64) -> Result<Vec<ChainRow>> {
    check_dim(dim)?;
    let j0 = first_index(horizon);
    let c_shell = shell_constant(dim);
    let mut rows = Vec::new();
    for j in j0..=j_max {
        let jf = j as f64;
        let (t_lo, t_hi) = ((jf + 1.0).powi(-2), jf.powi(-2));
        let rule = CompositeRule::on_panels(&[t_lo, t_hi], 10);
        let (mut full, mut restricted) = (0.0, 0.0);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            full += w * counterexample_h2_norm(t, dim, None)?;
            restricted += w * restricted_h2_norm(t, dim, jf)?;
        }
        let q_sqrt = restricted_h2_norm(0.0, dim, jf)?;
        let frozen = (t_hi - t_lo) * q_sqrt / E;
        let interval = q_sqrt / (jf * jf * (jf + 1.0)) / E;
        let shell = c_shell.sqrt() / ((jf + 1.0) * (jf + 2.0).ln()) / E;
        rows.push(ChainRow {
            j,
            full,
            restricted,
            frozen,
            interval,
            shell,
            sharp_exp_factor: restricted / ((t_hi - t_lo) * q_sqrt),
            sharp_shell_factor: q_sqrt * q_sqrt * (jf + 2.0).ln().powi(2) / jf.powi(4),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_values() {
        assert!((counterexample_profile(1.0, 2).unwrap() - 1.0 / 3f64.ln()).abs() < 1e-15);
        assert!(counterexample_profile(0.0, 2).is_err());
        assert!(counterexample_profile(-1.0, 3).is_err());
        assert!(counterexample_profile(1.0, 4).is_err());
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let v = counterexample_profile(2f64.powi(k), 3).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn norm_is_nonincreasing_in_time() {
        let mut prev = f64::INFINITY;
        for k in 1..12 {
            let t = 10f64.powf(-(k as f64) * 0.5);
            let v = counterexample_h2_norm(t, 2, None).unwrap();
            assert!(v.is_finite());
            if k > 1 {
                assert!(v >= prev);
            }
            prev = v;
        }
    }

    #[test]
    fn short_cutoff_is_rejected() {
        assert!(counterexample_h2_norm(1e-2, 2, Some(5.0)).is_err());
        assert!(counterexample_h2_norm(1e-2, 2, Some(200.0)).is_ok());
        assert!(counterexample_h2_norm(0.0, 2, None).is_err());
    }

    #[test]
    fn indices() {
        assert_eq!(first_index(1.0), 1);
        assert_eq!(first_index(0.25), 2);
        assert_eq!(first_index(0.2), 3);
        assert_eq!(last_index(0.25), 1);
        assert_eq!(last_index(1.0 / 9.0), 2);
        assert_eq!(last_index(0.1), 2);
        for &t in &[1e-3, 3.7e-5, 1e-9] {
            let n = last_index(t);
            assert!(((n + 1) as f64).powi(-2) >= t);
            assert!(((n + 2) as f64).powi(-2) < t);
        }
    }

    #[test]
    fn literal_partial_sum() {
        let mut s = 0.0;
        for j in 1..=10u64 {
            s += 1.0 / ((j as f64 + 1.0) * (j as f64 + 2.0).ln());
        }
        assert!((harmonic_log_sum(1, 10) - s).abs() < 1e-15);
        assert_eq!(harmonic_log_sum(5, 4), 0.0);
    }
}

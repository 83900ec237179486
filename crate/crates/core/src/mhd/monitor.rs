//! Fitting and re-checking the differential inequalities along a run.
//!
//! Time derivatives are three-point centred differences on the (possibly
//! nonuniform) step grid, evaluated at interior rows. A fitted constant is
//! the maximum over rows of `(lhs)₊ / rhs`, i.e. the smallest constant for
//! which the sampled inequality holds.

use serde::{Deserialize, Serialize};

use super::{MhdConstants, NormRecord, NormSeries, Tagged};
use crate::analysis::{
    existence_time, ode_comparison_bound, tstar2_lhs, young_exponents_check, OdeParams,
};
use crate::error::{invalid, Error, Result};
use crate::maxreg::proof_c_eps;
use crate::report::EstimateReport;

/// Relative size below which a left side with a vanishing right side is
/// treated as round-off.
const NOISE: f64 = 1e-9;
/// Tolerance of the re-scan of a fitted inequality.
const RESCAN_TOL: f64 = 1e-12;

/// One sampled instance of `lhs <= c · rhs`.
#[derive(Debug, Clone, Copy)]
struct Sample {
    t: f64,
    lhs: f64,
    rhs: f64,
    /// magnitude of the terms forming `lhs`
    scale: f64,
}

/// A fitted constant with where it was attained and its re-scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    pub value: f64,
    /// time of the binding sample (NaN when no sample binds)
    pub t_at_max: f64,
    pub samples: usize,
    /// `max (lhs - value·rhs) / scale` over the samples; `<= 0` by construction
    pub worst_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    pub constants: MhdConstants,
    pub fits: Vec<FitRecord>,
}

impl ConstantFit {
    pub fn get(&self, name: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.name == name)
    }
}

fn fit(name: &str, samples: &[Sample]) -> FitRecord {
    let mut value = 0.0f64;
    let mut t_at_max = f64::NAN;
    for s in samples {
        let lhs = s.lhs.max(0.0);
        if s.rhs > 0.0 {
            let c = lhs / s.rhs;
            if c > value {
                value = c;
                t_at_max = s.t;
            }
        } else if lhs > NOISE * s.scale {
            value = f64::INFINITY;
            t_at_max = s.t;
            break;
        }
    }
    let worst_excess = rescan(samples, value);
    FitRecord {
        name: name.to_string(),
        value,
        t_at_max,
        samples: samples.len(),
        worst_excess,
    }
}

/// `max (lhs - c·rhs) / max(|lhs|, c·rhs, NOISE·scale)`; rows whose right side
/// vanishes only count beyond the round-off level.
fn rescan(samples: &[Sample], c: f64) -> f64 {
    if !c.is_finite() {
        return f64::INFINITY;
    }
    samples
        .iter()
        .map(|s| {
            let bound = c * s.rhs;
            let denom = s.lhs.abs().max(bound.abs()).max(NOISE * s.scale);
            if denom == 0.0 || (s.rhs <= 0.0 && s.lhs <= NOISE * s.scale) {
                0.0
            } else {
                (s.lhs - bound) / denom
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Centred derivative of `y` at the interior points of `t`.
fn centred_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    (1..t.len() - 1)
        .map(|i| {
            let h1 = t[i] - t[i - 1];
            let h2 = t[i + 1] - t[i];
            -h2 / (h1 * (h1 + h2)) * y[i - 1]
                + (h2 - h1) / (h1 * h2) * y[i]
                + h1 / (h2 * (h1 + h2)) * y[i + 1]
        })
        .collect()
}

fn interior(series: &NormSeries) -> impl Iterator<Item = (usize, &NormRecord)> {
    series.rows[1..series.len() - 1].iter().enumerate()
}

/// Fits every constant of the existence argument from a run.
///
/// * `c3`: `d‖u‖²/dt + ‖∇u‖² ≤ c3 ‖B‖⁴_{H^s}`
/// * `B-L2` (reported only): `½ d‖B‖²/dt ≤ c ‖∇u‖_{H^s} ‖B‖²`
/// * `c4`: `½ d‖B‖²_{H^s}/dt ≤ c4 ‖∇u‖_{H^s} ‖B‖²_{H^s}`
/// * `c1 = c2`: `dX/dt + ‖u‖²_{H^{s+ε}} - c3 Y² - 2‖u‖² ≤ c (X^p + Y^{1+ε})`
///   with `X = ‖u‖²_{H^{s-1+ε}}`, `Y = ‖B‖²_{H^s}`, `p = (1+ε)/ε`
/// * `c5 = c_f^r` where `‖f‖_{H^{s-1}} ≤ Y + c_f M₀^{ε/(s+ε)} ‖u‖^{2s/(s+ε)}_{H^{s+ε}}`
/// * `C_ε`: the integrated Stokes bound over every prefix `[0, T_k]`, `T_k ≤ 1`
/// * `C_r` (when the forcing integral is positive): the forced part of the
///   Stokes bound with the initial-data part taken at its explicit constant
pub fn fit_constants(series: &NormSeries) -> Result<ConstantFit> {
    if series.len() < 3 {
        return Err(Error::SeriesTooShort { len: series.len() });
    }
    if !series.is_consistent() {
        return Err(invalid(
            "series",
            "non-finite entries or decreasing integrals",
        ));
    }
    let (s, eps) = (series.s, series.eps);
    let r = series.r();
    let p = (1.0 + eps) / eps;
    let t = series.times();
    let first = series.rows[0];
    let m0 = series.m0();
    let m1 = first.u_h_sm1pe;
    let b0 = first.b_h_s;

    let sq = |get: fn(&NormRecord) -> f64| series.column(|r| get(r).powi(2));
    let d_u = centred_derivative(&t, &sq(|r| r.u_l2));
    let d_b = centred_derivative(&t, &sq(|r| r.b_l2));
    let d_y = centred_derivative(&t, &sq(|r| r.b_h_s));
    let d_x = centred_derivative(&t, &sq(|r| r.u_h_sm1pe));

    let mut upoor = Vec::new();
    let mut bpoor = Vec::new();
    let mut bgood = Vec::new();
    for (i, row) in interior(series) {
        let grad2 = row.grad_u_l2.powi(2);
        let y = row.b_h_s.powi(2);
        upoor.push(Sample {
            t: row.t,
            lhs: d_u[i] + grad2,
            rhs: y * y,
            scale: d_u[i].abs() + grad2,
        });
        bpoor.push(Sample {
            t: row.t,
            lhs: 0.5 * d_b[i],
            rhs: row.grad_u_h_s * row.b_l2.powi(2),
            scale: 0.5 * d_b[i].abs() + row.b_l2.powi(2),
        });
        bgood.push(Sample {
            t: row.t,
            lhs: 0.5 * d_y[i],
            rhs: row.grad_u_h_s * y,
            scale: 0.5 * d_y[i].abs() + y,
        });
    }
    let fit_c3 = fit("c3", &upoor);
    let fit_bpoor = fit("B-L2", &bpoor);
    let fit_c4 = fit("c4", &bgood);
    let c3 = fit_c3.value;

    let mut energy = Vec::new();
    let mut forcing = Vec::new();
    for (i, row) in interior(series) {
        let x = row.u_h_sm1pe.powi(2);
        let y = row.b_h_s.powi(2);
        let spe2 = row.u_h_spe.powi(2);
        let known = if c3.is_finite() { c3 * y * y } else { 0.0 };
        let u2 = 2.0 * row.u_l2.powi(2);
        energy.push(Sample {
            t: row.t,
            lhs: d_x[i] + spe2 - known - u2,
            rhs: x.powf(p) + y.powf(1.0 + eps),
            scale: d_x[i].abs() + spe2 + known + u2,
        });
    }
    for row in &series.rows {
        let y = row.b_h_s.powi(2);
        forcing.push(Sample {
            t: row.t,
            lhs: row.f_h_sm1 - y,
            rhs: m0.powf(eps / (s + eps)) * row.u_h_spe.powf(2.0 * s / (s + eps)),
            scale: row.f_h_sm1 + y,
        });
    }
    let fit_c12 = fit("c1=c2", &energy);
    let fit_cf = fit("forcing", &forcing);
    let c5 = fit_cf.value.powf(r);

    let mut stokes = Vec::new();
    let mut forced = Vec::new();
    let proof = proof_c_eps(eps)?;
    for row in series.rows[1..].iter().filter(|r| r.t <= 1.0) {
        let te = row.t.powf(0.5 * eps);
        let inner = row.int_b_h_s_pow + c5 * m0.powf(eps / s) * row.int_u_h_spe_sq;
        stokes.push(Sample {
            t: row.t,
            lhs: row.int_u_h_sp1,
            rhs: te * m1 + row.t.powf(eps / (s + eps)) * inner.powf(1.0 / r),
            scale: row.int_u_h_sp1,
        });
        let heat = proof * te * m1;
        forced.push(Sample {
            t: row.t,
            lhs: row.int_u_h_sp1 - heat,
            rhs: row.t.powf(1.0 - 1.0 / r) * row.int_f_h_sm1_pow.powf(1.0 / r),
            scale: row.int_u_h_sp1 + heat,
        });
    }
    let fit_ceps = fit("C_eps", &stokes);
    let fit_cr = fit("C_r", &forced);

    let finite = |f: &FitRecord| -> Result<f64> {
        if f.value.is_finite() {
            Ok(f.value)
        } else {
            Err(invalid(
                "series",
                format!(
                    "constant {} is unbounded (binding at t = {})",
                    f.name, f.t_at_max
                ),
            ))
        }
    };
    let c12 = finite(&fit_c12)?;
    let mut constants = MhdConstants::new(
        s,
        eps,
        m0,
        m1,
        b0,
        Tagged::fitted(c12),
        Tagged::fitted(c12),
        Tagged::fitted(finite(&fit_c3)?),
        Tagged::fitted(finite(&fit_c4)?),
        Tagged::fitted(finite(&fit_cf)?.powf(r)),
        Tagged::fitted(finite(&fit_ceps)?),
    )?;
    if forced.iter().any(|x| x.rhs > 0.0) && fit_cr.value.is_finite() {
        constants.c_r = Some(Tagged::fitted(fit_cr.value));
    }
    Ok(ConstantFit {
        constants,
        fits: vec![fit_c3, fit_bpoor, fit_c4, fit_c12, fit_cf, fit_ceps, fit_cr],
    })
}

/// The row with the smallest relative margin of `lhs <= rhs`.
fn worst_row(
    check: &str,
    rows: impl Iterator<Item = (f64, f64, f64)>,
    rel_tol: f64,
) -> Option<EstimateReport> {
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for (t, lhs, rhs) in rows {
        let scale = lhs.abs().max(rhs.abs());
        // rows with both sides zero only matter when every row is like that
        let rel = if scale > 0.0 {
            (rhs - lhs) / scale
        } else {
            f64::INFINITY
        };
        let rel = if rel.is_nan() { f64::NEG_INFINITY } else { rel };
        if best.is_none_or(|b| rel < b.0) {
            best = Some((rel, t, lhs, rhs));
        }
    }
    best.map(|(_, t, lhs, rhs)| {
        EstimateReport::at_most(check, lhs, rhs, rel_tol).with_note(format!("worst at t = {t:.6e}"))
    })
}

/// Bootstrap consequences on `[0, T*]` checked against the recorded series:
/// the `B` doubling bound, the ODE comparison bound on `‖u‖²_{H^{s-1+ε}}`,
/// the `∫‖u‖²_{H^{s+ε}}` and `∫‖u‖_{H^{s+1}}` bounds, and the threshold
/// `< log 4 / (2 c4)`.
pub fn closure_checks(
    series: &NormSeries,
    c: &MhdConstants,
    tstar: f64,
) -> Result<Vec<EstimateReport>> {
    c.validate()?;
    if !(tstar > 0.0) {
        return Err(Error::NoExistenceTime(format!("T* = {tstar}")));
    }
    let rows: Vec<&NormRecord> = series.up_to(tstar * (1.0 + 1e-12)).collect();
    if rows.is_empty() {
        return Err(Error::SeriesTooShort { len: 0 });
    }
    let p = c.exponent();
    let params = OdeParams::new(c.eps, c.c1.value, c.m1, c.m2, tstar)?;
    let mut out = Vec::new();
    out.extend(worst_row(
        "closure/B-Hs-doubling",
        rows.iter().map(|r| (r.t, r.b_h_s, 2.0 * c.b0_hs)),
        1e-12,
    ));
    let mut comparison = Vec::new();
    for r in &rows {
        comparison.push((
            r.t,
            r.u_h_sm1pe.powi(2),
            ode_comparison_bound(&params, r.t)?,
        ));
    }
    out.extend(worst_row(
        "closure/u-comparison",
        comparison.into_iter(),
        1e-6,
    ));
    let y_star = c.m1 * c.m1 + tstar * c.m2;
    out.push(EstimateReport::at_most(
        "closure/comparison-doubling",
        ode_comparison_bound(&params, tstar)?,
        2.0 * y_star,
        1e-9,
    ));
    out.extend(worst_row(
        "closure/u-Hs+eps-integral",
        rows.iter().map(|r| {
            let y = c.m1 * c.m1 + r.t * c.m2;
            (
                r.t,
                r.int_u_h_spe_sq,
                c.c1.value * r.t * (2.0 * y).powf(p) + r.t * c.m2,
            )
        }),
        1e-6,
    ));
    out.extend(worst_row(
        "closure/u-Hs+1-integral",
        rows.iter()
            .map(|r| (r.t, r.int_u_h_sp1, tstar2_lhs(c, r.t))),
        1e-6,
    ));
    if c.c4.value > 0.0 {
        out.push(EstimateReport::at_most(
            "closure/existence-threshold",
            tstar2_lhs(c, tstar),
            4f64.ln() / (2.0 * c.c4.value),
            1e-9,
        ));
    }
    Ok(out)
}

/// Fits every constant, re-scans each fitted inequality, and checks the
/// energy balance, divergence, Grönwall bound, Young exponents and the
/// bootstrap closure on `[0, T*]`.
pub fn monitor_inequalities(
    series: &NormSeries,
    s: f64,
    eps: f64,
) -> Result<(ConstantFit, Vec<EstimateReport>)> {
    if series.s != s || series.eps != eps {
        return Err(invalid(
            "series",
            format!(
                "recorded (s, eps) = ({}, {}) differ from ({s}, {eps})",
                series.s, series.eps
            ),
        ));
    }
    let fitted = fit_constants(series)?;
    let c = &fitted.constants;
    let mut out = Vec::new();
    for f in &fitted.fits {
        let note = if f.t_at_max.is_nan() {
            format!("ensemble max over {} samples (never binding)", f.samples)
        } else {
            format!(
                "ensemble max over {} samples, binding at t = {:.6e}",
                f.samples, f.t_at_max
            )
        };
        out.push(
            EstimateReport::at_most_abs(
                format!("mhd/rescan/{}", f.name),
                f.worst_excess.max(-1.0),
                0.0,
                RESCAN_TOL,
            )
            .with_constant(f.value)
            .with_note(note),
        );
    }
    out.push(EstimateReport::at_most_abs(
        "mhd/energy-balance",
        series.energy_residual(),
        1e-6,
        0.0,
    ));
    out.push(EstimateReport::at_most_abs(
        "mhd/divergence",
        series.max_divergence(),
        1e-12,
        0.0,
    ));
    let b0 = c.b0_hs;
    let c4 = c.c4.value;
    out.extend(worst_row(
        "mhd/gronwall-B-Hs",
        series.rows.iter().map(|r| {
            (
                r.t,
                r.b_h_s.powi(2),
                b0 * b0 * (2.0 * c4 * r.int_grad_u_h_s).exp(),
            )
        }),
        1e-6,
    ));
    out.push(young_exponents_check(eps)?);
    out.push(EstimateReport::equal(
        "mhd/M2-formula",
        c.m2,
        c.m2_formula(),
        1e-12,
    ));
    match existence_time(c) {
        Ok(tstar) => {
            out.push(
                EstimateReport::at_most_abs(
                    "mhd/existence-time-positive",
                    f64::MIN_POSITIVE,
                    tstar,
                    0.0,
                )
                .with_note(format!("T* = {tstar:.6e}")),
            );
            out.extend(closure_checks(series, c, tstar)?);
        }
        Err(e) => out.push(
            EstimateReport::at_most_abs("mhd/existence-time-positive", f64::MIN_POSITIVE, 0.0, 0.0)
                .with_note(e.to_string()),
        ),
    }
    Ok((fitted, out))
}

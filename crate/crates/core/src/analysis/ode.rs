//! `Y' = c₁ Y^p + M₂`, `Y(0) = M₁²`, `p = (1+ε)/ε`, and its closed-form
//! comparison bound.

use ode_solvers::{Dop853, OutputType, System, Vector1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeParams {
    pub eps: f64,
    pub c1: f64,
    pub m1: f64,
    pub m2: f64,
    pub horizon: f64,
}

impl OdeParams {
    pub fn new(eps: f64, c1: f64, m1: f64, m2: f64, horizon: f64) -> Result<Self> {
        let p = Self {
            eps,
            c1,
            m1,
            m2,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid(
                "eps",
                format!("need 0 < eps < 1, got {}", self.eps),
            ));
        }
        for (name, v) in [("c1", self.c1), ("M1", self.m1), ("M2", self.m2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(
                    "ode",
                    format!("{name} must be finite and >= 0, got {v}"),
                ));
            }
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(invalid(
                "T",
                format!("must be finite and >= 0, got {}", self.horizon),
            ));
        }
        Ok(())
    }

    /// `p = (1+ε)/ε > 2`
    pub fn exponent(&self) -> f64 {
        (1.0 + self.eps) / self.eps
    }

    /// `1 - c₁ t (M₁² + t M₂)^{1/ε} / ε`
    pub fn bracket(&self, t: f64) -> f64 {
        let y0 = self.m1 * self.m1 + t * self.m2;
        1.0 - self.c1 * t * y0.powf(1.0 / self.eps) / self.eps
    }
}

/// `(M₁² + t M₂) (1 - c₁ t (M₁² + t M₂)^{1/ε} / ε)^{-ε}`.
///
/// With `M₂ = 0` this is the exact solution.
pub fn ode_comparison_bound(p: &OdeParams, t: f64) -> Result<f64> {
    p.validate()?;
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    let bracket = p.bracket(t);
    if !(bracket > 0.0) {
        return Err(Error::BeyondComparisonHorizon { t, bracket });
    }
    Ok((p.m1 * p.m1 + t * p.m2) * bracket.powf(-p.eps))
}

/// First zero of the bracket, where the comparison bound stops being
/// defined (`∞` when `c₁ = 0`). The bracket is strictly decreasing in `t`
/// otherwise, so bisection converges to machine precision.
pub fn comparison_horizon(p: &OdeParams) -> Result<f64> {
    p.validate()?;
    if p.c1 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mut hi = 1.0;
    while p.bracket(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(lo);
        }
        if p.bracket(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Values beyond this are treated as blow-up.
const BLOWUP_LEVEL: f64 = 1e100;

struct Riccati {
    c1: f64,
    p: f64,
    m2: f64,
}

impl System<f64, Vector1<f64>> for Riccati {
    fn system(&self, _t: f64, y: &Vector1<f64>, dy: &mut Vector1<f64>) {
        dy[0] = self.c1 * y[0].max(0.0).powf(self.p) + self.m2;
    }

    fn solout(&mut self, _t: f64, y: &Vector1<f64>, _dy: &Vector1<f64>) -> bool {
        !(y[0].is_finite() && y[0] < BLOWUP_LEVEL)
    }
}

/// Integrates the comparison ODE on `[0, T]` with an adaptive 8th-order
/// Dormand–Prince method; accepted steps are at most `dt` apart.
///
/// When the solution blows up before `T` the error carries the time reached
/// and the estimate `t + ε Y^{-1/ε} / c₁` of the blow-up time.
pub fn ode_integrate(p: &OdeParams, dt: f64) -> Result<OdeTrajectory> {
    p.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    let y0 = p.m1 * p.m1;
    if p.horizon == 0.0 {
        return Ok(OdeTrajectory {
            times: vec![0.0],
            values: vec![y0],
        });
    }
    let system = Riccati {
        c1: p.c1,
        p: p.exponent(),
        m2: p.m2,
    };
    let mut solver = Dop853::from_param(
        system,
        0.0,
        p.horizon,
        dt,
        Vector1::new(y0),
        1e-14,
        1e-14 * y0.max(1.0),
        0.9,
        0.0,
        0.333,
        6.0,
        dt,
        0.0,
        1_000_000,
        1000,
        OutputType::Sparse,
    );
    let status = solver.integrate();
    let times = solver.x_out().clone();
    let values: Vec<f64> = solver.y_out().iter().map(|y| y[0]).collect();
    let (&t_last, &y_last) = (times.last().unwrap_or(&0.0), values.last().unwrap_or(&y0));
    let estimate = |t: f64, y: f64| {
        if p.c1 > 0.0 && y > 0.0 {
            t + p.eps * y.powf(-1.0 / p.eps) / p.c1
        } else {
            f64::INFINITY
        }
    };
    match status {
        Ok(_) if t_last >= p.horizon && y_last.is_finite() && y_last < BLOWUP_LEVEL => {
            Ok(OdeTrajectory { times, values })
        }
        Ok(_) | Err(_) => {
            let (t, y) = times
                .iter()
                .zip(&values)
                .rev()
                .find(|(_, y)| y.is_finite())
                .map(|(t, y)| (*t, *y))
                .unwrap_or((0.0, y0));
            Err(Error::OdeBlowUp {
                reached: t,
                estimate: estimate(t, y),
            })
        }
    }
}

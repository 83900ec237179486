//! Viscous, non-resistive MHD: time integration with norm tracking, and the
//! monitors that fit and check every a-priori inequality of the local
//! existence argument along a run.

mod constants;
mod monitor;
mod presets;
mod series;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{lambda_symbol, sobolev_weight, VectorField, DIVERGENCE_TOLERANCE};

pub use constants::{MhdConstants, Provenance, Tagged};
pub use monitor::{closure_checks, fit_constants, monitor_inequalities, ConstantFit, FitRecord};
pub use presets::{preset, PRESETS};
pub use series::{NormRecord, NormSeries};
pub use solver::{mhd_step, MhdSolver, MhdState, STAGE_NODES, STAGE_WEIGHTS};

use solver::{from_comps, to_comps, Comps, Evaluation};

/// Safety factor of the CFL rule `dt <= factor · dx / max(|u|, |B|)`.
pub const CFL_FACTOR: f64 = 0.4;
/// A run stops once `‖B‖_{H^s}` exceeds this multiple of its initial value.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DtControl {
    /// Constant step (the last one is shortened to land on `T`).
    Fixed { dt: f64 },
    /// `dt = min(dt_max, factor · dx / max(|u|, |B|))`.
    Cfl { factor: f64, dt_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub s: f64,
    pub eps: f64,
    pub horizon: f64,
    pub dt: DtControl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunOutcome {
    Completed,
    BlowUp { t: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct MhdRun {
    pub series: NormSeries,
    pub state: MhdState,
    pub outcome: RunOutcome,
    pub steps: usize,
}

/// Checks `s > d/2` and `0 < ε < 1`.
pub fn check_regularity(dim: usize, s: f64, eps: f64) -> Result<()> {
    if !(s > dim as f64 / 2.0 && s.is_finite()) {
        return Err(invalid(
            "s",
            format!("need s > d/2 = {}, got {s}", dim as f64 / 2.0),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("need 0 < eps < 1, got {eps}")));
    }
    Ok(())
}

/// Squared-norm weights on the grid for every tracked quantity.
struct Weights {
    grad: Vec<f64>,
    sm1pe: Vec<f64>,
    spe: Vec<f64>,
    sp1: Vec<f64>,
    hs: Vec<f64>,
    grad_hs: Vec<f64>,
    force: Vec<f64>,
}

impl Weights {
    fn new(k2: &[f64], s: f64, eps: f64) -> Result<Self> {
        let table = |w: &dyn Fn(f64) -> f64| k2.iter().map(|&k| w(k)).collect::<Vec<f64>>();
        Ok(Self {
            grad: table(&|k| k),
            sm1pe: table(&sobolev_weight(s - 1.0 + eps)?),
            spe: table(&sobolev_weight(s + eps)?),
            sp1: table(&sobolev_weight(s + 1.0)?),
            hs: table(&sobolev_weight(s)?),
            grad_hs: table(&|k| lambda_symbol(k, 2.0 * (s + 1.0)) + k),
            force: table(&sobolev_weight(s - 1.0)?),
        })
    }
}

/// `V Σ_k w(k) Σ_c |ĉ(k)|²` for several weights at once (`None` = plain `L²`).
fn energies(comps: &Comps, weights: &[Option<&[f64]>], volume: f64) -> Vec<f64> {
    let mut acc = vec![0.0; weights.len()];
    for idx in 0..comps[0].len() {
        let a: f64 = comps.iter().map(|c| c[idx].norm_sqr()).sum();
        if a == 0.0 {
            continue;
        }
        for (slot, w) in acc.iter_mut().zip(weights) {
            *slot += a * w.map_or(1.0, |w| w[idx]);
        }
    }
    acc.iter().map(|v| v * volume).collect()
}

/// Instantaneous norms of one state (or stage).
#[derive(Debug, Clone, Copy)]
struct Snapshot {
    u_l2: f64,
    grad_u: f64,
    u_sm1pe: f64,
    u_spe: f64,
    u_sp1: f64,
    grad_u_hs: f64,
    b_l2: f64,
    b_hs: f64,
    f_hsm1: f64,
}

struct Runner {
    solver: MhdSolver,
    weights: Weights,
    volume: f64,
    r: f64,
}

impl Runner {
    fn snapshot(&self, u: &Comps, b: &Comps, ev: &Evaluation) -> Snapshot {
        let w = &self.weights;
        let eu = energies(
            u,
            &[
                None,
                Some(&w.grad),
                Some(&w.sm1pe),
                Some(&w.spe),
                Some(&w.sp1),
                Some(&w.grad_hs),
            ],
            self.volume,
        );
        let eb = energies(b, &[None, Some(&w.hs)], self.volume);
        let ef = energies(&ev.force, &[Some(&w.force)], self.volume);
        Snapshot {
            u_l2: eu[0].sqrt(),
            grad_u: eu[1].sqrt(),
            u_sm1pe: eu[2].sqrt(),
            u_spe: eu[3].sqrt(),
            u_sp1: eu[4].sqrt(),
            grad_u_hs: eu[5].sqrt(),
            b_l2: eb[0].sqrt(),
            b_hs: eb[1].sqrt(),
            f_hsm1: ef[0].sqrt(),
        }
    }

    /// Integrands of the running integrals, in column order.
    fn integrands(&self, q: &Snapshot) -> [f64; 6] {
        [
            q.grad_u * q.grad_u,
            q.u_spe * q.u_spe,
            q.u_sp1,
            q.grad_u_hs,
            q.b_hs.powf(2.0 * self.r),
            q.f_hsm1.powf(self.r),
        ]
    }

    fn divergence_residual(&self, comps: &Comps) -> f64 {
        let v = from_comps(*self.solver.grid(), comps.clone());
        v.divergence_residual()
    }
}

/// Self-convergence of three runs at `dt`, `dt/2`, `dt/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    /// `‖X_dt - X_{dt/2}‖`, `X = (u, B)` at the final time
    pub coarse_gap: f64,
    /// `‖X_{dt/2} - X_{dt/4}‖`
    pub fine_gap: f64,
    /// `log₂(coarse_gap / fine_gap)`
    pub order: f64,
}

/// Observed temporal order from the final states of three runs whose steps
/// halve successively.
pub fn observed_order(coarse: &MhdState, mid: &MhdState, fine: &MhdState) -> Result<OrderEstimate> {
    for st in [mid, fine] {
        if st.grid() != coarse.grid() {
            return Err(Error::GridMismatch);
        }
        if st.t != coarse.t {
            return Err(invalid(
                "order",
                format!("final times differ: {} vs {}", coarse.t, st.t),
            ));
        }
    }
    let gap = |a: &MhdState, b: &MhdState| a.u.sub(&b.u).l2_norm().hypot(a.b.sub(&b.b).l2_norm());
    let coarse_gap = gap(coarse, mid);
    let fine_gap = gap(mid, fine);
    Ok(OrderEstimate {
        coarse_gap,
        fine_gap,
        order: (coarse_gap / fine_gap).log2(),
    })
}

fn fixed_step_count(horizon: f64, dt: f64) -> usize {
    let ratio = horizon / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded.max(1.0) as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Integrates the MHD system from `(u₀, B₀)` to `T`, recording the norm
/// series at every accepted step.
///
/// Initial data are truncated to the 2/3 band. A run whose `‖B‖_{H^s}`
/// exceeds [`BLOWUP_FACTOR`] times its initial value, or whose state
/// stops being finite, ends early with [`RunOutcome::BlowUp`]; the series
/// up to that point is kept.
pub fn mhd_run(u0: &VectorField, b0: &VectorField, opts: &RunOptions) -> Result<MhdRun> {
    let grid = *u0.grid();
    if *b0.grid() != grid {
        return Err(Error::GridMismatch);
    }
    check_regularity(grid.dim(), opts.s, opts.eps)?;
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(invalid("T", format!("must be > 0, got {}", opts.horizon)));
    }
    match opts.dt {
        DtControl::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
            return Err(invalid("dt", format!("must be > 0, got {dt}")))
        }
        DtControl::Cfl { factor, dt_max }
            if !(factor > 0.0 && factor <= CFL_FACTOR && dt_max > 0.0) =>
        {
            return Err(invalid(
                "dt",
                format!("need 0 < factor <= {CFL_FACTOR} and dt_max > 0"),
            ))
        }
        _ => {}
    }
    for f in [u0, b0] {
        if f.len() != grid.dim() {
            return Err(invalid(
                "fields",
                format!("need {} components, got {}", grid.dim(), f.len()),
            ));
        }
        let residual = f.divergence_residual();
        if residual > DIVERGENCE_TOLERANCE {
            return Err(Error::NotDivergenceFree { residual });
        }
    }

    let solver = MhdSolver::new(grid);
    let weights = Weights::new(solver.k2(), opts.s, opts.eps)?;
    let runner = Runner {
        weights,
        volume: grid.volume(),
        r: (opts.s + opts.eps) / opts.s,
        solver,
    };
    let mut u = to_comps(&u0.dealiased());
    let mut b = to_comps(&b0.dealiased());
    runner.solver.project(&mut u);
    runner.solver.project(&mut b);

    let mut series = NormSeries::new(opts.s, opts.eps);
    let mut integrals = [0.0f64; 6];
    let mut t = 0.0;
    let mut dt_prev = 0.0;
    let mut steps = 0usize;
    let mut eval = runner.solver.evaluate(&u, &b);
    let fixed_count = match opts.dt {
        DtControl::Fixed { dt } => Some(fixed_step_count(opts.horizon, dt)),
        DtControl::Cfl { .. } => None,
    };
    let mut b0_hs = None;
    let outcome = loop {
        let q = runner.snapshot(&u, &b, &eval);
        let row = NormRecord {
            t,
            u_l2: q.u_l2,
            b_l2: q.b_l2,
            grad_u_l2: q.grad_u,
            u_h_sm1pe: q.u_sm1pe,
            u_h_spe: q.u_spe,
            u_h_sp1: q.u_sp1,
            b_h_s: q.b_hs,
            grad_u_h_s: q.grad_u_hs,
            int_grad_u_sq: integrals[0],
            int_u_h_spe_sq: integrals[1],
            int_u_h_sp1: integrals[2],
            int_grad_u_h_s: integrals[3],
            f_h_sm1: q.f_hsm1,
            int_b_h_s_pow: integrals[4],
            int_f_h_sm1_pow: integrals[5],
            div_u: runner.divergence_residual(&u),
            div_b: runner.divergence_residual(&b),
            dt: dt_prev,
        };
        series.rows.push(row);
        let b_start = *b0_hs.get_or_insert(q.b_hs);
        if !row.is_finite() {
            break RunOutcome::BlowUp {
                t,
                reason: "non-finite state".into(),
            };
        }
        if b_start > 0.0 && q.b_hs > BLOWUP_FACTOR * b_start {
            break RunOutcome::BlowUp {
                t,
                reason: format!("|B|_Hs grew beyond {BLOWUP_FACTOR:e} x initial"),
            };
        }
        let (h, t_next) = match (opts.dt, fixed_count) {
            (DtControl::Fixed { dt }, Some(count)) => {
                if steps >= count {
                    break RunOutcome::Completed;
                }
                let limit = runner.solver.cfl_limit(CFL_FACTOR, eval.vmax);
                if dt > limit {
                    return Err(Error::CflViolation { dt, limit });
                }
                let t_next = if steps + 1 == count {
                    opts.horizon
                } else {
                    (steps + 1) as f64 * dt
                };
                (t_next - t, t_next)
            }
            (DtControl::Cfl { factor, dt_max }, _) => {
                if t >= opts.horizon {
                    break RunOutcome::Completed;
                }
                let h = dt_max
                    .min(runner.solver.cfl_limit(factor, eval.vmax))
                    .min(opts.horizon - t);
                let t_next = if h == opts.horizon - t {
                    opts.horizon
                } else {
                    t + h
                };
                (h, t_next)
            }
            _ => unreachable!("fixed step count is set for fixed steps"),
        };
        let mut add = [0.0f64; 6];
        let (un, bn) = runner.solver.step_with(&u, &b, h, Some(eval), |stage| {
            let w = STAGE_WEIGHTS[stage.index];
            if w == 0.0 {
                return;
            }
            let q = runner.snapshot(stage.u, stage.b, stage.eval);
            for (a, g) in add.iter_mut().zip(runner.integrands(&q)) {
                *a += w * h * g;
            }
        });
        for (i, a) in integrals.iter_mut().zip(add) {
            *i += a;
        }
        u = un;
        b = bn;
        t = t_next;
        dt_prev = h;
        steps += 1;
        eval = runner.solver.evaluate(&u, &b);
    };
    let state = MhdState {
        u: from_comps(grid, u),
        b: from_comps(grid, b),
        t,
    };
    Ok(MhdRun {
        series,
        state,
        outcome,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    fn opts(horizon: f64, dt: f64) -> RunOptions {
        RunOptions {
            s: 2.0,
            eps: 0.5,
            horizon,
            dt: DtControl::Fixed { dt },
        }
    }

    #[test]
    fn zero_data_gives_zero_series() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let z = VectorField::zeros(g);
        let run = mhd_run(&z, &z, &opts(0.1, 0.02)).unwrap();
        assert_eq!(run.outcome, RunOutcome::Completed);
        assert_eq!(run.series.len(), 6);
        for r in &run.series.rows {
            assert_eq!(r.energy_budget(), 0.0);
            assert_eq!(r.int_u_h_sp1, 0.0);
        }
    }

    #[test]
    fn taylor_green_decays_exactly() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let (u0, b0) = preset("taylor-green-2d", g, 0).unwrap();
        let run = mhd_run(&u0, &b0, &opts(0.5, 0.01)).unwrap();
        let expect = u0.scaled((-2.0f64 * 0.5).exp());
        let err = run.state.u.sub(&expect).l2_norm() / expect.l2_norm();
        assert!(err < 1e-6, "relative error {err}");
        assert!(run.series.energy_residual() < 1e-6);
    }

    #[test]
    fn rejects_low_regularity_and_bad_eps() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let z = VectorField::zeros(g);
        let mut o = opts(0.1, 0.01);
        o.s = 1.0;
        assert!(mhd_run(&z, &z, &o).is_err());
        o.s = 2.0;
        o.eps = 1.0;
        assert!(mhd_run(&z, &z, &o).is_err());
    }

    #[test]
    fn fourth_order_self_convergence() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let (u0, b0) = preset("orszag-tang-2d", g, 0).unwrap();
        let finals: Vec<MhdState> = [0.01, 0.005, 0.0025]
            .iter()
            .map(|&dt| mhd_run(&u0, &b0, &opts(0.1, dt)).unwrap().state)
            .collect();
        let est = observed_order(&finals[0], &finals[1], &finals[2]).unwrap();
        assert!(est.order > 3.5, "{est:?}");
    }

    #[test]
    fn step_count_tolerates_rounding() {
        assert_eq!(fixed_step_count(0.5, 0.1), 5);
        assert_eq!(fixed_step_count(0.5, 0.004), 125);
        assert_eq!(fixed_step_count(0.5, 0.3), 2);
    }
}

//! One runner per experiment kind.

use std::f64::consts::E;
use std::fs::File;

use anyhow::{bail, Context, Result};
use mhdlab::analysis::{
    comparison_horizon, existence_time, ode_comparison_bound, ode_integrate, OdeParams,
};
use mhdlab::heat::counterexample::{
    counterexample_divergence_scan, harmonic_log_sum, lower_bound_chain,
};
use mhdlab::heat::{default_time_rule, semigroup_exactness, verify_smoothing};
use mhdlab::maxreg::{maxreg_ratio, random_forcing, stokes_ic_estimate, StokesReport};
use mhdlab::mhd::{
    mhd_run, monitor_inequalities, observed_order, preset, DtControl, MhdRun, NormSeries,
    RunOptions, RunOutcome,
};
use mhdlab::random::{random_real_field, random_vector_field};
use mhdlab::{EstimateReport, Grid};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::*;
use crate::output::{worst_by_name, Outcome, RunReport, Table, REPORT_FILE};

/// Seed of the `i`-th ensemble member.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// Runs the configured experiment; nothing is written to disk.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match &cfg.experiment {
        Experiment::HeatVerify(c) => heat_verify(cfg, c),
        Experiment::Counterexample(c) => counterexample(cfg, c),
        Experiment::MaxregVerify(c) => maxreg_verify(cfg, c),
        Experiment::StokesVerify(c) => stokes_verify(cfg, c),
        Experiment::MhdRun(c) => mhd(cfg, c),
        Experiment::OdeBound(c) => ode_bound(cfg, c),
        Experiment::ConstantsFit(c) => constants_fit(cfg, c),
        Experiment::Report(c) => report(cfg, c),
    }
}

#[derive(Serialize)]
struct HeatRow {
    sample: usize,
    seed: u64,
    sup_hs: f64,
    int_hs1: f64,
    int_weighted: f64,
    int_lq: f64,
    bound: f64,
    lq_bound: f64,
    energy_lhs: f64,
    energy_rhs: f64,
}

fn heat_verify(cfg: &ExperimentConfig, c: &HeatConfig) -> Result<Outcome> {
    let grid = Grid::new(c.dim, c.n, c.length)?;
    let rule = default_time_rule(c.horizon);
    let shape = c.spectrum.shape();
    let reports = (0..c.samples)
        .into_par_iter()
        .map(|i| {
            let u0 = random_real_field(grid, sample_seed(cfg.seed, i), shape);
            verify_smoothing(&u0, c.s, c.horizon, c.q, &rule)
        })
        .collect::<mhdlab::Result<Vec<_>>>()?;

    let probe = random_real_field(grid, cfg.seed, shape);
    let mut checks = semigroup_exactness(&probe, c.exact_t, c.exact_tau, c.exactness_tol)?;
    checks.extend(worst_by_name(
        reports
            .iter()
            .map(|r| r.checks_split(c.bound_tol, c.identity_tol))
            .collect(),
        "samples",
    ));

    let rows: Vec<HeatRow> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| HeatRow {
            sample: i,
            seed: sample_seed(cfg.seed, i),
            sup_hs: r.sup_hs,
            int_hs1: r.int_hs1,
            int_weighted: r.int_weighted,
            int_lq: r.int_lq,
            bound: r.bound,
            lq_bound: r.lq_bound,
            energy_lhs: r.energy_lhs,
            energy_rhs: r.energy_rhs,
        })
        .collect();
    let data = json!({
        "cq": reports.first().map(|r| r.cq),
        "quadrature_nodes": rule.nodes.len(),
    });
    Ok(Outcome::new(
        cfg,
        checks,
        data,
        vec![Table::from_rows("heat_samples.csv", &rows)?],
    ))
}

/// `Σ_{j=j₀}^{N} 1/((j+1) log(2+j))` with every term accumulated exactly in
/// 128-bit fixed point, so the only rounding is in the terms and the final
/// conversion.
pub fn exact_term_sum(j0: u64, n: u64) -> f64 {
    const SHIFT: i32 = 100;
    let scale = 2f64.powi(SHIFT);
    let mut acc: u128 = 0;
    for j in j0..=n {
        let x = 1.0 / ((j as f64 + 1.0) * (j as f64 + 2.0).ln());
        // x < 1 carries at most 53 significant bits above 2^-SHIFT for the
        // term sizes here, so the scaled value is an integer
        acc += (x * scale) as u128;
    }
    acc as f64 / scale
}

#[derive(Serialize)]
struct ChainCsvRow {
    j: u64,
    full: f64,
    restricted: f64,
    frozen: f64,
    interval: f64,
    shell: f64,
    margin_truncate: f64,
    margin_freeze: f64,
    margin_interval: f64,
    margin_shell: f64,
    sharp_exp_factor: f64,
    sharp_shell_factor: f64,
}

const CHAIN_STEPS: [&str; 4] = ["truncate", "freeze", "interval", "shell"];

fn counterexample(cfg: &ExperimentConfig, c: &CounterexampleConfig) -> Result<Outcome> {
    let scan = counterexample_divergence_scan(c.dim, c.horizon, &c.t_mins)?;
    let chain = lower_bound_chain(c.dim, c.horizon, c.chain_max)?;
    let mut checks = Vec::new();

    let (first, last) = (&scan.rows[0], &scan.rows[scan.rows.len() - 1]);
    let required = c.growth_factor * E.recip() * scan.shell_constant;
    checks.push(
        EstimateReport::at_most_abs(
            "counterexample/growth",
            required,
            last.integral - first.integral,
            0.0,
        )
        .with_note(format!(
            "I({:e}) - I({:e}) against {} e^-1 c_shell",
            last.t_min, first.t_min, c.growth_factor
        )),
    );
    let steps: Vec<EstimateReport> = scan
        .rows
        .windows(2)
        .map(|w| {
            EstimateReport::at_most_abs(
                "counterexample/monotone",
                w[0].integral,
                w[1].integral,
                0.0,
            )
            .with_note(format!("t_min {:e} -> {:e}", w[0].t_min, w[1].t_min))
        })
        .collect();
    checks.extend(crate::output::worst_of(steps, "refinements"));
    let lower: Vec<EstimateReport> = scan
        .rows
        .iter()
        .map(|r| {
            EstimateReport::at_most(
                "counterexample/slice-lower-bound",
                r.lower_bound,
                r.integral,
                0.0,
            )
            .with_note(format!("t_min {:e}", r.t_min))
        })
        .collect();
    checks.extend(crate::output::worst_of(lower, "lower limits"));

    for (k, name) in CHAIN_STEPS.iter().enumerate() {
        let reps: Vec<EstimateReport> = chain
            .iter()
            .map(|row| {
                let sides = [
                    (row.restricted, row.full),
                    (row.frozen, row.restricted),
                    (row.interval, row.frozen),
                    (row.shell, row.interval),
                ];
                let (lo, hi) = sides[k];
                EstimateReport::at_most_abs(format!("counterexample/chain-{name}"), lo, hi, 0.0)
                    .with_note(format!("j = {}", row.j))
            })
            .collect();
        checks.extend(crate::output::worst_of(reps, "slices"));
    }

    let mut sums = Vec::new();
    for &n in &c.sum_points {
        let fast = harmonic_log_sum(scan.j0, n);
        let direct = exact_term_sum(scan.j0, n);
        checks.push(EstimateReport::equal(
            format!("counterexample/partial-sum-{n}"),
            fast,
            direct,
            c.sum_tol,
        ));
        sums.push(json!({"n": n, "compensated": fast, "direct": direct}));
    }

    let chain_rows: Vec<ChainCsvRow> = chain
        .iter()
        .map(|r| {
            let m = r.margins();
            ChainCsvRow {
                j: r.j,
                full: r.full,
                restricted: r.restricted,
                frozen: r.frozen,
                interval: r.interval,
                shell: r.shell,
                margin_truncate: m[0],
                margin_freeze: m[1],
                margin_interval: m[2],
                margin_shell: m[3],
                sharp_exp_factor: r.sharp_exp_factor,
                sharp_shell_factor: r.sharp_shell_factor,
            }
        })
        .collect();
    let data = json!({
        "j0": scan.j0,
        "shell_constant": scan.shell_constant,
        "required_growth": required,
        "partial_sums": sums,
    });
    Ok(Outcome::new(
        cfg,
        checks,
        data,
        vec![
            Table::from_rows("scan.csv", &scan.rows)?,
            Table::from_rows("chain.csv", &chain_rows)?,
        ],
    ))
}

#[derive(Serialize)]
struct MaxregRow {
    sample: usize,
    seed: u64,
    lhs: f64,
    rhs: f64,
    rhs_homogeneous: f64,
    ratio: f64,
    homogeneous_ratio: f64,
    l2_ratio: f64,
    l2_bound: f64,
}

fn maxreg_verify(cfg: &ExperimentConfig, c: &MaxregConfig) -> Result<Outcome> {
    let grid = Grid::new(c.dim, c.n, c.length)?;
    let shape = c.spectrum.shape();
    let reports = (0..c.samples)
        .into_par_iter()
        .map(|i| {
            let f = random_forcing(
                grid,
                sample_seed(cfg.seed, i),
                c.horizon,
                c.segments,
                shape,
                c.divergence_free,
            )?;
            maxreg_ratio(&f, c.s, c.r)
        })
        .collect::<mhdlab::Result<Vec<_>>>()?;
    let checks = worst_by_name(
        reports.iter().map(|r| r.checks(c.tol)).collect(),
        "forcings",
    );
    let rows: Vec<MaxregRow> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| MaxregRow {
            sample: i,
            seed: sample_seed(cfg.seed, i),
            lhs: r.lhs,
            rhs: r.rhs,
            rhs_homogeneous: r.rhs_homogeneous,
            ratio: r.ratio,
            homogeneous_ratio: r.homogeneous_ratio,
            l2_ratio: r.l2_inhom,
            l2_bound: r.l2_bound,
        })
        .collect();
    let max_of = |get: fn(&MaxregRow) -> f64| rows.iter().map(get).fold(0.0, f64::max);
    let data = json!({
        "max_ratio": max_of(|r| r.ratio),
        "max_homogeneous_ratio": max_of(|r| r.homogeneous_ratio),
        "max_l2_ratio": max_of(|r| r.l2_ratio),
    });
    Ok(Outcome::new(
        cfg,
        checks,
        data,
        vec![Table::from_rows("maxreg_samples.csv", &rows)?],
    ))
}

#[derive(Serialize)]
struct StokesRow {
    n: usize,
    sample: usize,
    lhs: f64,
    heat_part: f64,
    forced_part: f64,
    initial_norm: f64,
    forcing_norm: f64,
    empirical_c_eps: f64,
    empirical_c_r: f64,
    fitted_bound: f64,
}

/// Forcing seeds are offset from the initial-data seeds so the two draws
/// are independent.
const FORCING_SEED_OFFSET: u64 = 0x5151_5151;

fn stokes_verify(cfg: &ExperimentConfig, c: &StokesConfig) -> Result<Outcome> {
    let r = c.exponent();
    let shape = c.spectrum.shape();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut fitted = Vec::new();
    for &n in &c.resolutions {
        let grid = Grid::new(c.dim, n, c.length)?;
        let reports: Vec<StokesReport> = (0..c.samples)
            .into_par_iter()
            .map(|i| {
                let seed = sample_seed(cfg.seed, i);
                let u0 = random_vector_field(grid, seed, shape, true);
                let f = random_forcing(
                    grid,
                    seed.wrapping_add(FORCING_SEED_OFFSET),
                    c.horizon,
                    c.segments,
                    shape,
                    false,
                )?;
                stokes_ic_estimate(&u0, &f, c.s, c.eps, r)
            })
            .collect::<mhdlab::Result<Vec<_>>>()?;
        let c_eps = reports
            .iter()
            .map(|x| x.empirical_c_eps)
            .fold(0.0, f64::max);
        let c_r = reports.iter().map(|x| x.empirical_c_r).fold(0.0, f64::max);
        let mut per_sample = Vec::new();
        for (i, rep) in reports.iter().enumerate() {
            let bound = rep.combined_bound(c_eps, c_r);
            let mut list = rep.checks(c.tol);
            list.push(
                EstimateReport::at_most("stokes/fitted-bound", rep.lhs, bound, c.tol)
                    .with_note(format!("C_eps = {c_eps:.6e}, C_r = {c_r:.6e}")),
            );
            per_sample.push(list);
            rows.push(StokesRow {
                n,
                sample: i,
                lhs: rep.lhs,
                heat_part: rep.heat_part,
                forced_part: rep.forced_part,
                initial_norm: rep.initial_norm,
                forcing_norm: rep.forcing_norm,
                empirical_c_eps: rep.empirical_c_eps,
                empirical_c_r: rep.empirical_c_r,
                fitted_bound: bound,
            });
        }
        for mut rep in worst_by_name(per_sample, "samples") {
            rep.check = format!("{}@n{n}", rep.check);
            checks.push(rep);
        }
        fitted.push(json!({
            "n": n,
            "c_eps": c_eps,
            "c_r": c_r,
            "proof_c_eps": reports.first().map(|x| x.proof_c_eps),
        }));
    }
    for pair in fitted.windows(2) {
        let (n0, n1) = (&pair[0]["n"], &pair[1]["n"]);
        for key in ["c_eps", "c_r"] {
            let a = pair[0][key].as_f64().unwrap_or(f64::NAN);
            let b = pair[1][key].as_f64().unwrap_or(f64::NAN);
            let change = if a > 0.0 {
                (b / a - 1.0).abs()
            } else {
                f64::INFINITY
            };
            checks.push(
                EstimateReport::at_most_abs(
                    format!("stokes/refinement-{key}"),
                    change,
                    c.stability_tol,
                    0.0,
                )
                .with_note(format!("n = {n0} -> {n1}: {a:.6e} -> {b:.6e}")),
            );
        }
    }
    let data = json!({ "r": r, "fitted": fitted });
    Ok(Outcome::new(
        cfg,
        checks,
        data,
        vec![Table::from_rows("stokes_samples.csv", &rows)?],
    ))
}

#[derive(Serialize)]
struct OrderRow {
    dt: f64,
    steps: usize,
    final_t: f64,
    energy_residual: f64,
    max_divergence: f64,
}

fn run_status(run: &MhdRun) -> serde_json::Value {
    serde_json::to_value(&run.outcome).unwrap_or(serde_json::Value::Null)
}

fn mhd(cfg: &ExperimentConfig, c: &MhdConfig) -> Result<Outcome> {
    let grid = Grid::new(c.dim, c.n, c.length)?;
    let (u0, b0) = preset(&c.preset, grid, cfg.seed)?;
    let opts = |dt: DtControl| RunOptions {
        s: c.s,
        eps: c.eps,
        horizon: c.horizon,
        dt,
    };
    let runs: Vec<MhdRun> = match (c.order_study, c.dt) {
        (true, DtControl::Fixed { dt }) => [dt, dt / 2.0, dt / 4.0]
            .into_par_iter()
            .map(|h| mhd_run(&u0, &b0, &opts(DtControl::Fixed { dt: h })))
            .collect::<mhdlab::Result<Vec<_>>>()?,
        _ => vec![mhd_run(&u0, &b0, &opts(c.dt))?],
    };
    let main = &runs[0];
    let reached = match &main.outcome {
        RunOutcome::Completed => main.state.t,
        RunOutcome::BlowUp { t, .. } => *t,
    };
    let mut checks = vec![EstimateReport::at_most_abs(
        "mhd/completed",
        c.horizon,
        reached,
        0.0,
    )];
    let (fit, monitor) = monitor_inequalities(&main.series, c.s, c.eps)?;
    checks.extend(monitor);
    let mut order = serde_json::Value::Null;
    if runs.len() == 3 {
        let all_done = runs.iter().all(|r| r.outcome == RunOutcome::Completed);
        if !all_done {
            bail!("order study: a refined run did not reach T");
        }
        let est = observed_order(&runs[0].state, &runs[1].state, &runs[2].state)?;
        checks.push(
            EstimateReport::at_most_abs("mhd/temporal-order", c.min_order, est.order, 0.0)
                .with_note(format!("gaps {:.3e}, {:.3e}", est.coarse_gap, est.fine_gap)),
        );
        order = serde_json::to_value(est)?;
    }
    let tstar = existence_time(&fit.constants).ok();
    let order_rows: Vec<OrderRow> = runs
        .iter()
        .map(|r| OrderRow {
            dt: r.series.rows.get(1).map_or(0.0, |x| x.dt),
            steps: r.steps,
            final_t: r.state.t,
            energy_residual: r.series.energy_residual(),
            max_divergence: r.series.max_divergence(),
        })
        .collect();
    let mut series_csv = Vec::new();
    main.series.write_csv(&mut series_csv)?;
    let data = json!({
        "status": run_status(main),
        "steps": main.steps,
        "tstar": tstar,
        "fit": fit,
        "order": order,
    });
    Ok(Outcome::new(
        cfg,
        checks,
        data,
        vec![
            Table {
                file: "series.csv".into(),
                bytes: series_csv,
            },
            Table::from_rows("runs.csv", &order_rows)?,
        ],
    ))
}

fn constants_fit(cfg: &ExperimentConfig, c: &ConstantsFitConfig) -> Result<Outcome> {
    let file =
        File::open(&c.series).with_context(|| format!("opening series {}", c.series.display()))?;
    let series = NormSeries::read_csv(file, c.s, c.eps)?;
    let (fit, checks) = monitor_inequalities(&series, c.s, c.eps)?;
    let tstar = existence_time(&fit.constants).ok();
    let data = json!({ "tstar": tstar, "fit": fit });
    Ok(Outcome::new(
        cfg,
        checks,
        data,
        vec![Table::from_rows("fits.csv", &fit.fits)?],
    ))
}

#[derive(Serialize)]
struct OdeRow {
    eps: f64,
    c1: f64,
    m1: f64,
    m2: f64,
    horizon: f64,
    steps: usize,
    final_value: f64,
    final_bound: f64,
    max_relative_excess: f64,
}

fn ode_bound(cfg: &ExperimentConfig, c: &OdeConfig) -> Result<Outcome> {
    let mut grid = Vec::new();
    for &eps in &c.eps {
        for &c1 in &c.c1 {
            for &m1 in &c.m1 {
                for &m2 in &c.m2 {
                    grid.push((eps, c1, m1, m2));
                }
            }
        }
    }
    let results = grid
        .par_iter()
        .map(
            |&(eps, c1, m1, m2)| -> Result<(OdeRow, Vec<EstimateReport>)> {
                let probe = OdeParams::new(eps, c1, m1, m2, 0.0)?;
                let horizon = (c.horizon_fraction * comparison_horizon(&probe)?).min(c.max_horizon);
                let p = OdeParams::new(eps, c1, m1, m2, horizon)?;
                let traj = ode_integrate(&p, c.dt)?;
                let label = format!("eps={eps} c1={c1} M1={m1} M2={m2}");
                let mut below = Vec::new();
                let mut equal = Vec::new();
                let mut max_excess = f64::NEG_INFINITY;
                for (&t, &y) in traj.times.iter().zip(&traj.values) {
                    let b = ode_comparison_bound(&p, t)?;
                    let scale = y.abs().max(b.abs());
                    if scale > 0.0 {
                        max_excess = max_excess.max((y - b) / scale);
                    }
                    below.push(
                        EstimateReport::at_most("ode/below-bound", y, b, c.bound_tol)
                            .with_note(format!("{label} t={t:e}")),
                    );
                    if m2 == 0.0 {
                        equal.push(
                            EstimateReport::equal("ode/equality-M2-0", y, b, c.equality_tol)
                                .with_note(format!("{label} t={t:e}")),
                        );
                    }
                }
                let mut reps: Vec<EstimateReport> = crate::output::worst_of(below, "times")
                    .into_iter()
                    .collect();
                reps.extend(crate::output::worst_of(equal, "times"));
                let last = traj.times.len() - 1;
                let row = OdeRow {
                    eps,
                    c1,
                    m1,
                    m2,
                    horizon,
                    steps: last,
                    final_value: traj.values[last],
                    final_bound: ode_comparison_bound(&p, traj.times[last])?,
                    max_relative_excess: max_excess,
                };
                Ok((row, reps))
            },
        )
        .collect::<Result<Vec<_>>>()?;
    let (rows, per_point): (Vec<OdeRow>, Vec<Vec<EstimateReport>>) = results.into_iter().unzip();
    let checks = worst_by_name(per_point, "grid points");
    let data = json!({ "grid_points": rows.len() });
    Ok(Outcome::new(
        cfg,
        checks,
        data,
        vec![Table::from_rows("ode_grid.csv", &rows)?],
    ))
}

fn report(cfg: &ExperimentConfig, c: &ReportConfig) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut sources = Vec::new();
    for input in &c.inputs {
        let path = if input.is_dir() {
            input.join(REPORT_FILE)
        } else {
            input.clone()
        };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let rep: RunReport =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for mut ch in rep.checks {
            ch.check = format!("{}:{}", rep.kind, ch.check);
            checks.push(ch);
        }
        sources.push(json!({
            "path": path.display().to_string(),
            "kind": rep.kind,
            "passed": rep.passed,
        }));
    }
    Ok(Outcome::new(
        cfg,
        checks,
        json!({ "sources": sources }),
        vec![],
    ))
}

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{anyhow, ensure, Context, Result};
use mhdlab::heat::semigroup_exactness;
use mhdlab::mhd::NormSeries;
use mhdlab::random::{random_real_field, SpectrumShape};
use mhdlab::{Grid, SpectralField};
use mhdlab_cli::config::*;
use mhdlab_cli::{run_experiment, ExperimentConfig, Outcome};
use num_complex::Complex64;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        passed,
        detail: detail.into(),
    })
}

fn config(dir: &Path, seed: u64, experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        output_dir: dir.join(experiment.kind()),
        seed,
        experiment,
    }
}

/// Every named check must be present and passing; returns a compact listing.
fn require(out: &Outcome, names: &[&str]) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let c = out
            .check(name)
            .ok_or_else(|| anyhow!("check {name} missing from report"))?;
        ok &= c.passed;
        parts.push(format!("{name} {:.3e}/{:.3e}", c.lhs, c.rhs));
    }
    Ok((ok, parts.join(", ")))
}

fn failed_checks(out: &Outcome) -> Vec<String> {
    out.report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.check.clone())
        .collect()
}

fn heat_exactness() -> Result<Verdict> {
    let grid = Grid::new(2, 64, 1.0)?;
    let mut worst = 0.0f64;
    let mut fields = Vec::new();
    for m in [[1i64, 0], [0, 3], [5, -2], [-7, 4], [10, 10]] {
        fields.push(SpectralField::single_mode(
            grid,
            &m,
            Complex64::new(0.7, -0.2),
            true,
        )?);
    }
    fields.push(random_real_field(grid, 99, SpectrumShape::smooth()));
    for f in &fields {
        for (t, tau) in [(0.01, 0.02), (0.3, 0.2), (0.5, 0.5)] {
            for rep in semigroup_exactness(f, t, tau, 1e-14)? {
                ensure!(rep.passed, "{}", rep.summary_line());
                worst = worst.max(rep.lhs);
            }
        }
        // independent oracle on the unit mode: the coefficient after t is e^{-t}
        if let Some(a) = f.coeff(&[1, 0]).filter(|a| a.norm() > 0.0) {
            let b = mhdlab::heat::heat_evolve(f, 0.25)?.coeff(&[1, 0]).unwrap();
            let dev = ((b / a).re - (-0.25f64).exp()).abs() / (-0.25f64).exp();
            ensure!(dev <= 1e-14, "unit mode decay off by {dev:e}");
            worst = worst.max(dev);
        }
    }
    verdict(
        true,
        format!("worst relative deviation {worst:.2e} <= 1e-14"),
    )
}

fn heat_suite(dir: &Path) -> Result<Verdict> {
    let c = HeatConfig::default();
    ensure!(c.dim == 2 && c.n == 128 && c.samples == 50);
    ensure!(c.bound_tol == 1e-6 && c.identity_tol == 1e-8);
    let out = run_experiment(&config(dir, 2024, Experiment::HeatVerify(c)))?;
    let (ok, text) = require(
        &out,
        &[
            "heat/sup-Hs",
            "heat/L2-Hs+1",
            "heat/weighted-Hs+2",
            "heat/Lq-Hs+2",
            "heat/energy-identity",
        ],
    )?;
    verdict(ok && out.passed(), text)
}

fn counterexample(dir: &Path) -> Result<Verdict> {
    let c = CounterexampleConfig::default();
    ensure!(c.dim == 2 && c.chain_max == 50 && c.growth_factor == 0.2);
    ensure!(c.t_mins.first() == Some(&1e-3) && c.t_mins.last() == Some(&1e-9));
    ensure!(c.sum_points == [1_000, 1_000_000] && c.sum_tol == 1e-12);
    let out = run_experiment(&config(dir, 0, Experiment::Counterexample(c)))?;
    let (ok, text) = require(
        &out,
        &[
            "counterexample/growth",
            "counterexample/chain-truncate",
            "counterexample/chain-freeze",
            "counterexample/chain-interval",
            "counterexample/chain-shell",
            "counterexample/partial-sum-1000",
            "counterexample/partial-sum-1000000",
        ],
    )?;
    verdict(ok && out.passed(), text)
}

fn maxreg(dir: &Path) -> Result<Verdict> {
    let c = MaxregConfig::default();
    ensure!(c.r == 2.0 && c.samples == 100 && c.tol == 1e-6);
    let out = run_experiment(&config(dir, 17, Experiment::MaxregVerify(c)))?;
    let (ok, text) = require(&out, &["maxreg/L2-homogeneous", "maxreg/L2L2"])?;
    verdict(ok && out.passed(), text)
}

fn stokes(dir: &Path) -> Result<Verdict> {
    let c = StokesConfig::default();
    ensure!(c.dim == 2 && c.s == 1.5 && c.eps == 0.5 && c.r.is_none());
    ensure!(c.resolutions == [128, 256] && c.stability_tol == 0.2);
    let out = run_experiment(&config(dir, 31, Experiment::StokesVerify(c)))?;
    let (ok, text) = require(
        &out,
        &[
            "stokes/fitted-bound@n128",
            "stokes/fitted-bound@n256",
            "stokes/refinement-c_eps",
            "stokes/refinement-c_r",
        ],
    )?;
    verdict(ok && out.passed(), text)
}

fn mhd(dir: &Path) -> Result<(Verdict, Outcome)> {
    let c = MhdConfig::default();
    ensure!(c.dim == 2 && c.n == 256 && c.s == 2.0 && c.eps == 0.5 && c.horizon == 0.5);
    ensure!(c.order_study && c.min_order == 3.0);
    let out = run_experiment(&config(dir, 0, Experiment::MhdRun(c)))?;
    let (ok, text) = require(
        &out,
        &[
            "mhd/completed",
            "mhd/energy-balance",
            "mhd/divergence",
            "mhd/temporal-order",
        ],
    )?;
    let failed = failed_checks(&out);
    let detail = if failed.is_empty() {
        text
    } else {
        format!("{text}; failing: {failed:?}")
    };
    Ok((
        Verdict {
            passed: ok && out.passed(),
            detail,
        },
        out,
    ))
}

fn closure(run: Option<&Outcome>) -> Result<Verdict> {
    let out = run.context("criterion 6 produced no run")?;
    let (ok, _) = require(
        out,
        &["mhd/existence-time-positive", "closure/B-Hs-doubling"],
    )?;
    let tstar = out.report.data["tstar"]
        .as_f64()
        .context("no existence time in the report")?;
    // recheck the doubling bound straight from the recorded CSV
    let table = out.table("series.csv").context("series.csv missing")?;
    let series = NormSeries::read_csv(table.bytes.as_slice(), 2.0, 0.5)?;
    let b0 = series.first().context("empty series")?.b_h_s;
    let peak = series
        .up_to(tstar)
        .map(|r| r.b_h_s)
        .fold(f64::NEG_INFINITY, f64::max);
    let direct = tstar > 0.0 && peak <= 2.0 * b0;
    verdict(
        ok && direct,
        format!(
            "T* = {tstar:.6e}, max ||B||_Hs on [0,T*] = {peak:.4e} vs 2 B0 = {:.4e}",
            2.0 * b0
        ),
    )
}

fn ode(dir: &Path) -> Result<Verdict> {
    let c = OdeConfig::default();
    let points = c.eps.len() * c.c1.len() * c.m1.len() * c.m2.len();
    ensure!(points == 81, "grid has {points} points");
    ensure!(c.m2.contains(&0.0) && c.bound_tol == 1e-8 && c.equality_tol == 1e-10);
    let out = run_experiment(&config(dir, 0, Experiment::OdeBound(c)))?;
    let (ok, _) = require(&out, &["ode/below-bound", "ode/equality-M2-0"])?;
    let table = out.table("ode_grid.csv").context("ode_grid.csv missing")?;
    let mut rd = csv::Reader::from_reader(table.bytes.as_slice());
    let col = rd
        .headers()?
        .iter()
        .position(|h| h == "max_relative_excess")
        .context("no excess column")?;
    let mut worst = f64::NEG_INFINITY;
    let mut rows = 0;
    for rec in rd.records() {
        worst = worst.max(rec?[col].parse::<f64>()?);
        rows += 1;
    }
    verdict(
        ok && out.passed() && rows == 81,
        format!("{rows} grid points, worst relative excess {worst:.2e}"),
    )
}

fn write_config(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn csv_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            out.push((name, std::fs::read(&path)?));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism(dir: &Path) -> Result<Verdict> {
    let exe = env!("CARGO_BIN_EXE_mhdlab");
    let cases = [
        (
            "heat-verify",
            "[experiment]\nkind = \"heat-verify\"\nn = 64\nsamples = 12\n",
        ),
        (
            "mhd-run",
            "[experiment]\nkind = \"mhd-run\"\nn = 64\nhorizon = 0.1\norder_study = false\ndt = { mode = \"cfl\", factor = 0.4, dt_max = 0.01 }\n",
        ),
        ("stokes-verify", "[experiment]\nkind = \"stokes-verify\"\nresolutions = [32, 64]\nsamples = 6\nspectrum = { k_max = 6.0, slope = 2.0 }\n"),
    ];
    let mut compared = 0;
    for (kind, body) in cases {
        let mut runs = Vec::new();
        for (rep, jobs) in [(0, "1"), (1, "4")] {
            let out = dir.join(format!("{kind}-{rep}"));
            let cfg = dir.join(format!("{kind}-{rep}.toml"));
            write_config(
                &cfg,
                &format!(
                    "output_dir = {:?}\nseed = 5\n{body}",
                    out.display().to_string()
                ),
            )?;
            let status = Command::new(exe)
                .args([kind, "--config"])
                .arg(&cfg)
                .args(["--jobs", jobs])
                .output()?;
            ensure!(
                status.status.code() == Some(0),
                "{kind} exited with {:?}: {}",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr)
            );
            runs.push(csv_files(&out)?);
        }
        ensure!(!runs[0].is_empty(), "{kind} wrote no CSV");
        if runs[0] != runs[1] {
            return verdict(false, format!("{kind}: CSV output differs between reruns"));
        }
        compared += runs[0].len();
    }
    verdict(
        true,
        format!("{compared} CSV files bit-identical across reruns (1 vs 4 threads)"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let mut all = true;
    let mut report =
        |id: usize, name: &str, limit: Option<Duration>, res: Result<Verdict>, took: Duration| {
            let (passed, detail) = match res {
                Ok(v) => (v.passed, v.detail),
                Err(e) => (false, format!("error: {e:#}")),
            };
            let in_time = limit.is_none_or(|l| took <= l);
            let passed = passed && in_time;
            all &= passed;
            let budget = limit.map_or("shared".to_string(), |l| format!("limit {}s", l.as_secs()));
            println!(
                "criterion {id} {}: {name}: {detail} [{:.2}s, {budget}]",
                if passed { "PASS" } else { "FAIL" },
                took.as_secs_f64()
            );
        };
    let timed = |f: &dyn Fn() -> Result<Verdict>| {
        let t = Instant::now();
        let r = f();
        (r, t.elapsed())
    };

    let (r, t) = timed(&heat_exactness);
    report(
        1,
        "heat semigroup exactness",
        Some(Duration::from_secs(1)),
        r,
        t,
    );
    let (r, t) = timed(&|| heat_suite(dir));
    report(
        2,
        "heat smoothing suite",
        Some(Duration::from_secs(60)),
        r,
        t,
    );
    let (r, t) = timed(&|| counterexample(dir));
    report(
        3,
        "counterexample divergence",
        Some(Duration::from_secs(60)),
        r,
        t,
    );
    let (r, t) = timed(&|| maxreg(dir));
    report(
        4,
        "maximal regularity at r = 2",
        Some(Duration::from_secs(120)),
        r,
        t,
    );
    let (r, t) = timed(&|| stokes(dir));
    report(
        5,
        "Stokes estimate with fitted constants",
        Some(Duration::from_secs(300)),
        r,
        t,
    );

    let start = Instant::now();
    let (r, run) = match mhd(dir) {
        Ok((v, out)) => (Ok(v), Some(out)),
        Err(e) => (Err(e), None),
    };
    let took = start.elapsed();
    report(6, "MHD run", Some(Duration::from_secs(600)), r, took);
    let (r, t) = timed(&|| closure(run.as_ref()));
    report(7, "existence-time closure", None, r, t);

    let (r, t) = timed(&|| ode(dir));
    report(
        8,
        "ODE comparison grid",
        Some(Duration::from_secs(30)),
        r,
        t,
    );
    let (r, t) = timed(&|| determinism(dir));
    report(9, "determinism", None, r, t);

    if !all {
        std::process::exit(1);
    }
}

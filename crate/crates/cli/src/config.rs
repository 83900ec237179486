//! Experiment configuration files (TOML) and their validation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mhdlab::mhd::{check_regularity, DtControl, CFL_FACTOR, PRESETS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Artifacts go here; created if missing.
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    HeatVerify(HeatConfig),
    Counterexample(CounterexampleConfig),
    MaxregVerify(MaxregConfig),
    StokesVerify(StokesConfig),
    MhdRun(MhdConfig),
    OdeBound(OdeConfig),
    ConstantsFit(ConstantsFitConfig),
    Report(ReportConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::HeatVerify(_) => "heat-verify",
            Self::Counterexample(_) => "counterexample",
            Self::MaxregVerify(_) => "maxreg-verify",
            Self::StokesVerify(_) => "stokes-verify",
            Self::MhdRun(_) => "mhd-run",
            Self::OdeBound(_) => "ode-bound",
            Self::ConstantsFit(_) => "constants-fit",
            Self::Report(_) => "report",
        }
    }
}

/// Random band-limited ensemble parameters shared by several experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Spectrum {
    pub k_max: f64,
    pub slope: f64,
}

impl Default for Spectrum {
    fn default() -> Self {
        Self {
            k_max: 6.0,
            slope: 2.0,
        }
    }
}

impl Spectrum {
    pub fn shape(&self) -> mhdlab::random::SpectrumShape {
        mhdlab::random::SpectrumShape {
            k_max: self.k_max,
            slope: self.slope,
            include_mean: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.k_max >= 1.0 && self.k_max.is_finite()) {
            bail!(
                "spectrum.k_max: need a finite band radius >= 1, got {}",
                self.k_max
            );
        }
        if !self.slope.is_finite() {
            bail!("spectrum.slope: must be finite, got {}", self.slope);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub samples: usize,
    pub s: f64,
    pub horizon: f64,
    pub q: f64,
    pub spectrum: Spectrum,
    /// times of the semigroup-law check `e^{tΔ}e^{τΔ} = e^{(t+τ)Δ}`
    pub exact_t: f64,
    pub exact_tau: f64,
    pub exactness_tol: f64,
    pub bound_tol: f64,
    pub identity_tol: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 128,
            length: 1.0,
            samples: 50,
            s: 1.0,
            horizon: 0.5,
            q: 0.5,
            spectrum: Spectrum::default(),
            exact_t: 0.3,
            exact_tau: 0.2,
            exactness_tol: 1e-14,
            bound_tol: 1e-6,
            identity_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub dim: usize,
    pub horizon: f64,
    /// lower integration limits of the scan, largest first
    pub t_mins: Vec<f64>,
    /// last slice index of the inequality chain
    pub chain_max: u64,
    /// `N` values at which the partial sum is compared with direct summation
    pub sum_points: Vec<u64>,
    pub sum_tol: f64,
    /// required growth of `I` over the scan, in units of `e^{-1} c_shell`
    pub growth_factor: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            horizon: 0.25,
            t_mins: vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9],
            chain_max: 50,
            sum_points: vec![1_000, 1_000_000],
            sum_tol: 1e-12,
            growth_factor: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxregConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub samples: usize,
    pub s: f64,
    pub r: f64,
    pub horizon: f64,
    /// piecewise-linear forcing segments on `[0, T]`
    pub segments: usize,
    pub divergence_free: bool,
    pub spectrum: Spectrum,
    pub tol: f64,
}

impl Default for MaxregConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 64,
            length: 1.0,
            samples: 100,
            s: 1.0,
            r: 2.0,
            horizon: 0.5,
            segments: 8,
            divergence_free: false,
            spectrum: Spectrum::default(),
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StokesConfig {
    pub dim: usize,
    /// resolutions compared for refinement stability, coarsest first
    pub resolutions: Vec<usize>,
    pub length: f64,
    pub samples: usize,
    pub s: f64,
    pub eps: f64,
    /// time exponent; `(s+ε)/s` when absent
    pub r: Option<f64>,
    pub horizon: f64,
    pub segments: usize,
    pub spectrum: Spectrum,
    pub tol: f64,
    /// allowed relative change of each fitted constant between resolutions
    pub stability_tol: f64,
}

impl Default for StokesConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            resolutions: vec![128, 256],
            length: 1.0,
            samples: 20,
            s: 1.5,
            eps: 0.5,
            r: None,
            horizon: 0.5,
            segments: 8,
            // wider than the 2/3 band at the coarse resolution, so refinement
            // changes what is resolved
            spectrum: Spectrum {
                k_max: 60.0,
                slope: 4.0,
            },
            tol: 1e-6,
            stability_tol: 0.2,
        }
    }
}

impl StokesConfig {
    pub fn exponent(&self) -> f64 {
        self.r.unwrap_or((self.s + self.eps) / self.s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MhdConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub s: f64,
    pub eps: f64,
    pub horizon: f64,
    pub preset: String,
    pub dt: DtControl,
    /// also run at `dt/2` and `dt/4` and report the observed order
    pub order_study: bool,
    pub min_order: f64,
}

impl Default for MhdConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 256,
            length: 1.0,
            s: 2.0,
            eps: 0.5,
            horizon: 0.5,
            preset: "orszag-tang-2d".into(),
            dt: DtControl::Fixed { dt: 0.004 },
            order_study: true,
            min_order: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeConfig {
    pub eps: Vec<f64>,
    pub c1: Vec<f64>,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    /// integrate up to this fraction of the comparison horizon
    pub horizon_fraction: f64,
    pub max_horizon: f64,
    /// largest accepted step
    pub dt: f64,
    pub bound_tol: f64,
    pub equality_tol: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            eps: vec![0.25, 0.5, 0.75],
            c1: vec![0.0, 0.5, 2.0],
            m1: vec![0.5, 1.0, 1.5],
            m2: vec![0.0, 1.0, 4.0],
            horizon_fraction: 0.9,
            max_horizon: 1.0,
            dt: 0.01,
            bound_tol: 1e-8,
            equality_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsFitConfig {
    /// norm-series CSV written by `mhd-run`, relative to the config file
    pub series: PathBuf,
    pub s: f64,
    pub eps: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// `report.json` files (or directories holding one), relative to the config file
    pub inputs: Vec<PathBuf>,
}

fn check_grid(dim: usize, n: usize, length: f64) -> Result<()> {
    if !(dim == 2 || dim == 3) {
        bail!("dim: must be 2 or 3, got {dim}");
    }
    if n < 4 {
        bail!("n: need at least 4 points per axis, got {n}");
    }
    if !(length > 0.0 && length.is_finite()) {
        bail!("length: must be positive, got {length}");
    }
    Ok(())
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon <= 1.0) {
        bail!("horizon: need 0 < T <= 1, got {horizon}");
    }
    Ok(())
}

fn check_eps(name: &str, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        bail!("{name}: need 0 < eps < 1, got {eps}");
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{name}: must be positive and finite, got {v}");
    }
    Ok(())
}

fn check_count(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        bail!("{name}: must be at least 1");
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file; relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.output_dir = base.join(&cfg.output_dir);
        match &mut cfg.experiment {
            Experiment::ConstantsFit(c) => c.series = base.join(&c.series),
            Experiment::Report(c) => {
                for p in &mut c.inputs {
                    *p = base.join(&*p);
                }
            }
            _ => {}
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            Experiment::HeatVerify(c) => {
                check_grid(c.dim, c.n, c.length)?;
                check_count("samples", c.samples)?;
                if !(c.s >= 0.0 && c.s.is_finite()) {
                    bail!("s: must be >= 0, got {}", c.s);
                }
                check_horizon(c.horizon)?;
                if !(c.q > 0.0 && c.q < 1.0) {
                    bail!("q: need 0 < q < 1, got {}", c.q);
                }
                c.spectrum.validate()?;
                if !(c.exact_t >= 0.0 && c.exact_tau >= 0.0) {
                    bail!("exact_t, exact_tau: times must be >= 0");
                }
                for (name, v) in [
                    ("exactness_tol", c.exactness_tol),
                    ("bound_tol", c.bound_tol),
                    ("identity_tol", c.identity_tol),
                ] {
                    check_positive(name, v)?;
                }
            }
            Experiment::Counterexample(c) => {
                if !(c.dim == 2 || c.dim == 3) {
                    bail!("dim: must be 2 or 3, got {}", c.dim);
                }
                check_horizon(c.horizon)?;
                if c.t_mins.len() < 2 {
                    bail!("t_mins: need at least two lower limits");
                }
                if c.t_mins.iter().any(|&t| !(t > 0.0 && t < c.horizon)) {
                    bail!("t_mins: every lower limit must lie in (0, horizon)");
                }
                if c.t_mins.windows(2).any(|w| w[1] >= w[0]) {
                    bail!("t_mins: must be strictly decreasing");
                }
                if c.chain_max < mhdlab::heat::counterexample::first_index(c.horizon) {
                    bail!("chain_max: must be at least the first slice index");
                }
                check_positive("sum_tol", c.sum_tol)?;
                check_positive("growth_factor", c.growth_factor)?;
            }
            Experiment::MaxregVerify(c) => {
                check_grid(c.dim, c.n, c.length)?;
                check_count("samples", c.samples)?;
                check_count("segments", c.segments)?;
                if !(c.s >= 0.0 && c.s.is_finite()) {
                    bail!("s: must be >= 0, got {}", c.s);
                }
                if !(c.r > 1.0 && c.r.is_finite()) {
                    bail!("r: need r > 1, got {}", c.r);
                }
                check_horizon(c.horizon)?;
                c.spectrum.validate()?;
                check_positive("tol", c.tol)?;
            }
            Experiment::StokesVerify(c) => {
                if c.resolutions.is_empty() {
                    bail!("resolutions: need at least one grid size");
                }
                for &n in &c.resolutions {
                    check_grid(c.dim, n, c.length)?;
                }
                check_count("samples", c.samples)?;
                check_count("segments", c.segments)?;
                if !(c.s > 1.0 && c.s > c.dim as f64 / 2.0) {
                    bail!("s: need s > max(1, d/2), got {}", c.s);
                }
                check_eps("eps", c.eps)?;
                if !(c.exponent() > 1.0 && c.exponent().is_finite()) {
                    bail!("r: need r > 1, got {}", c.exponent());
                }
                check_horizon(c.horizon)?;
                c.spectrum.validate()?;
                check_positive("tol", c.tol)?;
                check_positive("stability_tol", c.stability_tol)?;
            }
            Experiment::MhdRun(c) => {
                check_grid(c.dim, c.n, c.length)?;
                check_regularity(c.dim, c.s, c.eps)?;
                check_horizon(c.horizon)?;
                if !PRESETS.contains(&c.preset.as_str()) {
                    bail!(
                        "preset: unknown '{}', expected one of {PRESETS:?}",
                        c.preset
                    );
                }
                match c.dt {
                    DtControl::Fixed { dt } => check_positive("dt.dt", dt)?,
                    DtControl::Cfl { factor, dt_max } => {
                        if !(factor > 0.0 && factor <= CFL_FACTOR) {
                            bail!("dt.factor: need 0 < factor <= {CFL_FACTOR}, got {factor}");
                        }
                        check_positive("dt.dt_max", dt_max)?;
                    }
                }
                if c.order_study && !matches!(c.dt, DtControl::Fixed { .. }) {
                    bail!("order_study: needs a fixed step (dt.mode = \"fixed\")");
                }
            }
            Experiment::OdeBound(c) => {
                for (name, grid) in [("eps", &c.eps), ("c1", &c.c1), ("m1", &c.m1), ("m2", &c.m2)] {
                    if grid.is_empty() {
                        bail!("{name}: grid must not be empty");
                    }
                    if grid.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                        bail!("{name}: values must be finite and >= 0");
                    }
                }
                for &e in &c.eps {
                    check_eps("eps", e)?;
                }
                if !(c.horizon_fraction > 0.0 && c.horizon_fraction < 1.0) {
                    bail!("horizon_fraction: need a value in (0, 1)");
                }
                check_positive("max_horizon", c.max_horizon)?;
                check_positive("dt", c.dt)?;
                check_positive("bound_tol", c.bound_tol)?;
                check_positive("equality_tol", c.equality_tol)?;
            }
            Experiment::ConstantsFit(c) => {
                check_regularity(c.dim, c.s, c.eps)?;
            }
            Experiment::Report(c) => {
                if c.inputs.is_empty() {
                    bail!("inputs: need at least one report");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = ExperimentConfig::from_toml(
            "output_dir = \"out\"\n[experiment]\nkind = \"heat-verify\"\nsamples = 3\n",
        )
        .unwrap();
        match cfg.experiment {
            Experiment::HeatVerify(h) => {
                assert_eq!(h.samples, 3);
                assert_eq!(h.n, 128);
            }
            other => panic!("wrong kind {other:?}"),
        }
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn invalid_parameters_name_the_field() {
        let err = ExperimentConfig::from_toml(
            "output_dir = \"o\"\n[experiment]\nkind = \"mhd-run\"\ns = 0.8\n",
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("s"), "{err:#}");
        let err = ExperimentConfig::from_toml(
            "output_dir = \"o\"\n[experiment]\nkind = \"maxreg-verify\"\nhorizon = 2.0\n",
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("horizon"));
        assert!(ExperimentConfig::from_toml(
            "output_dir = \"o\"\n[experiment]\nkind = \"ode-bound\"\neps = [1.0]\n"
        )
        .is_err());
    }

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        assert!(ExperimentConfig::from_toml(
            "output_dir = \"o\"\n[experiment]\nkind = \"heat-verify\"\nbogus = 1\n"
        )
        .is_err());
        assert!(
            ExperimentConfig::from_toml("output_dir = \"o\"\n[experiment]\nkind = \"nope\"\n")
                .is_err()
        );
    }

    #[test]
    fn mhd_step_control_parses() {
        let cfg = ExperimentConfig::from_toml(
            "output_dir = \"o\"\n[experiment]\nkind = \"mhd-run\"\norder_study = false\ndt = { mode = \"cfl\", factor = 0.3, dt_max = 0.01 }\n",
        )
        .unwrap();
        match cfg.experiment {
            Experiment::MhdRun(m) => assert_eq!(
                m.dt,
                DtControl::Cfl {
                    factor: 0.3,
                    dt_max: 0.01
                }
            ),
            other => panic!("wrong kind {other:?}"),
        }
    }
}

//! Run configuration: the same types back the command-line flags and the
//! JSON `--config` file, so every run can be written out and replayed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppvl::diagnostics::{Budget, IcPolicy, MapMetric};
use ppvl::grid::{check_grid, inclusive_range};
use ppvl::{DimensionlessParams, Excitation, IntegratorConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Environment variable that overrides the worker count of a config file.
pub const WORKERS_ENV: &str = "PPVL_WORKERS";

pub const DEFAULT_OUTPUT: &str = "ppvl-out";

#[derive(Debug, Parser)]
#[command(
    name = "ppvl",
    version,
    about = "Pendulum with periodically varying length: stability, averaging and chaos diagnostics"
)]
pub struct Cli {
    /// Replay a JSON run configuration instead of giving a subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (default: PPVL_WORKERS, then all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

/// A complete, replayable run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    pub run: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Integrate one trajectory and report its running rotation number.
    Simulate(SimulateConfig),
    /// Floquet stability of the lower equilibrium on an (ω, ε) grid.
    FloquetScan(FloquetScanConfig),
    /// Frequency-response curve of the limit cycle.
    Response(ResponseConfig),
    /// Averaged steady-rotation predictors, optionally verified numerically.
    Rotations(RotationsConfig),
    /// Rotation or Lyapunov map over an (ω, ε) grid.
    ParamMap(ParamMapConfig),
    /// Stroboscopic bifurcation sweep in ε at fixed ω.
    Bifurcation(BifurcationConfig),
    /// Basins of attraction on a (θ₀, θ'₀) grid.
    Basins(BasinsConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::FloquetScan(_) => "floquet-scan",
            Command::Response(_) => "response",
            Command::Rotations(_) => "rotations",
            Command::ParamMap(_) => "param-map",
            Command::Bifurcation(_) => "bifurcation",
            Command::Basins(_) => "basins",
        }
    }
}

/// Fourier coefficients of the length excitation `φ`, `k = 1..K`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExcitationArgs {
    /// Cosine coefficients a_1,…,a_K of φ.
    #[arg(
        long = "phi-cos",
        value_delimiter = ',',
        default_value = "1",
        allow_negative_numbers = true
    )]
    pub cos: Vec<f64>,
    /// Sine coefficients b_1,…,b_K of φ.
    #[arg(long = "phi-sin", value_delimiter = ',', allow_negative_numbers = true)]
    pub sin: Vec<f64>,
}

impl Default for ExcitationArgs {
    fn default() -> Self {
        Self {
            cos: vec![1.0],
            sin: Vec::new(),
        }
    }
}

impl ExcitationArgs {
    pub fn build(&self) -> Result<Excitation> {
        Ok(Excitation::from_coefficients(&self.cos, &self.sin)?)
    }
}

/// Period budgets of the long-run diagnostics.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetArgs {
    /// Transient periods discarded before measuring.
    #[arg(long, default_value_t = Budget::default().transient_periods)]
    pub transient: usize,
    /// Measurement window in periods.
    #[arg(long, default_value_t = Budget::default().window_periods)]
    pub window: usize,
    /// Lyapunov accumulation length in periods.
    #[arg(long, default_value_t = Budget::default().lyapunov_periods)]
    pub lyapunov_periods: usize,
    /// Extra periods allowed for orbits that have not settled.
    #[arg(long, default_value_t = Budget::default().max_extension_periods)]
    pub max_extension: usize,
}

impl Default for BudgetArgs {
    fn default() -> Self {
        let b = Budget::default();
        Self {
            transient: b.transient_periods,
            window: b.window_periods,
            lyapunov_periods: b.lyapunov_periods,
            max_extension: b.max_extension_periods,
        }
    }
}

impl BudgetArgs {
    pub fn build(&self) -> Result<Budget> {
        let b = Budget {
            transient_periods: self.transient,
            window_periods: self.window,
            lyapunov_periods: self.lyapunov_periods,
            max_extension_periods: self.max_extension,
        };
        b.validate()?;
        Ok(b)
    }
}

fn integrator(base: IntegratorConfig, tolerance: Option<f64>) -> Result<IntegratorConfig> {
    let cfg = match tolerance {
        Some(t) => base.with_tolerance(t),
        None => base,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `start:stop:step` (inclusive), a comma-separated list, or a
/// single value.
pub fn parse_grid(name: &str, spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("{name}: cannot parse '{s}' as a number")))
    };
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(CliError::Config(format!(
                "{name}: range '{spec}' must be start:stop:step"
            )));
        };
        inclusive_range(num(start)?, num(stop)?, num(step)?)
            .map_err(|e| CliError::Config(format!("{name}: {e}")))?
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    check_grid(name, &values).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(values)
}

/// Validates every `(ε, β, ω)` combination of the grids.
pub fn check_params(omega: &[f64], epsilon: &[f64], beta: f64) -> Result<()> {
    for &om in omega {
        for &eps in epsilon {
            DimensionlessParams::new(eps, beta, om)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub thetadot0: f64,
    /// Excitation periods to integrate.
    #[arg(long, default_value_t = 200)]
    pub periods: usize,
    /// Output samples per excitation period (1 = stroboscopic).
    #[arg(long, default_value_t = 1)]
    pub samples_per_period: usize,
    /// Integrator tolerance (default 1e-10).
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(default)]
    pub excitation: ExcitationArgs,
}

impl SimulateConfig {
    pub fn params(&self) -> Result<DimensionlessParams> {
        Ok(DimensionlessParams::new(self.eps, self.beta, self.omega)?)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        integrator(IntegratorConfig::precise(), self.tolerance)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.integrator()?;
        self.excitation.build()?;
        if !(self.theta0.is_finite() && self.thetadot0.is_finite()) {
            return Err(CliError::Config("initial state must be finite".into()));
        }
        if self.periods == 0 || self.samples_per_period == 0 {
            return Err(CliError::Config(
                "periods and samples-per-period must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetScanConfig {
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// ω grid, `start:stop:step` or a list.
    #[arg(long)]
    pub omega: String,
    /// ε grid, `start:stop:step` or a list.
    #[arg(long)]
    pub eps: String,
    /// Integrator tolerance (default 1e-10).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Fraction of failed cells tolerated before exiting with status 3.
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub max_failed_fraction: f64,
    #[command(flatten)]
    #[serde(default)]
    pub excitation: ExcitationArgs,
}

impl FloquetScanConfig {
    pub fn grids(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((
            parse_grid("omega", &self.omega)?,
            parse_grid("epsilon", &self.eps)?,
        ))
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        integrator(IntegratorConfig::precise(), self.tolerance)
    }

    pub fn validate(&self) -> Result<()> {
        let (om, eps) = self.grids()?;
        check_params(&om, &eps, self.beta)?;
        check_fraction(self.max_failed_fraction)?;
        self.integrator()?;
        self.excitation.build()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseConfig {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// ω grid inside (0, 1), `start:stop:step` or a list.
    #[arg(long)]
    pub omega: String,
}

impl ResponseConfig {
    pub fn validate(&self) -> Result<()> {
        let om = parse_grid("omega", &self.omega)?;
        check_params(&om, &[self.eps], self.beta)?;
        if om.iter().any(|&w| w >= 1.0) {
            return Err(CliError::Config(
                "response omega grid violates 0 < omega < 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationsConfig {
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// ω grid, `start:stop:step` or a list.
    #[arg(long)]
    pub omega: String,
    /// ε grid, `start:stop:step` or a list.
    #[arg(long)]
    pub eps: String,
    /// Classify the trajectory seeded at each stable predicted phase.
    #[arg(long)]
    #[serde(default)]
    pub verify: bool,
    /// Integrator tolerance for verification (default 1e-8).
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(default)]
    pub budget: BudgetArgs,
}

impl RotationsConfig {
    pub fn integrator(&self) -> Result<IntegratorConfig> {
        integrator(IntegratorConfig::scan(), self.tolerance)
    }

    pub fn validate(&self) -> Result<()> {
        let om = parse_grid("omega", &self.omega)?;
        let eps = parse_grid("epsilon", &self.eps)?;
        check_params(&om, &eps, self.beta)?;
        self.budget.build()?;
        self.integrator()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    Rotation,
    Lyapunov,
}

impl From<MetricArg> for MapMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Rotation => MapMetric::Rotation,
            MetricArg::Lyapunov => MapMetric::Lyapunov,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamMapConfig {
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// ω grid, `start:stop:step` or a list.
    #[arg(long)]
    pub omega: String,
    /// ε grid, `start:stop:step` or a list.
    #[arg(long)]
    pub eps: String,
    /// Print negative Lyapunov exponents as 0.
    #[arg(long)]
    #[serde(default)]
    pub clamp_to_zero: bool,
    /// Seed of the random initial conditions.
    #[arg(long, default_value_t = IcPolicy::default().seed)]
    pub seed: u64,
    /// Random initial conditions per cell (rotation metric).
    #[arg(long, default_value_t = IcPolicy::default().random_ics)]
    pub random_ics: usize,
    /// Random θ'₀ are drawn from [−v, v].
    #[arg(long, default_value_t = IcPolicy::default().theta_dot_range)]
    pub theta_dot_range: f64,
    /// Initial θ of the Lyapunov metric.
    #[arg(long, default_value_t = IcPolicy::default().generic_ic.0, allow_negative_numbers = true)]
    pub generic_theta0: f64,
    /// Initial θ' of the Lyapunov metric.
    #[arg(long, default_value_t = IcPolicy::default().generic_ic.1, allow_negative_numbers = true)]
    pub generic_thetadot0: f64,
    /// Integrator tolerance (default 1e-8).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Fraction of failed cells tolerated before exiting with status 3.
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub max_failed_fraction: f64,
    #[command(flatten)]
    #[serde(default)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    #[serde(default)]
    pub excitation: ExcitationArgs,
}

impl ParamMapConfig {
    pub fn policy(&self) -> IcPolicy {
        IcPolicy {
            seed: self.seed,
            random_ics: self.random_ics,
            theta_dot_range: self.theta_dot_range,
            generic_ic: (self.generic_theta0, self.generic_thetadot0),
            ..IcPolicy::default()
        }
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        integrator(IntegratorConfig::scan(), self.tolerance)
    }

    pub fn validate(&self) -> Result<()> {
        let om = parse_grid("omega", &self.omega)?;
        let eps = parse_grid("epsilon", &self.eps)?;
        check_params(&om, &eps, self.beta)?;
        check_fraction(self.max_failed_fraction)?;
        if !(self.theta_dot_range >= 0.0 && self.theta_dot_range.is_finite()) {
            return Err(CliError::Config(
                "theta-dot-range must be finite and >= 0".into(),
            ));
        }
        self.budget.build()?;
        self.integrator()?;
        self.excitation.build()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcationConfig {
    /// One or more ω values (list or `start:stop:step`).
    #[arg(long)]
    pub omega: String,
    /// ε grid, `start:stop:step` or a list.
    #[arg(long)]
    pub eps: String,
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// θ of the perturbation that starts each sweep.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub theta0: f64,
    /// θ' of the perturbation that starts each sweep.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub thetadot0: f64,
    /// Integrator tolerance (default 1e-8).
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(default)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    #[serde(default)]
    pub excitation: ExcitationArgs,
}

impl BifurcationConfig {
    pub fn integrator(&self) -> Result<IntegratorConfig> {
        integrator(IntegratorConfig::scan(), self.tolerance)
    }

    pub fn validate(&self) -> Result<()> {
        let om = parse_grid("omega", &self.omega)?;
        let eps = parse_grid("epsilon", &self.eps)?;
        check_params(&om, &eps, self.beta)?;
        self.budget.build()?;
        self.integrator()?;
        self.excitation.build()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasinsConfig {
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// Grid points in θ₀ over (−π, π].
    #[arg(long, default_value_t = 101)]
    pub theta_points: usize,
    /// Grid points in θ'₀.
    #[arg(long, default_value_t = 101)]
    pub theta_dot_points: usize,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub theta_dot_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub theta_dot_max: f64,
    /// Integrator tolerance (default 1e-8).
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(default)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    #[serde(default)]
    pub excitation: ExcitationArgs,
}

impl BasinsConfig {
    pub fn params(&self) -> Result<DimensionlessParams> {
        Ok(DimensionlessParams::new(self.eps, self.beta, self.omega)?)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        integrator(IntegratorConfig::scan(), self.tolerance)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.theta_points == 0 || self.theta_dot_points == 0 {
            return Err(CliError::Config("basin grids need >= 1 point".into()));
        }
        let ordered = if self.theta_dot_points == 1 {
            self.theta_dot_min <= self.theta_dot_max
        } else {
            self.theta_dot_min < self.theta_dot_max
        };
        if !(ordered && self.theta_dot_min.is_finite() && self.theta_dot_max.is_finite()) {
            return Err(CliError::Config(
                "theta-dot-min must be below theta-dot-max".into(),
            ));
        }
        self.budget.build()?;
        self.integrator()?;
        self.excitation.build()?;
        Ok(())
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(CliError::Config(
            "max-failed-fraction must lie in [0, 1]".into(),
        ))
    }
}

impl Command {
    pub fn validate(&self) -> Result<()> {
        match self {
            Command::Simulate(c) => c.validate(),
            Command::FloquetScan(c) => c.validate(),
            Command::Response(c) => c.validate(),
            Command::Rotations(c) => c.validate(),
            Command::ParamMap(c) => c.validate(),
            Command::Bifurcation(c) => c.validate(),
            Command::Basins(c) => c.validate(),
        }
    }
}

impl RunConfig {
    /// Merges flags, the optional config file and the worker environment
    /// variable. Flags win over the environment, which wins over the file.
    pub fn resolve(cli: Cli, env_workers: Option<&str>) -> Result<Self> {
        let mut cfg = match (cli.config, cli.command) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either --config or a subcommand, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "a subcommand or --config is required".into(),
                ))
            }
            (Some(path), None) => {
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str::<RunConfig>(&text).map_err(|e| {
                    CliError::Config(format!("invalid config {}: {e}", path.display()))
                })?
            }
            (None, Some(run)) => RunConfig {
                output: PathBuf::from(DEFAULT_OUTPUT),
                workers: None,
                run,
            },
        };
        if let Some(out) = cli.out {
            cfg.output = out;
        }
        if let Some(w) = env_workers.filter(|s| !s.trim().is_empty()) {
            let n = w.trim().parse::<usize>().map_err(|_| {
                CliError::Config(format!(
                    "{WORKERS_ENV} must be a positive integer, got '{w}'"
                ))
            })?;
            cfg.workers = Some(n);
        }
        if let Some(w) = cli.workers {
            cfg.workers = Some(w);
        }
        if cfg.workers == Some(0) {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        cfg.run.validate()?;
        Ok(cfg)
    }
}

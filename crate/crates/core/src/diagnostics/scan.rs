//! Parameter maps, bifurcation sweeps and basin-of-attraction scans.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::rotation_steady;
use crate::error::{Error, Result};
use crate::grid::{check_grid, fmt_sig, par_grid};
use crate::integrate::IntegratorConfig;
use crate::model::{wrap_angle, DimensionlessParams, Excitation, Pendulum, State};

use super::classify::{classify_with_window, settle, AttractorClass};
use super::lyapunov::max_lyapunov;
use super::orbit::{snap_rational, Budget};

/// Stroboscopic samples recorded per bifurcation step.
pub const BIFURCATION_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMetric {
    /// Largest `|b|` reached from the initial-condition set.
    Rotation,
    /// Largest Lyapunov exponent from a fixed generic initial condition.
    Lyapunov,
}

/// Initial conditions used per parameter-map cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcPolicy {
    /// Rotation numbers seeded at `(X1_stable(b), θ' = b)` where the
    /// averaged rotation exists.
    pub seeded_b: Vec<i32>,
    /// Additional uniformly random initial conditions per cell.
    pub random_ics: usize,
    pub seed: u64,
    /// Random `θ'₀` are drawn from `[−v, v]`.
    pub theta_dot_range: f64,
    /// Initial condition of the Lyapunov metric.
    pub generic_ic: (f64, f64),
}

impl Default for IcPolicy {
    fn default() -> Self {
        Self {
            seeded_b: vec![1, -1, 2, -2],
            random_ics: 8,
            seed: 0x5eed,
            theta_dot_range: 2.0,
            generic_ic: (2.0, 0.5),
        }
    }
}

impl IcPolicy {
    /// Initial conditions of cell number `cell`; the random part depends only
    /// on the seed and the cell index.
    pub fn initial_conditions(&self, params: &DimensionlessParams, cell: u64) -> Vec<State> {
        let mut ics: Vec<State> = self
            .seeded_b
            .iter()
            .filter_map(|&b| rotation_steady(b, params).ok())
            .map(|r| State::new(r.x1_stable, r.b as f64, 0.0))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(cell);
        for _ in 0..self.random_ics {
            // (−π, π]
            let theta = PI - 2.0 * PI * rng.gen::<f64>();
            let v = self.theta_dot_range;
            let theta_dot = if v > 0.0 { rng.gen_range(-v..=v) } else { 0.0 };
            ics.push(State::new(theta, theta_dot, 0.0));
        }
        ics
    }
}

/// Values of a parameter map; `values[i * epsilon.len() + j]` belongs to
/// `(omega[i], epsilon[j])`, `None` marks a failed cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterMap {
    pub metric: MapMetric,
    pub beta: f64,
    pub omega: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

impl ParameterMap {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.epsilon.len() + j]
    }

    pub fn failures(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Writes `omega,epsilon,value` rows. With `clamp_to_zero`, negative
    /// Lyapunov exponents are printed as 0 (regular regime).
    pub fn write_csv<W: Write>(&self, mut w: W, clamp_to_zero: bool) -> io::Result<()> {
        writeln!(w, "omega,epsilon,value")?;
        for (i, &om) in self.omega.iter().enumerate() {
            for (j, &eps) in self.epsilon.iter().enumerate() {
                let cell = match self.get(i, j) {
                    Some(v) if clamp_to_zero && self.metric == MapMetric::Lyapunov => {
                        fmt_sig(v.max(0.0))
                    }
                    Some(v) => fmt_sig(v),
                    None => "failed".into(),
                };
                writeln!(w, "{},{},{}", fmt_sig(om), fmt_sig(eps), cell)?;
            }
        }
        Ok(())
    }
}

/// Largest `|b|` over the initial conditions that settle on a closed orbit
/// with nonzero rational winding; 0 when none does.
fn max_locked_rotation(
    pendulum: &Pendulum,
    ics: &[State],
    budget: &Budget,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let mut best = 0.0_f64;
    for ic in ics {
        let (w, _) = settle(pendulum, ic, budget, cfg)?;
        if w.poincare_period().is_none() {
            continue;
        }
        if let Some(r) = snap_rational(w.mean_winding()) {
            best = best.max(r.as_f64().abs());
        }
    }
    Ok(best)
}

/// Evaluates `metric` on the `(ω, ε)` grid at fixed `β`; cells run in
/// parallel and integration failures are recorded per cell.
#[allow(clippy::too_many_arguments)]
pub fn parameter_map(
    metric: MapMetric,
    omega_grid: &[f64],
    epsilon_grid: &[f64],
    beta: f64,
    excitation: &Excitation,
    policy: &IcPolicy,
    budget: &Budget,
    cfg: &IntegratorConfig,
) -> Result<ParameterMap> {
    check_grid("omega", omega_grid)?;
    check_grid("epsilon", epsilon_grid)?;
    budget.validate()?;
    cfg.validate()?;
    for &om in omega_grid {
        for &eps in epsilon_grid {
            DimensionlessParams::new(eps, beta, om)?;
        }
    }
    let cols = epsilon_grid.len();
    let values = par_grid(omega_grid.len(), cols, |i, j| {
        let params = DimensionlessParams {
            epsilon: epsilon_grid[j],
            beta,
            omega: omega_grid[i],
        };
        let pendulum = Pendulum::new(params, excitation.clone());
        match metric {
            MapMetric::Rotation => {
                let ics = policy.initial_conditions(&params, (i * cols + j) as u64);
                max_locked_rotation(&pendulum, &ics, budget, cfg).ok()
            }
            MapMetric::Lyapunov => {
                let (theta, theta_dot) = policy.generic_ic;
                let ic = State::new(theta, theta_dot, 0.0);
                max_lyapunov(
                    &pendulum,
                    &ic,
                    budget.lyapunov_periods,
                    budget.transient_periods,
                    cfg,
                )
                .ok()
                .map(|l| l.lambda_max)
            }
        }
    });
    Ok(ParameterMap {
        metric,
        beta,
        omega: omega_grid.to_vec(),
        epsilon: epsilon_grid.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Started from the final state of the previous step.
    Continuation,
    /// Started from a small perturbation of the equilibrium.
    Fresh,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::Continuation => "continuation",
            Branch::Fresh => "fresh",
        }
    }
}

/// Settled behaviour of one branch at one `ε`; `theta_dot` holds the last
/// [`BIFURCATION_SAMPLES`] stroboscopic velocities (empty on failure).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchResult {
    pub class: AttractorClass,
    pub theta_dot: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationStep {
    pub epsilon: f64,
    pub continuation: BranchResult,
    pub fresh: BranchResult,
}

impl BifurcationStep {
    pub fn branch(&self, b: Branch) -> &BranchResult {
        match b {
            Branch::Continuation => &self.continuation,
            Branch::Fresh => &self.fresh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationSweep {
    pub omega: f64,
    pub beta: f64,
    pub steps: Vec<BifurcationStep>,
}

/// Writes `omega,epsilon,sample_index,theta_dot,class,branch` rows for
/// each sweep in order.
pub fn write_bifurcation_csv<W: Write>(sweeps: &[BifurcationSweep], mut w: W) -> io::Result<()> {
    writeln!(w, "omega,epsilon,sample_index,theta_dot,class,branch")?;
    for sweep in sweeps {
        for step in &sweep.steps {
            for b in [Branch::Continuation, Branch::Fresh] {
                let r = step.branch(b);
                for (k, v) in r.theta_dot.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        fmt_sig(sweep.omega),
                        fmt_sig(step.epsilon),
                        k,
                        fmt_sig(*v),
                        r.class,
                        b.label()
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn run_branch(
    pendulum: &Pendulum,
    ic: &State,
    budget: &Budget,
    cfg: &IntegratorConfig,
) -> (BranchResult, Option<State>) {
    let (c, w) = classify_with_window(pendulum, ic, budget, cfg);
    let theta_dot = w
        .map(|w| {
            let n = w.samples.len();
            w.samples[n.saturating_sub(BIFURCATION_SAMPLES)..]
                .iter()
                .map(|s| s.theta_dot)
                .collect()
        })
        .unwrap_or_default();
    // The excitation is 2π-periodic, so the last stroboscopic state restarts
    // the next step at τ = 0.
    let next = c
        .final_state
        .map(|s| State::new(wrap_angle(s.theta), s.theta_dot, 0.0));
    (
        BranchResult {
            class: c.class,
            theta_dot,
        },
        next,
    )
}

/// Sweeps `ε` upward at fixed `ω`. The continuation branch starts each step
/// from the previous final state; the fresh branch always restarts from
/// `perturbation`, which reveals attractors reached only by jumping off the
/// equilibrium. The fresh steps run in parallel alongside the sequential
/// continuation chain.
pub fn bifurcation_sweep(
    omega: f64,
    epsilon_grid: &[f64],
    beta: f64,
    excitation: &Excitation,
    perturbation: (f64, f64),
    budget: &Budget,
    cfg: &IntegratorConfig,
) -> Result<BifurcationSweep> {
    check_grid("epsilon", epsilon_grid)?;
    budget.validate()?;
    cfg.validate()?;
    if budget.window_periods < BIFURCATION_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "bifurcation window must hold {BIFURCATION_SAMPLES} samples"
        )));
    }
    let pendulums = epsilon_grid
        .iter()
        .map(|&eps| {
            DimensionlessParams::new(eps, beta, omega).map(|p| Pendulum::new(p, excitation.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let fresh_ic = State::new(perturbation.0, perturbation.1, 0.0);

    let (continuation, fresh): (Vec<BranchResult>, Vec<BranchResult>) = rayon::join(
        || {
            let mut ic = fresh_ic;
            pendulums
                .iter()
                .map(|p| {
                    let (r, next) = run_branch(p, &ic, budget, cfg);
                    // The settled equilibrium is an exact fixed point that
                    // could never reveal its own loss of stability, so that
                    // branch, like a failed step, continues from the
                    // perturbation.
                    ic = match next {
                        Some(s) if r.class != AttractorClass::Equilibrium => s,
                        _ => fresh_ic,
                    };
                    r
                })
                .collect()
        },
        || {
            pendulums
                .par_iter()
                .map(|p| run_branch(p, &fresh_ic, budget, cfg).0)
                .collect()
        },
    );
    let steps = epsilon_grid
        .iter()
        .zip(continuation.into_iter().zip(fresh))
        .map(|(&epsilon, (continuation, fresh))| BifurcationStep {
            epsilon,
            continuation,
            fresh,
        })
        .collect();
    Ok(BifurcationSweep { omega, beta, steps })
}

/// `n` angles `−π + 2π(i+1)/n`, covering `(−π, π]`.
pub fn basin_theta_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -PI + 2.0 * PI * (i + 1) as f64 / n as f64)
        .collect()
}

/// Identity of an attractor: its class and the Poincaré-cycle centroid in
/// the `(cos θ, sin θ, θ')` embedding, rounded to `1e-2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttractorIdentity {
    pub class: AttractorClass,
    pub centroid: Option<[i64; 3]>,
}

/// Inverse of the centroid rounding step `1e-2`.
const CENTROID_SCALE: f64 = 100.0;

impl AttractorIdentity {
    fn new(class: AttractorClass, cycle: &[(f64, f64)]) -> Self {
        let centroid = (class.is_regular() && !cycle.is_empty()).then(|| {
            let n = cycle.len() as f64;
            let mut c = [0.0; 3];
            for &(theta, theta_dot) in cycle {
                c[0] += theta.cos() / n;
                c[1] += theta.sin() / n;
                c[2] += theta_dot / n;
            }
            c.map(|x| (x * CENTROID_SCALE).round() as i64)
        });
        Self { class, centroid }
    }

    /// Centroid coordinates, as rounded.
    pub fn centroid_values(&self) -> Option<[f64; 3]> {
        self.centroid.map(|c| c.map(|k| k as f64 / CENTROID_SCALE))
    }
}

/// One distinct attractor of a basin scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorEntry {
    pub key: usize,
    pub class: AttractorClass,
    pub centroid: Option<[f64; 3]>,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinCell {
    pub class: AttractorClass,
    pub key: usize,
}

/// Basin scan result; `cells[i * theta_dot.len() + j]` belongs to
/// `(theta[i], theta_dot[j])` and keys are numbered in that order of first
/// appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinGrid {
    pub params: DimensionlessParams,
    pub theta: Vec<f64>,
    pub theta_dot: Vec<f64>,
    pub cells: Vec<BasinCell>,
    pub attractors: Vec<AttractorEntry>,
}

impl BasinGrid {
    pub fn get(&self, i: usize, j: usize) -> BasinCell {
        self.cells[i * self.theta_dot.len() + j]
    }

    pub fn unresolved(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.class == AttractorClass::Unresolved)
            .count()
    }

    pub fn unresolved_fraction(&self) -> f64 {
        self.unresolved() as f64 / self.cells.len() as f64
    }

    /// Distinct classes found, in key order.
    pub fn classes(&self) -> Vec<AttractorClass> {
        let mut out = Vec::new();
        for a in &self.attractors {
            if !out.contains(&a.class) {
                out.push(a.class);
            }
        }
        out
    }

    /// Writes `theta0,theta_dot0,class,attractor_key` rows in grid order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "theta0,theta_dot0,class,attractor_key")?;
        for (i, &th) in self.theta.iter().enumerate() {
            for (j, &v) in self.theta_dot.iter().enumerate() {
                let c = self.get(i, j);
                writeln!(w, "{},{},{},{}", fmt_sig(th), fmt_sig(v), c.class, c.key)?;
            }
        }
        Ok(())
    }
}

/// Classifies every initial condition of the `(θ₀, θ'₀)` grid in parallel
/// and groups cells by attractor identity.
pub fn basin_scan(
    pendulum: &Pendulum,
    theta_grid: &[f64],
    theta_dot_grid: &[f64],
    budget: &Budget,
    cfg: &IntegratorConfig,
) -> Result<BasinGrid> {
    check_grid("theta", theta_grid)?;
    check_grid("theta_dot", theta_dot_grid)?;
    if theta_grid[0] <= -PI || theta_grid[theta_grid.len() - 1] > PI + 1e-12 {
        return Err(Error::InvalidParameter(
            "theta grid must lie within (-pi, pi]".into(),
        ));
    }
    pendulum.params.validate()?;
    budget.validate()?;
    cfg.validate()?;
    let ids = par_grid(theta_grid.len(), theta_dot_grid.len(), |i, j| {
        let ic = State::new(theta_grid[i], theta_dot_grid[j], 0.0);
        let c = classify_with_window(pendulum, &ic, budget, cfg).0;
        AttractorIdentity::new(c.class, &c.cycle)
    });

    let mut known: Vec<AttractorIdentity> = Vec::new();
    let mut attractors: Vec<AttractorEntry> = Vec::new();
    let cells = ids
        .iter()
        .map(|id| {
            let key = match known.iter().position(|k| k == id) {
                Some(k) => k,
                None => {
                    known.push(*id);
                    attractors.push(AttractorEntry {
                        key: known.len() - 1,
                        class: id.class,
                        centroid: id.centroid_values(),
                        cells: 0,
                    });
                    known.len() - 1
                }
            };
            attractors[key].cells += 1;
            BasinCell {
                class: id.class,
                key,
            }
        })
        .collect();
    Ok(BasinGrid {
        params: pendulum.params,
        theta: theta_grid.to_vec(),
        theta_dot: theta_dot_grid.to_vec(),
        cells,
        attractors,
    })
}

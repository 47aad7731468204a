//! One function per subcommand. Each returns its data files and a summary
//! for the metadata sidecar; writing happens in the caller.

use std::f64::consts::PI;
use std::io::Write;

use ppvl::averaging::{
    response_roots, rotation_exists, rotation_is_stable, rotation_steady, rotation_threshold,
    write_response_csv,
};
use ppvl::diagnostics::{
    basin_scan, basin_theta_grid, bifurcation_sweep, classify_attractor, parameter_map,
    snap_rational, write_bifurcation_csv, AttractorEntry, Branch,
};
use ppvl::floquet::{first_tongue_interval, stability_scan};
use ppvl::grid::{fmt_sig, linspace};
use ppvl::integrate::integrate_ivp;
use ppvl::{DimensionlessParams, Pendulum, State};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    parse_grid, BasinsConfig, BifurcationConfig, Command, FloquetScanConfig, ParamMapConfig,
    ResponseConfig, RotationsConfig, SimulateConfig,
};
use crate::error::{CliError, Result};
use crate::output::sig9;

const TWO_PI: f64 = 2.0 * PI;

/// Windows of the running rotation number are whole multiples of this many
/// periods, so orbits whose Poincaré period divides it wind exactly.
const WINDING_BLOCK: usize = 24;

/// Result of one subcommand.
pub struct Outcome {
    /// `(file name, contents)` of the data files.
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Value,
    /// `(failed cells, total cells, tolerated fraction)` for grid commands.
    pub failures: Option<(usize, usize, f64)>,
}

impl Outcome {
    fn new(files: Vec<(String, Vec<u8>)>, summary: Value) -> Self {
        Self {
            files,
            summary,
            failures: None,
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Simulate(c) => simulate(c),
        Command::FloquetScan(c) => floquet_scan(c),
        Command::Response(c) => response(c),
        Command::Rotations(c) => rotations(c),
        Command::ParamMap(c) => param_map(c),
        Command::Bifurcation(c) => bifurcation(c),
        Command::Basins(c) => basins(c),
    }
}

fn numerical(e: ppvl::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Running rotation number at stroboscopic sample `k`: mean winding over
/// the last half of the run, in whole blocks where possible.
fn running_winding(strobe_theta: &[f64], k: usize) -> Option<f64> {
    let half = k / 2;
    if half == 0 {
        return None;
    }
    let m = if half >= WINDING_BLOCK {
        half - half % WINDING_BLOCK
    } else {
        half
    };
    Some((strobe_theta[k] - strobe_theta[k - m]) / (TWO_PI * m as f64))
}

fn simulate(c: &SimulateConfig) -> Result<Outcome> {
    let params = c.params()?;
    let pendulum = Pendulum::new(params, c.excitation.build()?);
    let cfg = c.integrator()?;
    let spp = c.samples_per_period;
    let n = c.periods * spp;
    let taus: Vec<f64> = (1..=n).map(|k| TWO_PI * k as f64 / spp as f64).collect();
    let traj = integrate_ivp(
        pendulum.theta_field(),
        0.0,
        [c.theta0, c.thetadot0],
        TWO_PI * c.periods as f64,
        &taus,
        &cfg,
    )
    .map_err(numerical)?;
    let strobe_theta: Vec<f64> = traj.y.iter().step_by(spp).map(|y| y[0]).collect();

    let mut csv = Vec::new();
    writeln!(csv, "tau,theta,theta_dot,q,q_dot,winding,rotation_number")?;
    let mut last_rotation = None;
    for (i, s) in traj.states().iter().enumerate() {
        let q = pendulum.to_q_state(s);
        let winding = (i % spp == 0)
            .then(|| running_winding(&strobe_theta, i / spp))
            .flatten();
        let rotation = winding.and_then(snap_rational);
        last_rotation = rotation;
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_sig(s.tau),
            fmt_sig(s.theta),
            fmt_sig(s.theta_dot),
            fmt_sig(q.q),
            fmt_sig(q.q_dot),
            winding.map(fmt_sig).unwrap_or_default(),
            rotation.map(|r| r.to_string()).unwrap_or_default()
        )?;
    }
    let summary = json!({
        "samples": traj.len(),
        "final_rotation_number": last_rotation.map(|r| r.to_string()),
    });
    Ok(Outcome::new(vec![("trajectory.csv".into(), csv)], summary))
}

fn floquet_scan(c: &FloquetScanConfig) -> Result<Outcome> {
    let (omega, eps) = c.grids()?;
    let excitation = c.excitation.build()?;
    let grid = stability_scan(&omega, &eps, c.beta, &excitation, &c.integrator()?)?;
    let mut csv = Vec::new();
    grid.write_csv(&mut csv)?;
    let unstable = grid
        .cells
        .iter()
        .filter(|s| matches!(s, ppvl::floquet::CellStability::Unstable))
        .count();
    let summary = json!({
        "cells": grid.cells.len(),
        "unstable": unstable,
        "failed": grid.failures(),
        "analytic_first_tongue": (excitation == ppvl::Excitation::cosine())
            .then(|| first_tongue_edges(c.beta, &eps)),
    });
    Ok(Outcome {
        files: vec![("floquet.csv".into(), csv)],
        summary,
        failures: Some((grid.failures(), grid.cells.len(), c.max_failed_fraction)),
    })
}

fn response(c: &ResponseConfig) -> Result<Outcome> {
    let omega = parse_grid("omega", &c.omega)?;
    let per_omega = omega
        .par_iter()
        .map(|&w| response_roots(w, c.eps, c.beta))
        .collect::<ppvl::Result<Vec<_>>>()?;
    let points: Vec<_> = per_omega.into_iter().flatten().collect();
    let mut csv = Vec::new();
    write_response_csv(&points, &mut csv)?;
    let summary = json!({
        "points": points.len(),
        "stable_points": points.iter().filter(|p| p.stable).count(),
    });
    Ok(Outcome::new(vec![("response.csv".into(), csv)], summary))
}

#[derive(Serialize)]
struct RotationRecord {
    omega: f64,
    epsilon: f64,
    b: i32,
    /// Smallest ω at which the averaged rotation exists.
    threshold_omega: Option<f64>,
    exists: bool,
    x1_stable: Option<f64>,
    x1_unstable: Option<f64>,
    stable_phase_is_stable: Option<bool>,
    /// Class reached from `(X1_stable, θ' = b)` (with `--verify`).
    verified_class: Option<String>,
    /// Circular mean of `θ − bτ` over the settled Poincaré cycle.
    verified_phase_mismatch: Option<f64>,
}

fn rotation_record(
    params: DimensionlessParams,
    b: i32,
    verify: Option<(&ppvl::diagnostics::Budget, &ppvl::IntegratorConfig)>,
) -> Result<RotationRecord> {
    let threshold = rotation_threshold(b.unsigned_abs(), params.epsilon, params.beta)?;
    let mut rec = RotationRecord {
        omega: params.omega,
        epsilon: params.epsilon,
        b,
        threshold_omega: threshold.is_finite().then(|| sig9(threshold)),
        exists: rotation_exists(b.unsigned_abs(), &params)?,
        x1_stable: None,
        x1_unstable: None,
        stable_phase_is_stable: None,
        verified_class: None,
        verified_phase_mismatch: None,
    };
    if !rec.exists {
        return Ok(rec);
    }
    let r = rotation_steady(b, &params)?;
    rec.x1_stable = Some(sig9(r.x1_stable));
    rec.x1_unstable = Some(sig9(r.x1_unstable));
    rec.stable_phase_is_stable = Some(rotation_is_stable(r.x1_stable));
    if let Some((budget, cfg)) = verify {
        let ic = State::new(r.x1_stable, b as f64, 0.0);
        let c = classify_attractor(&Pendulum::cosine(params), &ic, budget, cfg);
        rec.verified_class = Some(c.class.to_string());
        rec.verified_phase_mismatch = c.phase_mismatch().map(sig9);
    }
    Ok(rec)
}

fn rotations(c: &RotationsConfig) -> Result<Outcome> {
    let omega = parse_grid("omega", &c.omega)?;
    let eps = parse_grid("epsilon", &c.eps)?;
    let budget = c.budget.build()?;
    let cfg = c.integrator()?;
    let cells: Vec<(f64, f64, i32)> = omega
        .iter()
        .flat_map(|&w| {
            eps.iter()
                .flat_map(move |&e| [1, -1, 2, -2].map(|b| (w, e, b)))
        })
        .collect();
    let records = cells
        .par_iter()
        .map(|&(w, e, b)| {
            let params = DimensionlessParams::new(e, c.beta, w)?;
            rotation_record(params, b, c.verify.then_some((&budget, &cfg)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut data = serde_json::to_vec_pretty(&records)?;
    data.push(b'\n');
    let summary = json!({
        "records": records.len(),
        "existing": records.iter().filter(|r| r.exists).count(),
    });
    Ok(Outcome::new(vec![("rotations.json".into(), data)], summary))
}

fn param_map(c: &ParamMapConfig) -> Result<Outcome> {
    let omega = parse_grid("omega", &c.omega)?;
    let eps = parse_grid("epsilon", &c.eps)?;
    let map = parameter_map(
        c.metric.into(),
        &omega,
        &eps,
        c.beta,
        &c.excitation.build()?,
        &c.policy(),
        &c.budget.build()?,
        &c.integrator()?,
    )?;
    let mut csv = Vec::new();
    map.write_csv(&mut csv, c.clamp_to_zero)?;
    let valid = map.values.iter().flatten();
    let max = valid.clone().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "cells": map.values.len(),
        "failed": map.failures(),
        "max_value": max.is_finite().then(|| sig9(max)),
    });
    Ok(Outcome {
        files: vec![("param_map.csv".into(), csv)],
        summary,
        failures: Some((map.failures(), map.values.len(), c.max_failed_fraction)),
    })
}

fn bifurcation(c: &BifurcationConfig) -> Result<Outcome> {
    let omega = parse_grid("omega", &c.omega)?;
    let eps = parse_grid("epsilon", &c.eps)?;
    let excitation = c.excitation.build()?;
    let budget = c.budget.build()?;
    let cfg = c.integrator()?;
    let sweeps = omega
        .par_iter()
        .map(|&w| {
            bifurcation_sweep(
                w,
                &eps,
                c.beta,
                &excitation,
                (c.theta0, c.thetadot0),
                &budget,
                &cfg,
            )
        })
        .collect::<ppvl::Result<Vec<_>>>()?;
    let mut csv = Vec::new();
    write_bifurcation_csv(&sweeps, &mut csv)?;
    let classes: Vec<Value> = sweeps
        .iter()
        .map(|s| {
            let steps: Vec<Value> = s
                .steps
                .iter()
                .map(|st| {
                    json!({
                        "epsilon": sig9(st.epsilon),
                        "continuation": st.branch(Branch::Continuation).class.to_string(),
                        "fresh": st.branch(Branch::Fresh).class.to_string(),
                    })
                })
                .collect();
            json!({ "omega": sig9(s.omega), "steps": steps })
        })
        .collect();
    let summary = json!({ "sweeps": classes });
    Ok(Outcome::new(vec![("bifurcation.csv".into(), csv)], summary))
}

#[derive(Serialize)]
struct Legend<'a> {
    params: DimensionlessParams,
    unresolved_fraction: f64,
    attractors: Vec<LegendEntry<'a>>,
}

#[derive(Serialize)]
struct LegendEntry<'a> {
    key: usize,
    class: String,
    #[serde(rename = "class_detail")]
    detail: &'a ppvl::diagnostics::AttractorClass,
    centroid: Option<[f64; 3]>,
    cells: usize,
}

fn basins(c: &BasinsConfig) -> Result<Outcome> {
    let pendulum = Pendulum::new(c.params()?, c.excitation.build()?);
    let theta = basin_theta_grid(c.theta_points);
    let theta_dot = linspace(c.theta_dot_min, c.theta_dot_max, c.theta_dot_points);
    let grid = basin_scan(
        &pendulum,
        &theta,
        &theta_dot,
        &c.budget.build()?,
        &c.integrator()?,
    )?;
    let mut csv = Vec::new();
    grid.write_csv(&mut csv)?;
    let legend = Legend {
        params: grid.params,
        unresolved_fraction: sig9(grid.unresolved_fraction()),
        attractors: grid
            .attractors
            .iter()
            .map(|a: &AttractorEntry| LegendEntry {
                key: a.key,
                class: a.class.to_string(),
                detail: &a.class,
                centroid: a.centroid,
                cells: a.cells,
            })
            .collect(),
    };
    let mut legend_json = serde_json::to_vec_pretty(&legend)?;
    legend_json.push(b'\n');
    let classes: Vec<String> = grid.classes().iter().map(|k| k.to_string()).collect();
    let summary = json!({
        "cells": grid.cells.len(),
        "classes": classes,
        "unresolved_fraction": sig9(grid.unresolved_fraction()),
    });
    Ok(Outcome::new(
        vec![
            ("basins.csv".into(), csv),
            ("legend.json".into(), legend_json),
        ],
        summary,
    ))
}

/// Analytic first-tongue edges at the scanned ε values, for comparison with
/// a Floquet scan (cosine excitation only).
fn first_tongue_edges(beta: f64, eps: &[f64]) -> Vec<Value> {
    eps.iter()
        .map(|&e| {
            let t = first_tongue_interval(beta, e);
            json!({
                "epsilon": sig9(e),
                "interval": t.interval.map(|(lo, hi)| [sig9(lo), sig9(hi)]),
            })
        })
        .collect()
}

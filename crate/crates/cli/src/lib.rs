//! Batch front end of the `ppvl` library: one subcommand per analysis,
//! JSON-replayable configuration, atomic CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use config::{Cli, RunConfig, WORKERS_ENV};
use error::{CliError, Result};
use output::write_atomic;

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env_workers = std::env::var(WORKERS_ENV).ok();
    match RunConfig::resolve(cli, env_workers.as_deref()).and_then(|cfg| execute(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ppvl: {e}");
            e.exit_code()
        }
    }
}

/// Runs a validated configuration on its own worker pool and writes the
/// data files, `meta.json` and the replayable `config.json`.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let workers = pool.current_num_threads();
    let outcome = pool.install(|| commands::execute(&cfg.run))?;

    for (name, bytes) in &outcome.files {
        write_atomic(&cfg.output, name, bytes)?;
    }
    let files: Vec<&str> = outcome.files.iter().map(|(n, _)| n.as_str()).collect();
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": ppvl::VERSION,
        "subcommand": cfg.run.name(),
        "config": cfg,
        "workers": workers,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "files": files,
        "summary": outcome.summary,
    });
    let mut meta_bytes = serde_json::to_vec_pretty(&meta)?;
    meta_bytes.push(b'\n');
    write_atomic(&cfg.output, "meta.json", &meta_bytes)?;
    let mut config_bytes = serde_json::to_vec_pretty(cfg)?;
    config_bytes.push(b'\n');
    write_atomic(&cfg.output, "config.json", &config_bytes)?;

    if let Some((failed, total, tolerated)) = outcome.failures {
        if total > 0 && failed as f64 > tolerated * total as f64 {
            return Err(CliError::Numerical(format!(
                "{failed} of {total} cells failed to integrate (tolerated fraction {tolerated})"
            )));
        }
    }
    Ok(())
}

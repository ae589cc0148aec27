//! Command-line front end: each subcommand reads a JSON config, runs the
//! corresponding experiment, and writes CSV/JSON outputs.
//!
//! Exit codes: 0 success, 2 configuration error (bad JSON, invalid
//! parameters), 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use parcs::error::Error;
use parcs::experiment::{
    self, config::{BoundsSweepConfig, ConcentrationConfig, PhaseConfig, ProfileCheckConfig, SolveConfig},
    output,
};
use serde::de::DeserializeOwned;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "parcs",
    about = "Compressed sensing with parallel acquisition: experiments and checks",
    after_help = "CSV columns:\n  \
        phase:          scenario,c,n,m,m_over_n,s,s_over_m,successes,trials,success_rate\n  \
        bounds:         c,d,quantity,value\n  \
        concentration:  t,m,empirical_tail,bound\n  \
        *_plot.csv:     x,y,series (plot-ready long format)\n\
        A *_meta.json sidecar echoes the config and its hash."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output stem.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rayon worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Override trials per cell (phase/concentration).
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a profile family and verify the joint isometry condition.
    #[command(name = "profile-check")]
    ProfileCheck(Common),
    /// Sweep the level factors (Upsilon) over C.
    Bounds(Common),
    /// Phase-transition grid experiment.
    Phase(Common),
    /// Empirical concentration tails against the closed-form bound.
    Concentration(Common),
    /// Solve one basis-pursuit instance.
    Solve(Common),
}

fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn init_threads(threads: Option<usize>) -> Result<(), Error> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn stem(out: &Option<PathBuf>, fallback: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from(fallback))
}

fn run(command: &Command) -> Result<(), Error> {
    match command {
        Command::ProfileCheck(common) => {
            init_threads(common.threads)?;
            let mut config: ProfileCheckConfig = load_config(&common.config)?;
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            if common.out.is_some() {
                config.out = common.out.clone();
            }
            let report = experiment::run_profile_check(&config)?;
            let path = stem(&config.out, "profile_check").with_extension("json");
            output::write_json(&path, &report)?;
            println!(
                "profile-check: residual {:.3e} ({}) -> {}",
                report.residual,
                if report.pass { "pass" } else { "FAIL" },
                path.display()
            );
            if !report.pass {
                return Err(Error::Numerical(format!(
                    "joint isometry residual {:.3e} exceeds 1e-10",
                    report.residual
                )));
            }
            Ok(())
        }
        Command::Bounds(common) => {
            init_threads(common.threads)?;
            let mut config: BoundsSweepConfig = load_config(&common.config)?;
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            if common.out.is_some() {
                config.out = common.out.clone();
            }
            let rows = experiment::run_bounds_sweep(&config)?;
            let paths = output::output_paths(&stem(&config.out, "bounds_sweep"));
            output::write_text(&paths.raw, &output::sweep_csv(&rows))?;
            output::write_text(&paths.plot, &output::sweep_plot_csv(&rows))?;
            output::write_json(
                &paths.meta,
                &output::metadata("bounds_sweep", &config, vec![
                    "condition evaluators report scaling quantities; absolute constants unknown",
                ])?,
            )?;
            println!("bounds: {} rows -> {}", rows.len(), paths.raw.display());
            Ok(())
        }
        Command::Phase(common) => {
            init_threads(common.threads)?;
            let mut config: PhaseConfig = load_config(&common.config)?;
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            if let Some(trials) = common.trials {
                config.trials = trials as u32;
            }
            if common.out.is_some() {
                config.out = common.out.clone();
            }
            let grids = experiment::run_phase_transition(&config)?;
            let paths = output::output_paths(&stem(&config.out, "phase"));
            output::write_text(&paths.raw, &output::phase_csv(&grids))?;
            output::write_text(&paths.plot, &output::phase_plot_csv(&grids))?;
            output::write_json(
                &paths.meta,
                &output::metadata("phase", &config, vec![
                    "success threshold is relative l2 error; noiseless equality-mode BP",
                ])?,
            )?;
            println!(
                "phase: {} grids ({} cells each) -> {}",
                grids.len(),
                config.m_count * config.s_count,
                paths.raw.display()
            );
            Ok(())
        }
        Command::Concentration(common) => {
            init_threads(common.threads)?;
            let mut config: ConcentrationConfig = load_config(&common.config)?;
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            if let Some(trials) = common.trials {
                config.trials = trials as usize;
            }
            if common.out.is_some() {
                config.out = common.out.clone();
            }
            let rows = experiment::run_concentration(&config)?;
            let paths = output::output_paths(&stem(&config.out, "concentration"));
            output::write_text(&paths.raw, &output::concentration_csv(&rows))?;
            output::write_text(&paths.plot, &output::concentration_plot_csv(&rows))?;
            output::write_json(
                &paths.meta,
                &output::metadata("concentration", &config, vec![
                    "bound column is 2 exp(-zeta t^2 m) with zeta from the profile set",
                ])?,
            )?;
            let worst = rows
                .iter()
                .map(|r| r.empirical_tail - r.bound)
                .fold(f64::NEG_INFINITY, f64::max);
            println!(
                "concentration: {} grid points, worst (empirical - bound) = {:.3e} -> {}",
                rows.len(),
                worst,
                paths.raw.display()
            );
            if worst > 0.0 {
                return Err(Error::Numerical(
                    "empirical tail exceeded the concentration bound".into(),
                ));
            }
            Ok(())
        }
        Command::Solve(common) => {
            init_threads(common.threads)?;
            let mut config: SolveConfig = load_config(&common.config)?;
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            if common.out.is_some() {
                config.out = common.out.clone();
            }
            let report = experiment::run_solve(&config)?;
            let path = stem(&config.out, "solve").with_extension("json");
            output::write_json(&path, &report)?;
            println!(
                "solve: objective {:.6} residual {:.3e} rel-error {:.3e} ({} iterations, converged: {}) -> {}",
                report.objective,
                report.residual,
                report.relative_error,
                report.iterations,
                report.converged,
                path.display()
            );
            if !report.converged {
                return Err(Error::Numerical(
                    "solver did not converge within the iteration budget".into(),
                ));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}

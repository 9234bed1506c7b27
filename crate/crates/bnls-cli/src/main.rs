//! `bnls` — command-line driver wiring run configs to ground-state solves,
//! mass sweeps, threshold searches, test-function certificates, time
//! evolution, stability experiments, and SVG report emission.
//!
//! Exit codes: 0 ok, 2 numerical failure, 3 config error, 4 missing inputs.
//! Identical config + seed produce byte-identical CSV/JSON artifacts; the
//! SVGs carry no timestamps so they are byte-identical too.

mod commands;
mod config;
mod error;
mod svg;

use clap::{Parser, Subcommand};
use config::RunConfig;
use error::CliError;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "bnls",
    version,
    about = "Normalized ground states of a fourth-order dispersive model on waveguide domains"
)]
struct Cli {
    /// Config file: key = value lines under [model]/[grid]/[solve]/[flow]/[sweep] headers.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override any config key, e.g. --set model.alpha=2.0 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Artifact directory (falls back to config output_dir, then $BNLS_OUTPUT_DIR, then ".").
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Worker threads for sweeps; other commands are single-threaded.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize one functional at one mass; writes a snapshot and a JSON certificate.
    Solve {
        /// Constraint mass.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        c: f64,
        /// m_c, m_1_lambda, m_1_tau, m_hat, m_hat_lambda, m_hat_tau, or m_hat_infinity.
        #[arg(long, default_value = "m_c")]
        problem: String,
        /// Anisotropy coordinate for the fourth-order family.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Anisotropy coordinate for the second-order family.
        #[arg(long, allow_negative_numbers = true)]
        tau: Option<f64>,
    },
    /// Continuation sweep of the energy curve over a mass grid; writes CSV + JSON.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        start: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        stop: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        /// linear or log.
        #[arg(long)]
        spacing: Option<String>,
    },
    /// Bisection for a mass threshold; writes a ThresholdReport JSON.
    Threshold {
        /// c0, c_plus, c_minus, or paired.
        #[arg(long)]
        find: String,
        /// Bracket width target.
        #[arg(long, default_value_t = 1e-2, allow_negative_numbers = true)]
        tol: f64,
        /// Optional starting bracket (both ends or neither).
        #[arg(long, allow_negative_numbers = true)]
        hint_lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        hint_hi: Option<f64>,
    },
    /// Evaluate the tensor-competitor upper bound; writes a gap certificate JSON.
    Testfn {
        /// Tent half-width of the torus profile.
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        /// Mollification radius.
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        /// Anisotropy coordinate at which the bound is evaluated.
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// Propagate an initial state; writes trajectory CSV + final snapshot.
    Evolve {
        /// Mass for the ground-state initial condition (ignored with --input).
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        c: f64,
        /// Snapshot file to evolve instead of solving first.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        t_final: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
    },
    /// Perturb a ground state and watch the orbital distance; writes CSV + JSON.
    Stability {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        c: f64,
        /// Perturbation size in the second-order Sobolev norm.
        #[arg(long, default_value_t = 1e-2, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        t_final: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
    },
    /// Render SVG figures from previously written CSV artifacts; no recomputation.
    Report,
}

fn run(cli: Cli) -> Result<(), CliError> {
    // Fold the ergonomic per-command flags into the generic override list so
    // the resolved config echoed into artifacts reflects every source.
    let mut sets = cli.sets.clone();
    match &cli.cmd {
        Command::Sweep {
            start,
            stop,
            count,
            spacing,
        } => {
            if let Some(v) = start {
                sets.push(format!("sweep.start={v}"));
            }
            if let Some(v) = stop {
                sets.push(format!("sweep.stop={v}"));
            }
            if let Some(v) = count {
                sets.push(format!("sweep.count={v}"));
            }
            if let Some(v) = spacing {
                sets.push(format!("sweep.spacing=\"{v}\""));
            }
        }
        Command::Evolve { t_final, dt, .. } | Command::Stability { t_final, dt, .. } => {
            if let Some(v) = t_final {
                sets.push(format!("flow.t_final={v}"));
            }
            if let Some(v) = dt {
                sets.push(format!("flow.dt={v}"));
            }
        }
        _ => {}
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &sets)?;

    let out = cli
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("BNLS_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;

    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        // A second initialization in the same process is harmless: the pool
        // is already sized, and sweep results are order-stable regardless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    match &cli.cmd {
        Command::Solve {
            c,
            problem,
            lambda,
            tau,
        } => commands::solve(&cfg, &out, *c, problem, *lambda, *tau),
        Command::Sweep { .. } => commands::sweep(&cfg, &out),
        Command::Threshold {
            find,
            tol,
            hint_lo,
            hint_hi,
        } => {
            let hint = match (hint_lo, hint_hi) {
                (Some(lo), Some(hi)) => Some([*lo, *hi]),
                (None, None) => None,
                _ => {
                    return Err(CliError::Config(
                        "--hint-lo and --hint-hi must be given together".into(),
                    ))
                }
            };
            commands::threshold(&cfg, &out, find, *tol, hint)
        }
        Command::Testfn { a, eps, lambda } => commands::testfn(&cfg, &out, *a, *eps, *lambda),
        Command::Evolve { c, input, .. } => commands::evolve(&cfg, &out, *c, input.as_deref()),
        Command::Stability { c, delta, .. } => commands::stability(&cfg, &out, *c, *delta),
        Command::Report => commands::report(&out),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; anything else is a
            // malformed invocation, i.e. a config error.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

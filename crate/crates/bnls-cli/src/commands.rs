//! One function per subcommand. Each writes its artifacts into the output
//! directory, prints a short human summary, and returns through the typed
//! error channel so `main` can map failures to exit codes.

use crate::config::RunConfig;
use crate::error::CliError;
use crate::svg::{line_chart, Series};
use bnls::field::Field;
use bnls::flow;
use bnls::functionals::{HatVariant, Problem};
use bnls::minimizer::{solve_ground_state, solve_hat_ground_state, GroundState};
use bnls::model::ModelParams;
use bnls::profiles::{upper_bound_decomposition, CompetitorConfig};
use bnls::snapshot::{self, SnapshotMeta};
use bnls::thresholds;
use serde::Serialize;
use serde_json::json;
use std::path::Path;

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("serialization: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::MissingInput(format!("write {}: {e}", path.display())))?;
    Ok(())
}

fn envelope<T: Serialize>(cfg: &RunConfig, result: T) -> serde_json::Value {
    json!({
        "version": VERSION,
        "config": cfg,
        "result": result,
    })
}

fn certificate_json(gs: &GroundState) -> serde_json::Value {
    json!({
        "c": gs.c,
        "problem": gs.problem_tag,
        "energy": gs.energy,
        "theta": gs.theta,
        "el_residual": gs.el_residual,
        "poho_residual": gs.poho_residual,
        "grad_y_sq": gs.grad_y_sq,
        "y_flat": gs.y_flat,
        "converged": gs.converged,
        "iterations": gs.iterations,
        "candidates": gs.candidates,
    })
}

/// What `solve` should minimize: the waveguide families or a hat variant.
enum Target {
    Waveguide(Problem),
    Hat(HatVariant),
}

fn resolve_target(
    problem: &str,
    lambda: Option<f64>,
    tau: Option<f64>,
) -> Result<Target, CliError> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| CliError::Config(format!("problem {problem} requires {flag}")))
    };
    Ok(match problem {
        "m_c" => Target::Waveguide(Problem::Full),
        "m_1_lambda" => Target::Waveguide(Problem::LambdaFamily(need(lambda, "--lambda")?)),
        "m_1_tau" => Target::Waveguide(Problem::TauFamily(need(tau, "--tau")?)),
        "m_hat" => Target::Hat(HatVariant::Plain),
        "m_hat_lambda" => Target::Hat(HatVariant::Lambda(need(lambda, "--lambda")?)),
        "m_hat_tau" => Target::Hat(HatVariant::Tau(need(tau, "--tau")?)),
        "m_hat_infinity" => Target::Hat(HatVariant::Infinity),
        other => {
            return Err(CliError::Config(format!(
                "unknown problem {other:?}; expected m_c, m_1_lambda, m_1_tau, \
                 m_hat, m_hat_lambda, m_hat_tau, or m_hat_infinity"
            )))
        }
    })
}

pub fn solve(
    cfg: &RunConfig,
    out: &Path,
    c: f64,
    problem: &str,
    lambda: Option<f64>,
    tau: Option<f64>,
) -> Result<(), CliError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(CliError::Config("c must be positive".into()));
    }
    let p = cfg.params()?;
    let opts = cfg.solve_options()?;
    let gs = match resolve_target(problem, lambda, tau)? {
        Target::Waveguide(prob) => solve_ground_state(&cfg.waveguide_grid()?, &p, prob, c, &opts)?,
        Target::Hat(variant) => solve_hat_ground_state(&cfg.hat_grid()?, &p, variant, c, &opts)?,
    };
    gs.save(&out.join("ground_state.bnls"), &p)?;
    write_json(
        &out.join("solve_certificate.json"),
        &envelope(cfg, certificate_json(&gs)),
    )?;
    println!(
        "solve {problem} at c = {c}: energy = {:.9e}, theta = {:.9e}",
        gs.energy.total, gs.theta
    );
    println!(
        "  el_residual = {:.3e}, poho_residual = {:.3e}, y_flat = {}, iterations = {}",
        gs.el_residual, gs.poho_residual, gs.y_flat, gs.iterations
    );
    Ok(())
}

pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let p = cfg.params()?;
    let grid = cfg.waveguide_grid()?;
    let opts = cfg.solve_options()?;
    let cs = cfg.c_grid()?;
    let records = thresholds::sweep_mass(&grid, &p, &cs, &opts)?;
    thresholds::save_sweep_csv(&out.join("sweep.csv"), &records)?;

    let diagnostics = thresholds::monotonicity_diagnostics(&records);
    let violation = thresholds::sweep_invariant_violation(&records).cloned();
    write_json(
        &out.join("sweep.json"),
        &envelope(
            cfg,
            json!({
                "records": records,
                "diagnostics": diagnostics,
                "reference_violation": violation,
            }),
        ),
    )?;
    let flat = records.iter().filter(|r| r.branch == "flat").count();
    println!(
        "sweep over {} masses in [{}, {}]: {} flat / {} broken / {} unconverged",
        records.len(),
        cs.first().unwrap(),
        cs.last().unwrap(),
        flat,
        records.iter().filter(|r| r.branch == "broken").count(),
        records.iter().filter(|r| r.branch == "unconverged").count(),
    );
    Ok(())
}

pub fn threshold(
    cfg: &RunConfig,
    out: &Path,
    find: &str,
    tol: f64,
    hint: Option<[f64; 2]>,
) -> Result<(), CliError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Config("tol must be positive".into()));
    }
    let p = cfg.params()?;
    let grid = cfg.waveguide_grid()?;
    let opts = cfg.solve_options()?;
    match find {
        "c0" | "c_plus" | "c_minus" => {
            let report = match find {
                "c0" => thresholds::find_c0(&grid, &p, tol, &opts, hint)?,
                "c_plus" => thresholds::find_cplus(&grid, &p, tol, &opts, hint)?,
                _ => thresholds::find_cminus(&grid, &p, tol, &opts, hint)?,
            };
            write_json(
                &out.join(format!("threshold_{}.json", report.name)),
                &envelope(cfg, &report),
            )?;
            println!(
                "threshold {}: bracket [{}, {}] (width {:.3e}, {} evidence points)",
                report.name,
                report.bracket[0],
                report.bracket[1],
                report.width(),
                report.evidence.len()
            );
            if let Some(ls) = report.lambda_star_bracket {
                println!("  anisotropy bracket [{:.6e}, {:.6e}]", ls[0], ls[1]);
            }
        }
        "paired" => {
            let paired = thresholds::probe_cgt0_vs_cneq0(&grid, &p, tol, &opts, hint)?;
            write_json(&out.join("threshold_paired.json"), &envelope(cfg, &paired))?;
            println!("paired threshold probe: overlap = {:?}", paired.overlap);
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown threshold {other:?}; expected c0, c_plus, c_minus, or paired"
            )))
        }
    }
    Ok(())
}

pub fn testfn(cfg: &RunConfig, out: &Path, a: f64, eps: f64, lambda: f64) -> Result<(), CliError> {
    let p = cfg.params()?;
    let competitor = CompetitorConfig {
        grid: cfg.hat_grid()?,
        solve: cfg.solve_options()?,
    };
    let report = upper_bound_decomposition(a, eps, lambda, &p, &competitor)?;
    let certified = report.gap < 0.0;
    write_json(
        &out.join("testfn_certificate.json"),
        &envelope(cfg, json!({ "report": report, "certified": certified })),
    )?;
    println!(
        "test-function gap at a = {a}, eps = {eps}, lambda = {lambda}: {:.6e} ({})",
        report.gap,
        if certified {
            "certifies the strict bound"
        } else {
            "inconclusive at these parameters"
        }
    );
    Ok(())
}

/// Load the initial state from a snapshot, or solve the ground state.
fn initial_state(
    cfg: &RunConfig,
    c: f64,
    input: Option<&Path>,
    p: &ModelParams,
) -> Result<(Field, String), CliError> {
    match input {
        Some(path) => {
            if !path.exists() {
                return Err(CliError::MissingInput(format!(
                    "snapshot {} does not exist",
                    path.display()
                )));
            }
            let (field, meta) = snapshot::read_field(path)?;
            Ok((field, format!("snapshot {} ({})", path.display(), meta.tag)))
        }
        None => {
            if !(c.is_finite() && c > 0.0) {
                return Err(CliError::Config("c must be positive".into()));
            }
            let gs = solve_ground_state(
                &cfg.waveguide_grid()?,
                p,
                Problem::Full,
                c,
                &cfg.solve_options()?,
            )?;
            Ok((gs.u, format!("ground state at c = {c}")))
        }
    }
}

pub fn evolve(cfg: &RunConfig, out: &Path, c: f64, input: Option<&Path>) -> Result<(), CliError> {
    let p = cfg.params()?;
    let fopts = cfg.flow_options()?;
    let (phi0, origin) = initial_state(cfg, c, input, &p)?;
    let traj = flow::propagate(&phi0, &p, &fopts)?;
    std::fs::write(
        out.join("trajectory.csv"),
        flow::trajectory_csv(&traj.samples),
    )?;
    snapshot::write_field(
        &out.join("final_state.bnls"),
        &traj.final_state,
        &SnapshotMeta {
            alpha: p.alpha,
            beta: p.beta,
            tag: format!("evolved from {origin} to t = {}", fopts.t_final),
        },
    )?;
    let first = traj.samples.first().copied();
    let last = traj.samples.last().copied();
    let drift = match (first, last) {
        (Some(a), Some(b)) => json!({
            "mass_rel": (b.mass - a.mass).abs() / a.mass.max(1e-300),
            "energy_rel": (b.energy - a.energy).abs() / a.energy.abs().max(1e-12),
        }),
        _ => json!(null),
    };
    write_json(
        &out.join("evolve.json"),
        &envelope(
            cfg,
            json!({
                "initial": origin,
                "samples": traj.samples.len(),
                "first": first,
                "last": last,
                "drift": drift,
            }),
        ),
    )?;
    println!(
        "evolve from {origin}: {} samples to t = {}",
        traj.samples.len(),
        fopts.t_final
    );
    Ok(())
}

pub fn stability(cfg: &RunConfig, out: &Path, c: f64, delta: f64) -> Result<(), CliError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(CliError::Config("c must be positive".into()));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(CliError::Config("delta must be nonnegative".into()));
    }
    let p = cfg.params()?;
    let gs = solve_ground_state(
        &cfg.waveguide_grid()?,
        &p,
        Problem::Full,
        c,
        &cfg.solve_options()?,
    )?;
    let result = flow::stability_experiment(&gs, delta, cfg.seed, &p, &cfg.flow_options()?)?;
    std::fs::write(out.join("stability.csv"), flow::trajectory_csv(&result.curve))?;
    write_json(&out.join("stability.json"), &envelope(cfg, &result))?;
    println!(
        "stability at c = {c}, delta = {delta}: max orbital distance {:.6e} vs threshold {:.6e} -> {}",
        result.max_orbital_dist,
        result.threshold,
        if result.verdict { "stable" } else { "NOT within threshold" }
    );
    Ok(())
}

/// Column-extracting CSV reader; empty cells become None.
fn read_csv_columns(
    path: &Path,
    names: &[&str],
) -> Result<Vec<Vec<Option<f64>>>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::MissingInput(format!("read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::MissingInput(format!("read {}: {e}", path.display())))?
        .clone();
    let mut idx = Vec::new();
    for name in names {
        let i = headers.iter().position(|h| h == *name).ok_or_else(|| {
            CliError::MissingInput(format!("{}: missing column {name}", path.display()))
        })?;
        idx.push(i);
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))?;
        let row: Vec<Option<f64>> = idx
            .iter()
            .map(|&i| record.get(i).and_then(|s| s.parse::<f64>().ok()))
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

fn paired_series(rows: &[Vec<Option<f64>>], xi: usize, yi: usize) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| match (r[xi], r[yi]) {
            (Some(x), Some(y)) => Some((x, y)),
            _ => None,
        })
        .collect()
}

pub fn report(out: &Path) -> Result<(), CliError> {
    let mut produced = 0usize;

    let sweep_path = out.join("sweep.csv");
    if sweep_path.exists() {
        let rows = read_csv_columns(&sweep_path, &["c", "m_c", "hat_reference", "grad_y_sq"])?;
        let svg = line_chart(
            "Minimal energy vs mass",
            "c",
            "energy",
            &[
                Series {
                    label: "m_c".into(),
                    points: paired_series(&rows, 0, 1),
                },
                Series {
                    label: "flat reference".into(),
                    points: paired_series(&rows, 0, 2),
                },
            ],
        );
        std::fs::write(out.join("report_sweep.svg"), svg)?;
        let svg = line_chart(
            "Torus dependence vs mass",
            "c",
            "|grad_y u|^2",
            &[Series {
                label: "grad_y_sq".into(),
                points: paired_series(&rows, 0, 3),
            }],
        );
        std::fs::write(out.join("report_branch.svg"), svg)?;
        produced += 2;
    }

    for name in ["stability.csv", "trajectory.csv"] {
        let path = out.join(name);
        if !path.exists() {
            continue;
        }
        let rows = read_csv_columns(&path, &["t", "orbital_dist"])?;
        let points = paired_series(&rows, 0, 1);
        if points.is_empty() {
            continue;
        }
        let svg = line_chart(
            "Orbital distance along the flow",
            "t",
            "distance after phase/shift modding",
            &[Series {
                label: "orbital distance".into(),
                points,
            }],
        );
        std::fs::write(out.join("report_orbit.svg"), svg)?;
        produced += 1;
        break;
    }

    if produced == 0 {
        return Err(CliError::MissingInput(format!(
            "no sweep.csv, stability.csv, or trajectory.csv in {}",
            out.display()
        )));
    }
    println!("report: wrote {produced} figure(s) into {}", out.display());
    Ok(())
}

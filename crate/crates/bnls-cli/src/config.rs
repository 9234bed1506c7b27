//! Run configuration: a flat structured-text file (key = value lines under
//! bracketed section headers) merged with command-line overrides.
//!
//! Resolution order is defaults, then the config file, then every `--set
//! section.key=value` flag in the order given. The fully resolved config is
//! embedded in every JSON artifact so a run can be reproduced from its
//! output alone.

use crate::error::CliError;
use bnls::grid::Grid;
use bnls::minimizer::{InitKind, SolveOptions};
use bnls::model::ModelParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            d: 1,
            n: 1,
            alpha: 1.0,
            beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Euclidean box half-width; points live in [-l, l) per axis.
    pub l: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            l: 16.0 * PI,
            n_x: 256,
            n_y: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub dt: f64,
    pub tol_stat: f64,
    pub max_iters: u64,
    pub shift: Option<f64>,
    /// "lifted1d", "torus", "torus:<k>", or "random" (seeded by [run] seed).
    pub init: String,
    pub multistart: bool,
    pub stabilize: bool,
    pub include_cross: bool,
    pub eta_flat: f64,
}

impl Default for SolveSection {
    fn default() -> Self {
        let o = SolveOptions::default();
        SolveSection {
            dt: o.dt,
            tol_stat: o.tol_stat,
            max_iters: o.max_iters,
            shift: o.shift,
            init: "lifted1d".into(),
            multistart: o.multistart,
            stabilize: o.stabilize,
            include_cross: o.include_cross,
            eta_flat: o.eta_flat,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    pub conservation_tol: f64,
    pub linear_only: bool,
}

impl Default for FlowSection {
    fn default() -> Self {
        let o = bnls::flow::FlowOptions::default();
        FlowSection {
            dt: o.dt,
            t_final: o.t_final,
            record_every: o.record_every,
            conservation_tol: o.conservation_tol,
            linear_only: o.linear_only,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// "linear" or "log".
    pub spacing: String,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            start: 0.5,
            stop: 4.0,
            count: 8,
            spacing: "linear".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: Option<String>,
    /// Fixes every stochastic choice: random solver inits and the
    /// stability experiment's perturbation noise.
    pub seed: u64,
    pub model: ModelSection,
    pub grid: GridSection,
    pub solve: SolveSection,
    pub flow: FlowSection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: None,
            seed: bnls::flow::STABILITY_SEED,
            model: ModelSection::default(),
            grid: GridSection::default(),
            solve: SolveSection::default(),
            flow: FlowSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl RunConfig {
    /// Load from an optional file, then apply `section.key=value` overrides.
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<RunConfig, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for s in sets {
            apply_set(&mut table, s)?;
        }
        RunConfig::deserialize(toml::Value::Table(table))
            .map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(
            self.model.d,
            self.model.n,
            self.model.alpha,
            self.model.beta,
        )?)
    }

    /// The waveguide grid named by the [grid] section.
    pub fn waveguide_grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(
            self.model.d,
            self.model.n,
            self.grid.l,
            self.grid.n_x,
            self.grid.n_y,
        )?)
    }

    /// The torus-free companion grid used by hat solves.
    pub fn hat_grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.model.d, 0, self.grid.l, self.grid.n_x, 1)?)
    }

    pub fn solve_options(&self) -> Result<SolveOptions, CliError> {
        let s = &self.solve;
        let init = match s.init.as_str() {
            "lifted1d" => InitKind::Lifted1d,
            "random" => InitKind::Random(self.seed),
            other => match other.strip_prefix("torus") {
                Some("") => InitKind::TorusModulated(1),
                Some(rest) => {
                    let k = rest
                        .strip_prefix(':')
                        .and_then(|v| v.parse::<u32>().ok())
                        .ok_or_else(|| {
                            CliError::Config(format!("solve.init: bad torus spec {other:?}"))
                        })?;
                    InitKind::TorusModulated(k)
                }
                None => {
                    return Err(CliError::Config(format!(
                        "solve.init must be lifted1d, torus[:k], or random, got {other:?}"
                    )))
                }
            },
        };
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return Err(CliError::Config("solve.dt must be positive".into()));
        }
        if !(s.tol_stat.is_finite() && s.tol_stat > 0.0) {
            return Err(CliError::Config("solve.tol_stat must be positive".into()));
        }
        Ok(SolveOptions {
            dt: s.dt,
            tol_stat: s.tol_stat,
            max_iters: s.max_iters,
            shift: s.shift,
            init,
            multistart: s.multistart,
            stabilize: s.stabilize,
            include_cross: s.include_cross,
            eta_flat: s.eta_flat,
        })
    }

    pub fn flow_options(&self) -> Result<bnls::flow::FlowOptions, CliError> {
        let f = &self.flow;
        if !(f.dt.is_finite() && f.dt > 0.0) {
            return Err(CliError::Config("flow.dt must be positive".into()));
        }
        if !(f.t_final.is_finite() && f.t_final > 0.0) {
            return Err(CliError::Config("flow.t_final must be positive".into()));
        }
        Ok(bnls::flow::FlowOptions {
            dt: f.dt,
            t_final: f.t_final,
            record_every: f.record_every,
            conservation_tol: f.conservation_tol,
            linear_only: f.linear_only,
        })
    }

    /// Materialize the sweep's mass grid.
    pub fn c_grid(&self) -> Result<Vec<f64>, CliError> {
        let s = &self.sweep;
        if s.count == 0 {
            return Err(CliError::Config("sweep.count must be at least 1".into()));
        }
        if !(s.start.is_finite() && s.start > 0.0) {
            return Err(CliError::Config("sweep.start must be positive".into()));
        }
        if !(s.stop.is_finite() && s.stop >= s.start) {
            return Err(CliError::Config("sweep.stop must be >= sweep.start".into()));
        }
        if s.count == 1 {
            return Ok(vec![s.start]);
        }
        let m = (s.count - 1) as f64;
        let grid = match s.spacing.as_str() {
            "linear" => (0..s.count)
                .map(|i| s.start + (s.stop - s.start) * i as f64 / m)
                .collect(),
            "log" => {
                let ratio = (s.stop / s.start).ln();
                (0..s.count)
                    .map(|i| s.start * (ratio * i as f64 / m).exp())
                    .collect()
            }
            other => {
                return Err(CliError::Config(format!(
                    "sweep.spacing must be linear or log, got {other:?}"
                )))
            }
        };
        Ok(grid)
    }
}

/// Apply one `section.key=value` override onto the raw TOML table.
fn apply_set(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got {spec:?}")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("--set {spec:?}: empty key")));
    }
    // Parse the value with TOML's own literal grammar; fall back to a string.
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let mut node = table;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        node = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set {key}: {part} is not a section")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

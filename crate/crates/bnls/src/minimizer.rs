//! Constrained ground-state solver: normalized gradient flow with a
//! multiplier-stabilized semi-implicit step.
//!
//! Every problem solved here minimizes
//!
//! ```text
//! (1/2) <A u, u> - (alpha+2)^{-1} ||u||_{alpha+2}^{alpha+2}   over { M(u) = c },
//! ```
//!
//! where A is the Fourier multiplier of the chosen family. One step of the
//! flow solves
//!
//! ```text
//! (1/dt + shift + A) u* = (1/dt + shift - theta(u_k)) u_k + |u_k|^alpha u_k
//! ```
//!
//! diagonally in Fourier space and renormalizes u_{k+1} = sqrt(c) u*/||u*||.
//! Subtracting the multiplier estimate theta(u_k) makes fixed points exact
//! discrete solutions of A u + theta u = |u|^alpha u, independent of dt;
//! without it the renormalization leaves an O(dt) bias in the fixed point.
//! The unstabilized step is kept behind `stabilize: false` for comparison.
//!
//! The shift keeps the implicit denominator positive when the symbol dips
//! below zero (beta < 0), defaulting to 1 - min(symbol) in that case.
//! Convergence is declared on the sup-norm time derivative; certificates
//! (stationary-equation residual, dilation defect, multiplier, y-dependence)
//! are evaluated on the final iterate and stored with the state.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BnlsError, Result};
use crate::field::Field;
use crate::functionals::{self, EnergyBreakdown, HatVariant, Problem, QuadCoeffs};
use crate::grid::Grid;
use crate::model::ModelParams;
use crate::snapshot::{self, SnapshotMeta};
use crate::spectral::{self, Direction};

/// How to seed the flow.
#[derive(Debug, Clone)]
pub enum InitKind {
    /// Gaussian bump in x, constant along the torus. When the family's
    /// second-order coefficient is negative the bump is modulated by the
    /// plane wave that minimizes the linear symbol.
    Lifted1d,
    /// The lifted bump times 1 + cos(k y_1)/2, to give the flow a
    /// y-dependent direction to fall into.
    TorusModulated(u32),
    /// Smooth random field with the given seed.
    Random(u64),
    /// Start from a provided field (renormalized to the requested mass).
    Warm(Field),
}

impl InitKind {
    pub fn tag(&self) -> String {
        match self {
            InitKind::Lifted1d => "lifted-1d".into(),
            InitKind::TorusModulated(k) => format!("torus-modulated({k})"),
            InitKind::Random(s) => format!("random({s})"),
            InitKind::Warm(_) => "warm".into(),
        }
    }
}

/// Solver controls. The defaults converge for every regime exercised in the
/// test suite; tighten `tol_stat` for certificate-grade states.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub dt: f64,
    /// Stop when ||u_{k+1} - u_k||_inf / dt falls below this.
    pub tol_stat: f64,
    pub max_iters: u64,
    /// Implicit-step shift; `None` selects 1 - min(symbol) when the symbol
    /// takes negative values and 0 otherwise.
    pub shift: Option<f64>,
    pub init: InitKind,
    /// Run the full seed menu and keep the lowest-energy result.
    pub multistart: bool,
    /// Subtract the multiplier estimate inside the step (see module doc).
    pub stabilize: bool,
    /// Whether the rescaled families carry their mixed-derivative term.
    pub include_cross: bool,
    /// Threshold on ||grad_y u||^2 / c below which a state is called y-flat.
    pub eta_flat: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            dt: 0.01,
            tol_stat: 1e-9,
            max_iters: 200_000,
            shift: None,
            init: InitKind::Lifted1d,
            multistart: false,
            stabilize: true,
            include_cross: true,
            eta_flat: 1e-8,
        }
    }
}

/// Residual budget separating converged certificates from suspect ones.
pub const EL_RESIDUAL_ACCEPT: f64 = 1e-4;

/// Outcome of one seed when several are raced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub init: String,
    pub energy: f64,
    pub grad_y_sq: f64,
    pub y_flat: bool,
    pub el_residual: f64,
}

/// A computed constrained minimizer with its certificates.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub u: Field,
    /// Mass constraint the state satisfies.
    pub c: f64,
    /// Breakdown of the family's own functional at the state.
    pub energy: EnergyBreakdown,
    /// Lagrange multiplier from pairing the stationary equation with u.
    pub theta: f64,
    /// ||A u + theta u - |u|^alpha u||_2 / ||u||_{H^2}.
    pub el_residual: f64,
    /// Euclidean dilation defect, relative to ||u||_{alpha+2}^{alpha+2}.
    pub poho_residual: f64,
    pub grad_y_sq: f64,
    pub y_flat: bool,
    /// Stationarity reached and el_residual within budget.
    pub converged: bool,
    pub iterations: u64,
    pub problem_tag: String,
    /// All raced seeds (one entry when multistart is off).
    pub candidates: Vec<CandidateSummary>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CertificateRecord {
    c: f64,
    energy: EnergyBreakdown,
    theta: f64,
    el_residual: f64,
    poho_residual: f64,
    grad_y_sq: f64,
    y_flat: bool,
    converged: bool,
    iterations: u64,
    problem_tag: String,
    candidates: Vec<CandidateSummary>,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    std::path::PathBuf::from(s)
}

impl GroundState {
    /// Write the field as a snapshot plus a `<path>.json` certificate sidecar.
    pub fn save(&self, path: &Path, p: &ModelParams) -> Result<()> {
        snapshot::write_field(
            path,
            &self.u,
            &SnapshotMeta {
                alpha: p.alpha,
                beta: p.beta,
                tag: self.problem_tag.clone(),
            },
        )?;
        let record = CertificateRecord {
            c: self.c,
            energy: self.energy,
            theta: self.theta,
            el_residual: self.el_residual,
            poho_residual: self.poho_residual,
            grad_y_sq: self.grad_y_sq,
            y_flat: self.y_flat,
            converged: self.converged,
            iterations: self.iterations,
            problem_tag: self.problem_tag.clone(),
            candidates: self.candidates.clone(),
        };
        std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&record)?)?;
        Ok(())
    }

    /// Read a snapshot and its certificate sidecar back.
    pub fn load(path: &Path) -> Result<(GroundState, SnapshotMeta)> {
        let (u, meta) = snapshot::read_field(path)?;
        let text = std::fs::read_to_string(sidecar_path(path))?;
        let r: CertificateRecord = serde_json::from_str(&text)?;
        Ok((
            GroundState {
                u,
                c: r.c,
                energy: r.energy,
                theta: r.theta,
                el_residual: r.el_residual,
                poho_residual: r.poho_residual,
                grad_y_sq: r.grad_y_sq,
                y_flat: r.y_flat,
                converged: r.converged,
                iterations: r.iterations,
                problem_tag: r.problem_tag,
                candidates: r.candidates,
            },
            meta,
        ))
    }
}

fn normalize_to_mass(mut u: Field, c: f64) -> Result<Field> {
    let m = functionals::mass(&u);
    if !(m.is_finite() && m > 0.0) {
        return Err(BnlsError::ZeroField("initial guess has no mass".into()));
    }
    u.scale((c / m).sqrt());
    Ok(u)
}

fn build_init(
    grid: &Grid,
    coeffs: &QuadCoeffs,
    c: f64,
    kind: &InitKind,
) -> Result<Field> {
    let d = grid.d();
    // Plane-wave frequency minimizing the one-axis linear symbol, used when
    // the second-order coefficient drives mass away from zero frequency.
    let omega = if coeffs.grad_x < 0.0 && coeffs.lap_x > 0.0 {
        (-coeffs.grad_x / (2.0 * coeffs.lap_x)).sqrt()
    } else {
        0.0
    };
    let lifted = |coords: &[f64]| {
        let r2: f64 = coords[..d].iter().map(|x| x * x).sum();
        Complex64::from_polar((-r2).exp(), omega * coords[0])
    };
    let u = match kind {
        InitKind::Lifted1d => Field::from_fn(grid, lifted),
        InitKind::TorusModulated(k) => {
            if grid.n() == 0 {
                Field::from_fn(grid, lifted)
            } else {
                let k = *k as f64;
                Field::from_fn(grid, |coords| {
                    lifted(coords) * (1.0 + 0.5 * (k * coords[d]).cos())
                })
            }
        }
        InitKind::Random(seed) => Field::random_smooth(grid, *seed),
        InitKind::Warm(f) => {
            if f.grid() != grid {
                return Err(BnlsError::GridMismatch(
                    "warm start lives on a different grid".into(),
                ));
            }
            f.clone()
        }
    };
    normalize_to_mass(u, c)
}

/// L^2 residual of the stationary equation against the H^2 norm of u.
fn stationary_residual(grid: &Grid, u: &Field, symbol: &[f64], theta: f64, alpha: f64) -> f64 {
    let mut u_hat = u.data().to_vec();
    let mut f_hat: Vec<Complex64> = u.data().iter().map(|z| z * z.norm().powf(alpha)).collect();
    spectral::fft_nd(grid, &mut u_hat, Direction::Forward);
    spectral::fft_nd(grid, &mut f_hat, Direction::Forward);
    let mut num = 0.0;
    for ((a, uz), fz) in symbol.iter().zip(&u_hat).zip(&f_hat) {
        num += ((a + theta) * uz - fz).norm_sqr();
    }
    num *= grid.parseval_scale();
    (num / spectral::h2_norm_sq(u)).sqrt()
}

struct FlowOutcome {
    u: Field,
    iterations: u64,
    stationary: bool,
}

fn run_flow(
    grid: &Grid,
    p: &ModelParams,
    symbol: &[f64],
    c: f64,
    opts: &SolveOptions,
    init: Field,
) -> Result<FlowOutcome> {
    let shift = opts.shift.unwrap_or_else(|| {
        let min_a = symbol.iter().copied().fold(f64::INFINITY, f64::min);
        if min_a < 0.0 {
            1.0 - min_a
        } else {
            0.0
        }
    });
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(BnlsError::InvalidParams(format!(
            "flow step must be positive, got {}",
            opts.dt
        )));
    }
    let total = grid.total_points();
    let cv = grid.cell_volume();
    let ps = grid.parseval_scale();
    let alpha = p.alpha;
    let inv_dt = 1.0 / opts.dt;

    let mut u = init;
    let mut u_hat = vec![Complex64::new(0.0, 0.0); total];
    let mut f_hat = vec![Complex64::new(0.0, 0.0); total];
    let mut prev_energy = f64::INFINITY;
    let mut rise_streak = 0u32;
    let mut iterations = 0u64;
    let mut stationary = false;

    while iterations < opts.max_iters {
        iterations += 1;

        // Nonlinearity in physical space, with the ||u||_{alpha+2} integral
        // accumulated on the way through.
        let mut lp_int = 0.0;
        for (dst, z) in f_hat.iter_mut().zip(u.data()) {
            let r = z.norm();
            let ra = r.powf(alpha);
            lp_int += ra * r * r;
            *dst = z * ra;
        }
        lp_int *= cv;

        u_hat.copy_from_slice(u.data());
        spectral::fft_nd(grid, &mut u_hat, Direction::Forward);
        spectral::fft_nd(grid, &mut f_hat, Direction::Forward);

        // Quadratic pairing; monitors both the multiplier and the energy.
        let mut pairing = 0.0;
        for (a, z) in symbol.iter().zip(&u_hat) {
            pairing += a * z.norm_sqr();
        }
        pairing *= ps;
        let energy_now = 0.5 * pairing - lp_int / (alpha + 2.0);
        if !energy_now.is_finite() {
            return Err(BnlsError::Diverged {
                suggested_dt: opts.dt / 2.0,
            });
        }
        if energy_now > prev_energy + 1e-9 * prev_energy.abs().max(1.0) {
            rise_streak += 1;
            if rise_streak >= 500 {
                return Err(BnlsError::Diverged {
                    suggested_dt: opts.dt / 2.0,
                });
            }
        } else {
            rise_streak = 0;
        }
        prev_energy = energy_now;

        let theta_k = if opts.stabilize {
            (lp_int - pairing) / c
        } else {
            0.0
        };
        let base = inv_dt + shift - theta_k;
        for ((z, f), a) in u_hat.iter_mut().zip(&f_hat).zip(symbol) {
            *z = (base * *z + f) / (inv_dt + shift + a);
        }
        spectral::fft_nd(grid, &mut u_hat, Direction::Inverse);

        let mut norm_sq = 0.0;
        for z in &u_hat {
            norm_sq += z.norm_sqr();
        }
        norm_sq *= cv;
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(BnlsError::Diverged {
                suggested_dt: opts.dt / 2.0,
            });
        }
        let rho = (c / norm_sq).sqrt();
        let mut sup_step = 0.0f64;
        for (dst, z) in u.data_mut().iter_mut().zip(&u_hat) {
            let next = z * rho;
            sup_step = sup_step.max((next - *dst).norm());
            *dst = next;
        }
        if sup_step * inv_dt < opts.tol_stat {
            stationary = true;
            break;
        }
    }
    Ok(FlowOutcome {
        u,
        iterations,
        stationary,
    })
}

fn certify(
    grid: &Grid,
    p: &ModelParams,
    coeffs: &QuadCoeffs,
    symbol: &[f64],
    c: f64,
    opts: &SolveOptions,
    outcome: FlowOutcome,
    tag: String,
    init_tag: String,
) -> Result<GroundState> {
    let nm = spectral::diff_norms(&outcome.u);
    let lp_int = spectral::integral_abs_pow(&outcome.u, p.alpha + 2.0);
    let theta = (lp_int - coeffs.operator_pairing(&nm)) / c;
    let el_residual = stationary_residual(grid, &outcome.u, symbol, theta, p.alpha);
    if !outcome.stationary {
        return Err(BnlsError::Unconverged {
            iterations: outcome.iterations,
            el_residual,
        });
    }
    let energy = functionals::breakdown_from_parts(&nm, lp_int, p, coeffs);
    let poho = functionals::pohozaev_from_parts(&nm, lp_int, p, coeffs);
    let grad_y_sq = nm.grad_y_sq;
    let y_flat = grad_y_sq <= opts.eta_flat * c;
    let converged = el_residual <= EL_RESIDUAL_ACCEPT;
    let summary = CandidateSummary {
        init: init_tag,
        energy: energy.total,
        grad_y_sq,
        y_flat,
        el_residual,
    };
    Ok(GroundState {
        u: outcome.u,
        c,
        energy,
        theta,
        el_residual,
        poho_residual: poho / lp_int.max(f64::MIN_POSITIVE),
        grad_y_sq,
        y_flat,
        converged,
        iterations: outcome.iterations,
        problem_tag: tag,
        candidates: vec![summary],
    })
}

fn solve_with_coeffs(
    grid: &Grid,
    p: &ModelParams,
    coeffs: &QuadCoeffs,
    c: f64,
    opts: &SolveOptions,
    tag: String,
) -> Result<GroundState> {
    if !(c.is_finite() && c > 0.0) {
        return Err(BnlsError::InvalidParams(format!(
            "mass constraint must be positive, got {c}"
        )));
    }
    let symbol = coeffs.symbol_table(grid);
    let seeds: Vec<InitKind> = if opts.multistart {
        let mut menu = vec![InitKind::Lifted1d];
        if grid.n() > 0 {
            menu.push(InitKind::TorusModulated(1));
        }
        menu.push(InitKind::Random(0xB7A2));
        if let InitKind::Warm(_) = opts.init {
            menu.push(opts.init.clone());
        }
        menu
    } else {
        vec![opts.init.clone()]
    };

    let mut results: Vec<GroundState> = Vec::new();
    let mut last_err: Option<BnlsError> = None;
    for seed in &seeds {
        let init = build_init(grid, coeffs, c, seed)?;
        match run_flow(grid, p, &symbol, c, opts, init).and_then(|out| {
            certify(grid, p, coeffs, &symbol, c, opts, out, tag.clone(), seed.tag())
        }) {
            Ok(gs) => results.push(gs),
            Err(e) => last_err = Some(e),
        }
    }
    if results.is_empty() {
        return Err(last_err.unwrap_or_else(|| {
            BnlsError::InvalidParams("no seeds were attempted".into())
        }));
    }
    let candidates: Vec<CandidateSummary> = results
        .iter()
        .map(|g| g.candidates[0].clone())
        .collect();
    // Lowest energy wins; a y-flat state within 1e-9 of the best is
    // preferred so that exact ties resolve to the symmetric branch.
    let best_energy = results
        .iter()
        .map(|g| g.energy.total)
        .fold(f64::INFINITY, f64::min);
    let pick = results
        .iter()
        .position(|g| g.y_flat && g.energy.total <= best_energy + 1e-9)
        .unwrap_or_else(|| {
            results
                .iter()
                .position(|g| g.energy.total == best_energy)
                .unwrap_or(0)
        });
    let mut chosen = results.swap_remove(pick);
    chosen.candidates = candidates;
    Ok(chosen)
}

/// Minimize the chosen waveguide family at mass c.
pub fn solve_ground_state(
    grid: &Grid,
    p: &ModelParams,
    problem: Problem,
    c: f64,
    opts: &SolveOptions,
) -> Result<GroundState> {
    let coeffs = QuadCoeffs::for_problem(problem, p, opts.include_cross)?;
    solve_with_coeffs(grid, p, &coeffs, c, opts, problem.tag())
}

/// Minimize a torus-free variant at mass c (grid must have n = 0).
pub fn solve_hat_ground_state(
    grid: &Grid,
    p: &ModelParams,
    variant: HatVariant,
    c: f64,
    opts: &SolveOptions,
) -> Result<GroundState> {
    if grid.n() != 0 {
        return Err(BnlsError::InvalidParams(
            "hat problems require a torus-free grid (n = 0)".into(),
        ));
    }
    if let HatVariant::Infinity = variant {
        if p.beta <= 0.0 {
            return Err(BnlsError::InvalidParams(
                "the second-order limit problem needs beta > 0".into(),
            ));
        }
        if p.alpha >= 4.0 / p.d as f64 {
            return Err(BnlsError::InvalidParams(
                "the second-order limit problem needs alpha < 4/d".into(),
            ));
        }
    }
    let coeffs = QuadCoeffs::for_hat(variant, p)?;
    solve_with_coeffs(grid, p, &coeffs, c, opts, variant.tag())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_ground_state_matches_reference_energy() {
        let grid = Grid::new(1, 0, 16.0 * PI, 256, 8).unwrap();
        let p = ModelParams::new(1, 0, 1.0, 0.0).unwrap();
        let opts = SolveOptions::default();
        let gs = solve_hat_ground_state(&grid, &p, HatVariant::Plain, 1.0, &opts).unwrap();
        assert!(gs.converged);
        assert!(gs.el_residual < 1e-6, "el residual {}", gs.el_residual);
        assert!(
            (gs.energy.total + 0.1225446852).abs() < 1e-6,
            "energy {}",
            gs.energy.total
        );
        // The dilation defect of the discrete state floors near 1e-6 at this
        // resolution (box/grid truncation), inside the 1e-5 certificate budget.
        assert!(gs.poho_residual.abs() < 1e-5);
    }

    #[test]
    fn fixed_point_is_independent_of_dt() {
        let grid = Grid::new(1, 0, 16.0 * PI, 128, 8).unwrap();
        let p = ModelParams::new(1, 0, 1.0, 0.0).unwrap();
        let mut a = SolveOptions::default();
        a.tol_stat = 1e-11;
        let mut b = a.clone();
        b.dt = a.dt / 4.0;
        let ga = solve_hat_ground_state(&grid, &p, HatVariant::Plain, 1.0, &a).unwrap();
        let gb = solve_hat_ground_state(&grid, &p, HatVariant::Plain, 1.0, &b).unwrap();
        assert!(
            (ga.energy.total - gb.energy.total).abs() < 1e-9,
            "dt bias {:.3e}",
            (ga.energy.total - gb.energy.total).abs()
        );
    }

    #[test]
    fn unstabilized_step_carries_a_dt_bias() {
        let grid = Grid::new(1, 0, 16.0 * PI, 128, 8).unwrap();
        let p = ModelParams::new(1, 0, 1.0, 0.0).unwrap();
        let mut a = SolveOptions::default();
        a.stabilize = false;
        a.tol_stat = 1e-11;
        let mut b = a.clone();
        b.dt = a.dt / 4.0;
        let ga = solve_hat_ground_state(&grid, &p, HatVariant::Plain, 1.0, &a).unwrap();
        let gb = solve_hat_ground_state(&grid, &p, HatVariant::Plain, 1.0, &b).unwrap();
        let gap = (ga.energy.total - gb.energy.total).abs();
        assert!(gap > 1e-9, "expected a visible dt bias, saw {gap:.3e}");
    }

    #[test]
    fn infinity_variant_guards_its_regime() {
        let grid = Grid::new(1, 0, 16.0 * PI, 128, 8).unwrap();
        let neg = ModelParams::new(1, 0, 1.0, -1.0).unwrap();
        let opts = SolveOptions::default();
        assert!(
            solve_hat_ground_state(&grid, &neg, HatVariant::Infinity, 1.0, &opts).is_err()
        );
        let crit = ModelParams::new(1, 0, 4.0, 1.0).unwrap();
        assert!(
            solve_hat_ground_state(&grid, &crit, HatVariant::Infinity, 1.0, &opts).is_err()
        );
    }

    #[test]
    fn save_and_load_round_trip() {
        let grid = Grid::new(1, 0, 16.0 * PI, 128, 8).unwrap();
        let p = ModelParams::new(1, 0, 1.0, 0.0).unwrap();
        let gs =
            solve_hat_ground_state(&grid, &p, HatVariant::Plain, 1.0, &SolveOptions::default())
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bnls");
        gs.save(&path, &p).unwrap();
        let (back, meta) = GroundState::load(&path).unwrap();
        assert_eq!(back.u.data(), gs.u.data());
        assert_eq!(back.problem_tag, gs.problem_tag);
        assert!((back.energy.total - gs.energy.total).abs() == 0.0);
        assert_eq!(meta.tag, "hat-plain");
    }
}

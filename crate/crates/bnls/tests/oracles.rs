//! Closed-form and frozen-value checks for the functional layer and the
//! ground-state solver.
//!
//! Every expected number here is computable by hand: Gaussian moment
//! integrals, the explicit sech^2 soliton of the second-order limit
//! problem, the exact mass power law obeyed by the torus-free energy
//! curve when the second-order coefficient vanishes, and two frozen
//! solver outputs that pin regressions at a fixed grid.

use bnls::field::Field;
use bnls::functionals::{self, HatVariant, Problem};
use bnls::grid::Grid;
use bnls::minimizer::{solve_ground_state, solve_hat_ground_state, SolveOptions};
use bnls::model::ModelParams;
use bnls::scalings::dilate_x;
use bnls::spectral;
use num_complex::Complex64;
use std::f64::consts::PI;

const L: f64 = 16.0 * PI;

fn waveguide_grid() -> Grid {
    Grid::new(1, 1, L, 512, 8).unwrap()
}

fn line_grid() -> Grid {
    Grid::new(1, 0, L, 512, 1).unwrap()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Moments of exp(-x^2) against its own square: integral of exp(-2x^2)
/// and the derivative norms that follow from it.
struct GaussianFacts {
    i0: f64,
}

impl GaussianFacts {
    fn new() -> Self {
        GaussianFacts {
            i0: (PI / 2.0).sqrt(),
        }
    }
    fn mass(&self) -> f64 {
        self.i0
    }
    fn grad_sq(&self) -> f64 {
        // |u'|^2 = 4 x^2 e^{-2x^2}; second moment of e^{-2x^2} is i0 / 4.
        self.i0
    }
    fn lap_sq(&self) -> f64 {
        // u'' = (4x^2 - 2) e^{-x^2}; expand and use moments 3 i0/16, i0/4, i0.
        3.0 * self.i0
    }
    fn l4(&self) -> f64 {
        (PI / 4.0).sqrt()
    }
}

#[test]
fn gaussian_integrals_match_closed_forms() {
    let grid = waveguide_grid();
    let u = Field::gaussian(&grid);
    let facts = GaussianFacts::new();
    let torus = 2.0 * PI;

    assert!(rel_err(functionals::mass(&u), torus * facts.mass()) < 1e-10);
    assert!(rel_err(spectral::integral_abs_pow(&u, 4.0), torus * facts.l4()) < 1e-10);

    let nm = spectral::diff_norms(&u);
    assert!(rel_err(nm.grad_x_sq, torus * facts.grad_sq()) < 1e-10);
    assert!(rel_err(nm.lap_x_sq, torus * facts.lap_sq()) < 1e-10);
    assert!(nm.grad_y_sq.abs() < 1e-12);
    assert!(nm.lap_y_sq.abs() < 1e-12);
    assert!(nm.mixed_sq.abs() < 1e-12);
    // The joint fourth-order norm of a y-flat field reduces to the x part.
    assert!(rel_err(nm.lap_xy_sq, nm.lap_x_sq) < 1e-12);
}

#[test]
fn gaussian_energies_match_closed_forms() {
    let grid = waveguide_grid();
    let u = Field::gaussian(&grid);
    let facts = GaussianFacts::new();
    let torus = 2.0 * PI;

    // Quartic-only energy at alpha = 2: (1/2) lap - (1/4) l4.
    let p0 = ModelParams::new(1, 1, 2.0, 0.0).unwrap();
    let want0 = torus * (0.5 * facts.lap_sq() - 0.25 * facts.l4());
    assert!(rel_err(functionals::energy(&u, &p0).total, want0) < 1e-10);

    // With a second-order term the gradient enters at weight beta / 2.
    let p2 = ModelParams::new(1, 1, 2.0, 2.0).unwrap();
    let want2 = want0 + torus * facts.grad_sq();
    assert!(rel_err(functionals::energy(&u, &p2).total, want2) < 1e-10);

    // Torus-free variants on the line: no 2 pi factor anywhere.
    let line = line_grid();
    let v = Field::gaussian(&line);
    let plain = functionals::hat_energy(&v, HatVariant::Plain, &p2).unwrap();
    let want_plain = 0.5 * facts.lap_sq() + facts.grad_sq() - 0.25 * facts.l4();
    assert!(rel_err(plain, want_plain) < 1e-10);

    let second = functionals::hat_energy(&v, HatVariant::Infinity, &p2).unwrap();
    let want_second = facts.grad_sq() - 0.25 * facts.l4();
    assert!(rel_err(second, want_second) < 1e-10);

    // The cross term of the anisotropic family is sqrt(lambda) times the
    // mixed derivative norm; for e^{-x^2} cos y that norm is i0 * pi.
    let grid = waveguide_grid();
    let w = Field::from_fn(&grid, |coords| {
        Complex64::new((-coords[0] * coords[0]).exp() * coords[1].cos(), 0.0)
    });
    let lambda = 16.0;
    let on = functionals::energy_lambda(&w, lambda, &p0, true).unwrap().total;
    let off = functionals::energy_lambda(&w, lambda, &p0, false).unwrap().total;
    let want_cross = lambda.sqrt() * facts.i0 * PI;
    assert!(rel_err(on - off, want_cross) < 1e-10);
}

#[test]
fn dilation_derivative_matches_stationarity_functional() {
    // The stationarity defect is, by construction, the first variation of
    // the energy along the mass-preserving dilation t^{d/2} u(t x, y).
    // Check it against a Richardson finite difference of the actual map.
    let grid = waveguide_grid();
    let p = ModelParams::new(1, 1, 1.5, -0.7).unwrap();
    let u = Field::from_fn(&grid, |coords| {
        let x = coords[0];
        let y = coords[1];
        let env = (-0.5 * x * x).exp();
        Complex64::new(env * (1.0 + 0.3 * y.cos()), 0.2 * x * env)
    });

    let energy_at = |t: f64| -> f64 {
        let v = dilate_x(&u, t).unwrap();
        functionals::energy(&v, &p).total
    };
    let diff = |h: f64| (energy_at(1.0 + h) - energy_at(1.0 - h)) / (2.0 * h);
    let h = 1e-3;
    let fd = (4.0 * diff(h) - diff(2.0 * h)) / 3.0;

    let defect = functionals::pohozaev_residual(&u, Problem::Full, &p, true).unwrap();
    assert!(
        rel_err(defect, fd) < 1e-6,
        "dilation derivative {fd} vs defect {defect}"
    );
}

#[test]
fn soliton_closed_form_pins_second_order_variant() {
    // For beta = 1, alpha = 1 the second-order limit problem on the line
    // has the explicit minimizer (3 theta / 2) sech^2(sqrt(theta) x / 2)
    // with mass 6 theta^{3/2}, energy -(9/5) theta^{5/2}, multiplier theta.
    let grid = line_grid();
    let p = ModelParams::new(1, 0, 1.0, 1.0).unwrap();
    let opts = SolveOptions {
        tol_stat: 1e-10,
        ..SolveOptions::default()
    };

    for (c, theta) in [(6.0, 1.0), (3.0, 0.5f64.powf(2.0 / 3.0))] {
        let gs = solve_hat_ground_state(&grid, &p, HatVariant::Infinity, c, &opts).unwrap();
        assert!(gs.converged);
        let want_energy = -(9.0 / 5.0) * theta.powf(2.5);
        assert!(
            rel_err(gs.energy.total, want_energy) < 1e-6,
            "c = {c}: energy {} vs closed form {want_energy}",
            gs.energy.total
        );
        assert!(
            (gs.theta - theta).abs() < 1e-5,
            "c = {c}: multiplier {} vs closed form {theta}",
            gs.theta
        );
    }
}

#[test]
fn frozen_ground_state_regression() {
    // Fixed-grid solver outputs, frozen once and asserted tightly so a
    // behavioral drift anywhere in the pipeline shows up here first.
    let grid = Grid::new(1, 1, L, 256, 8).unwrap();
    let p = ModelParams::new(1, 1, 1.0, 0.0).unwrap();
    let opts = SolveOptions {
        tol_stat: 1e-11,
        ..SolveOptions::default()
    };
    let gs = solve_ground_state(&grid, &p, Problem::Full, 1.0, &opts).unwrap();
    assert!(gs.converged);
    assert!(gs.y_flat);
    assert!(rel_err(gs.energy.total, -0.0428737731) < 1e-7);
    assert!((gs.theta - 0.1347461503).abs() < 1e-7);

    // Flat lift consistency: the same minimum is the torus volume times
    // the torus-free minimum at mass c / (2 pi).
    let line = Grid::new(1, 0, L, 256, 1).unwrap();
    let hat = solve_hat_ground_state(&line, &p, HatVariant::Plain, 1.0 / (2.0 * PI), &opts).unwrap();
    assert!(hat.converged);
    assert!(rel_err(2.0 * PI * hat.energy.total, gs.energy.total) < 1e-8);

    // Frozen torus-free point at unit mass.
    let hat1 = solve_hat_ground_state(&line, &p, HatVariant::Plain, 1.0, &opts).unwrap();
    assert!(hat1.converged);
    assert!(rel_err(hat1.energy.total, -0.122544687711) < 1e-8);

    // For beta = 0, d = 1, alpha = 1 the stationarity relations collapse
    // to theta = (22/7) |m| exactly; discretization leaves a small floor.
    for state in [&gs, &hat1] {
        let want = -(22.0 / 7.0) * state.energy.total;
        assert!(rel_err(state.theta, want) < 1e-5);
    }
}

#[test]
fn hat_curve_obeys_exact_mass_power_law() {
    // With no second-order term the torus-free energy curve collapses
    // under mass rescaling: m(mu) = mu^{e} m(1) with e = (d - 8/alpha - 4)
    // / (d - 8/alpha), an exact identity used by the threshold bisection.
    let grid = line_grid();
    let p = ModelParams::new(1, 0, 1.0, 0.0).unwrap();
    let e = p.energy_exponent_t();
    assert!(rel_err(e, 11.0 / 7.0) < 1e-14);

    let opts = SolveOptions {
        tol_stat: 1e-10,
        ..SolveOptions::default()
    };
    let m1 = solve_hat_ground_state(&grid, &p, HatVariant::Plain, 1.0, &opts)
        .unwrap()
        .energy
        .total;
    for mu in [0.5, 2.0] {
        let m_mu = solve_hat_ground_state(&grid, &p, HatVariant::Plain, mu, &opts)
            .unwrap()
            .energy
            .total;
        assert!(
            rel_err(m_mu, mu.powf(e) * m1) < 1e-7,
            "mu = {mu}: {m_mu} vs {}",
            mu.powf(e) * m1
        );
    }
}

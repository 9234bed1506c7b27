//! Randomized invariants of the functional layer: exact symmetries and
//! identities that must hold for every field, not just hand-picked ones.
//!
//! Grids are kept small (64 x 8) so each case costs a handful of FFTs.

use bnls::field::Field;
use bnls::functionals::{self, Problem, QuadCoeffs};
use bnls::grid::Grid;
use bnls::model::ModelParams;
use bnls::scalings::{verify_scaling_identity, ScalingMap};
use bnls::spectral;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

const L: f64 = 8.0 * PI;

fn small_grid() -> Grid {
    Grid::new(1, 1, L, 64, 8).unwrap()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// A localized random field: band-limited noise under a Gaussian envelope,
/// so box-rescaling maps see negligible boundary mass.
fn localized_field(grid: &Grid, seed: u64) -> Field {
    let mut u = Field::random_smooth(grid, seed);
    let envelope = Field::from_fn(grid, |coords| {
        Complex64::new((-coords[0] * coords[0] / 36.0).exp(), 0.0)
    });
    u.mul_pointwise(&envelope);
    u
}

/// Project onto modes below a quarter of the Nyquist frequency. Fractional
/// spectral translation moves such a field exactly, and the lattice sum of
/// its fourth power is alias-free (band of |u|^4 stays under twice Nyquist),
/// so the quartic energy term is exactly invariant too.
fn quarter_band(u: &Field) -> Field {
    let grid = u.grid();
    let mut spec = spectral::forward_spectrum(u);
    let x_cut = 0.5 * PI / grid.dx();
    let y_cut = 0.25 * grid.n_y() as f64;
    grid.for_each_mode_vec(|flat, xiv, kv| {
        if xiv.iter().any(|x| x.abs() >= x_cut) || kv.iter().any(|k| k.abs() >= y_cut) {
            spec[flat] = Complex64::default();
        }
    });
    spectral::field_from_spectrum(grid, spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mass_scales_quadratically(seed in 0u64..1 << 48, a in 0.1f64..3.0) {
        let grid = small_grid();
        let mut u = Field::random_smooth(&grid, seed);
        let m0 = functionals::mass(&u);
        u.scale(a);
        prop_assert!(rel_err(functionals::mass(&u), a * a * m0) < 1e-12);
    }

    #[test]
    fn translation_leaves_functionals_invariant(
        seed in 0u64..1 << 48,
        sx in -20.0f64..20.0,
        sy in 0.0f64..2.0 * PI,
        beta in -2.0f64..2.0,
    ) {
        let grid = Grid::new(1, 1, L, 128, 16).unwrap();
        let p = ModelParams::new(1, 1, 2.0, beta).unwrap();
        let u = quarter_band(&Field::random_smooth(&grid, seed));
        prop_assert!(functionals::mass(&u) > 1e-3);
        let v = spectral::translate(&u, &[sx, sy]);
        prop_assert!(rel_err(functionals::mass(&v), functionals::mass(&u)) < 1e-10);
        prop_assert!(rel_err(
            functionals::energy(&v, &p).total,
            functionals::energy(&u, &p).total
        ) < 1e-10);
    }

    #[test]
    fn h2_norm_decomposes_into_derivative_norms(seed in 0u64..1 << 48) {
        let grid = small_grid();
        let u = Field::random_smooth(&grid, seed);
        let nm = spectral::diff_norms(&u);
        let assembled =
            functionals::mass(&u) + nm.grad_x_sq + nm.grad_y_sq + nm.lap_xy_sq;
        prop_assert!(rel_err(spectral::h2_norm_sq(&u), assembled) < 1e-10);
    }

    #[test]
    fn family_energies_coincide_at_unit_coordinate(
        seed in 0u64..1 << 48,
        beta in -2.0f64..2.0,
    ) {
        let grid = small_grid();
        let p = ModelParams::new(1, 1, 2.0, beta).unwrap();
        let u = Field::random_smooth(&grid, seed);
        let full = functionals::energy(&u, &p).total;
        let lam = functionals::energy_lambda(&u, 1.0, &p, true).unwrap().total;
        let tau = functionals::energy_tau(&u, 1.0, &p, true).unwrap().total;
        prop_assert!(rel_err(lam, full) < 1e-12);
        prop_assert!(rel_err(tau, full) < 1e-12);
    }

    #[test]
    fn symbol_route_agrees_with_norm_route(
        seed in 0u64..1 << 48,
        beta in -2.0f64..2.0,
        lambda in 0.05f64..20.0,
    ) {
        // <A u, u> computed through the Fourier symbol table must equal
        // twice the quadratic energy assembled from derivative norms.
        let grid = small_grid();
        let p = ModelParams::new(1, 1, 2.0, beta).unwrap();
        let u = Field::random_smooth(&grid, seed);
        let nm = spectral::diff_norms(&u);
        for problem in [Problem::Full, Problem::LambdaFamily(lambda), Problem::TauFamily(lambda)] {
            let coeffs = QuadCoeffs::for_problem(problem, &p, true).unwrap();
            let au = spectral::apply_symbol_table(&u, &coeffs.symbol_table(&grid));
            let pairing = spectral::l2_inner(&au, &u).re;
            prop_assert!(rel_err(pairing, coeffs.operator_pairing(&nm)) < 1e-10);
        }
    }

    #[test]
    fn quad_form_lower_bound_has_no_negative_defect(
        seed in 0u64..1 << 48,
        beta in -3.0f64..3.0,
    ) {
        let grid = small_grid();
        let p = ModelParams::new(1, 1, 2.0, beta).unwrap();
        let u = Field::random_smooth(&grid, seed);
        let scale = 1.0 + functionals::mass(&u) + functionals::quad_form(&u, &p).abs();
        prop_assert!(functionals::quad_form_defect(&u, &p) >= -1e-10 * scale);
    }

    #[test]
    fn scaling_identities_hold_with_cross_terms(
        seed in 0u64..1 << 48,
        amp in 0.5f64..1.5,
    ) {
        let grid = small_grid();
        let p = ModelParams::new(1, 1, 2.0, 0.5).unwrap();
        let mut u = localized_field(&grid, seed);
        u.scale(amp);
        for map in [ScalingMap::FourthOrder, ScalingMap::SecondOrder] {
            let check = verify_scaling_identity(&u, &p, map).unwrap();
            prop_assert!(
                check.residual_with_cross <= 1e-10,
                "map {:?}: residual {}",
                map,
                check.residual_with_cross
            );
            // Dropping the cross term must cost something for a field with
            // genuine joint x-y oscillation.
            prop_assert!(check.residual_without_cross > check.residual_with_cross);
        }
    }
}

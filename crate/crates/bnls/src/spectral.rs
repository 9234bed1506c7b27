//! Fourier-side machinery: N-dimensional FFTs, diagonal symbol application,
//! spectral norms and inner products.
//!
//! Transforms are unnormalized on the forward pass and carry the 1/N factor
//! on the inverse, so a round trip is the identity. FFT plans are cached per
//! thread; fields are immutable values, so everything here is safe to call
//! from parallel sweep workers.
//!
//! Quadrature convention: sums over physical samples are weighted by the
//! cell volume, sums over raw spectral coefficients by cellvol/N ("Parseval
//! scale"), which makes both sides of Parseval's identity the same L^2
//! integral over the truncated domain.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::grid::Grid;

/// Transform direction for [`fft_nd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
}

impl PlanCache {
    fn new() -> Self {
        PlanCache {
            planner: FftPlanner::new(),
            plans: HashMap::new(),
            scratch: Vec::new(),
        }
    }

    fn plan(&mut self, len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        let planner = &mut self.planner;
        self.plans
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    }
}

thread_local! {
    static PLAN_CACHE: RefCell<PlanCache> = RefCell::new(PlanCache::new());
}

/// In-place N-dimensional FFT over every axis of the grid.
pub fn fft_nd(grid: &Grid, data: &mut [Complex64], dir: Direction) {
    let shape = grid.shape();
    let total = grid.total_points();
    assert_eq!(data.len(), total, "data length must match the grid");
    let inverse = dir == Direction::Inverse;

    PLAN_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        let rank = shape.len();
        for axis in 0..rank {
            let len = shape[axis];
            if len == 1 {
                continue;
            }
            let plan = cache.plan(len, inverse);
            let need = plan.get_inplace_scratch_len();
            if cache.scratch.len() < need {
                cache.scratch.resize(need, Complex64::default());
            }
            let stride: usize = shape[axis + 1..].iter().product();
            if stride == 1 {
                // last axis: lines are already contiguous
                plan.process_with_scratch(data, &mut cache.scratch);
            } else {
                // gather each block's strided lines into contiguous rows,
                // batch-transform, scatter back
                let block = len * stride;
                let mut buf = vec![Complex64::default(); block];
                for base in (0..total).step_by(block) {
                    let src = &mut data[base..base + block];
                    for i in 0..stride {
                        for j in 0..len {
                            buf[i * len + j] = src[j * stride + i];
                        }
                    }
                    plan.process_with_scratch(&mut buf, &mut cache.scratch);
                    for i in 0..stride {
                        for j in 0..len {
                            src[j * stride + i] = buf[i * len + j];
                        }
                    }
                }
            }
        }
    });

    if inverse {
        let scale = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Forward transform of a field into raw spectral coefficients.
pub fn forward_spectrum(u: &Field) -> Vec<Complex64> {
    let mut spec = u.data().to_vec();
    fft_nd(u.grid(), &mut spec, Direction::Forward);
    spec
}

/// Inverse transform of raw coefficients back to a field.
pub fn field_from_spectrum(grid: &Grid, mut spec: Vec<Complex64>) -> Field {
    fft_nd(grid, &mut spec, Direction::Inverse);
    Field::from_data(grid, spec).expect("spectrum length matches grid")
}

/// Apply a Fourier multiplier given as a function of the frequency vectors
/// (xi over unbounded axes, k over torus axes).
pub fn apply_symbol(u: &Field, symbol: impl Fn(&[f64], &[f64]) -> Complex64) -> Field {
    let grid = u.grid();
    let mut spec = forward_spectrum(u);
    grid.for_each_mode_vec(|flat, xiv, kv| {
        spec[flat] *= symbol(xiv, kv);
    });
    field_from_spectrum(grid, spec)
}

/// Apply a precomputed real multiplier table (radial symbols).
pub fn apply_symbol_table(u: &Field, table: &[f64]) -> Field {
    let grid = u.grid();
    assert_eq!(table.len(), grid.total_points());
    let mut spec = forward_spectrum(u);
    for (v, s) in spec.iter_mut().zip(table) {
        *v *= *s;
    }
    field_from_spectrum(grid, spec)
}

/// Translate the field by `shifts` (one entry per axis, x axes first):
/// returns u(. - shifts), realized exactly on the Fourier side.
pub fn translate(u: &Field, shifts: &[f64]) -> Field {
    let grid = u.grid();
    assert_eq!(shifts.len(), grid.rank());
    let d = grid.d();
    let mut spec = forward_spectrum(u);
    grid.for_each_mode_vec(|flat, xiv, kv| {
        let mut phase = 0.0;
        for (a, xi) in xiv.iter().enumerate() {
            phase -= xi * shifts[a];
        }
        for (b, k) in kv.iter().enumerate() {
            phase -= k * shifts[d + b];
        }
        spec[flat] *= Complex64::from_polar(1.0, phase);
    });
    field_from_spectrum(grid, spec)
}

/// Squared L^2 norm by physical-space quadrature.
pub fn l2_norm_sq(u: &Field) -> f64 {
    let cv = u.grid().cell_volume();
    u.data().iter().map(|v| v.norm_sqr()).sum::<f64>() * cv
}

/// Integral of |u|^p by the grid quadrature rule.
pub fn integral_abs_pow(u: &Field, p: f64) -> f64 {
    let cv = u.grid().cell_volume();
    if p == 2.0 {
        return l2_norm_sq(u);
    }
    u.data()
        .iter()
        .map(|v| v.norm_sqr().powf(p / 2.0))
        .sum::<f64>()
        * cv
}

/// L^p norm, (integral of |u|^p)^(1/p).
pub fn lp_norm(u: &Field, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm requires p >= 1");
    integral_abs_pow(u, p).powf(1.0 / p)
}

/// L^2 inner product <u, v> = integral of u * conj(v).
pub fn l2_inner(u: &Field, v: &Field) -> Complex64 {
    debug_assert_eq!(u.data().len(), v.data().len());
    let cv = u.grid().cell_volume();
    let mut acc = Complex64::default();
    for (a, b) in u.data().iter().zip(v.data()) {
        acc += a * b.conj();
    }
    acc * cv
}

/// Squared H^2 norm: ||u||^2 + ||grad u||^2 + ||Delta u||^2, spectrally.
pub fn h2_norm_sq(u: &Field) -> f64 {
    let grid = u.grid();
    let spec = forward_spectrum(u);
    let scale = grid.parseval_scale();
    let mut acc = 0.0;
    grid.for_each_mode(|flat, xi2, k2| {
        let m2 = xi2 + k2;
        acc += (1.0 + m2 + m2 * m2) * spec[flat].norm_sqr();
    });
    acc * scale
}

/// The six split pieces of the second-derivative quadratic forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffNorms {
    /// ||Delta_x u||^2
    pub lap_x_sq: f64,
    /// ||Delta_y u||^2
    pub lap_y_sq: f64,
    /// ||Delta_{x,y} u||^2
    pub lap_xy_sq: f64,
    /// ||grad_x u||^2
    pub grad_x_sq: f64,
    /// ||grad_y u||^2
    pub grad_y_sq: f64,
    /// ||grad_x grad_y u||^2, summed over all mixed second partials
    pub mixed_sq: f64,
}

/// Compute all derivative norms from one forward transform.
pub fn diff_norms(u: &Field) -> DiffNorms {
    let grid = u.grid();
    let spec = forward_spectrum(u);
    let scale = grid.parseval_scale();
    let mut lap_x = 0.0;
    let mut lap_y = 0.0;
    let mut lap_xy = 0.0;
    let mut grad_x = 0.0;
    let mut grad_y = 0.0;
    let mut mixed = 0.0;
    grid.for_each_mode(|flat, xi2, k2| {
        let w = spec[flat].norm_sqr();
        lap_x += xi2 * xi2 * w;
        lap_y += k2 * k2 * w;
        let m2 = xi2 + k2;
        lap_xy += m2 * m2 * w;
        grad_x += xi2 * w;
        grad_y += k2 * w;
        mixed += xi2 * k2 * w;
    });
    DiffNorms {
        lap_x_sq: lap_x * scale,
        lap_y_sq: lap_y * scale,
        lap_xy_sq: lap_xy * scale,
        grad_x_sq: grad_x * scale,
        grad_y_sq: grad_y * scale,
        mixed_sq: mixed * scale,
    }
}

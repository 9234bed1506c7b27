//! Discretization of the product domain R^d x T^n.
//!
//! Each unbounded axis is truncated to [-L, L) and periodized with N_x
//! equispaced points; each torus axis carries N_y points on [0, 2pi). The
//! default L = 16 pi keeps Gaussian-scale tails far below round-off, so the
//! periodization is invisible to every desk-scale experiment. Frequencies
//! are integer multiples of pi/L on unbounded axes and plain integers on
//! torus axes; all differential operators downstream are diagonal in this
//! basis.
//!
//! A grid with n = 0 represents a pure Euclidean domain R^d and is what the
//! hatted (torus-free) functionals and solvers run on.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{BnlsError, Result};

/// Default cap on d + n; desk-scale experiments stay within three axes.
pub const DIM_GUARD: usize = 3;

/// Serializable parameter record from which a grid is rebuilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N_x")]
    pub n_x: usize,
    #[serde(rename = "N_y")]
    pub n_y: usize,
}

/// Equispaced tensor grid on [-L, L)^d x [0, 2pi)^n with frequency tables.
///
/// Sample layout is row-major with the last axis fastest; the d unbounded
/// axes come first, then the n torus axes.
#[derive(Debug, Clone)]
pub struct Grid {
    d: usize,
    n: usize,
    l: f64,
    n_x: usize,
    n_y: usize,
    /// Frequencies for one unbounded axis in FFT order, multiples of pi/L.
    xi: Arc<Vec<f64>>,
    /// Integer wavenumbers for one torus axis in FFT order.
    ky: Arc<Vec<f64>>,
    shape: Vec<usize>,
    total: usize,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec() == other.spec()
    }
}

pub(crate) fn fft_index(i: usize, len: usize) -> i64 {
    if i < len / 2 {
        i as i64
    } else {
        i as i64 - len as i64
    }
}

impl Grid {
    /// Build a grid, validating sizes against the default dimension guard.
    pub fn new(d: usize, n: usize, l: f64, n_x: usize, n_y: usize) -> Result<Self> {
        Self::with_guard(d, n, l, n_x, n_y, DIM_GUARD)
    }

    /// Build a grid with an explicit cap on d + n.
    pub fn with_guard(
        d: usize,
        n: usize,
        l: f64,
        n_x: usize,
        n_y: usize,
        guard: usize,
    ) -> Result<Self> {
        if d < 1 {
            return Err(BnlsError::InvalidGrid("d must be at least 1".into()));
        }
        if d + n > guard {
            return Err(BnlsError::InvalidGrid(format!(
                "d + n = {} exceeds the dimension guard {guard}",
                d + n
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(BnlsError::InvalidGrid(format!("L must be positive, got {l}")));
        }
        if !n_x.is_power_of_two() || n_x < 8 {
            return Err(BnlsError::InvalidGrid(format!(
                "N_x must be a power of two >= 8, got {n_x}"
            )));
        }
        let n_y = if n == 0 { 1 } else { n_y };
        if n > 0 && (!n_y.is_power_of_two() || n_y < 8) {
            return Err(BnlsError::InvalidGrid(format!(
                "N_y must be a power of two >= 8, got {n_y}"
            )));
        }

        let xi: Vec<f64> = (0..n_x).map(|i| fft_index(i, n_x) as f64 * PI / l).collect();
        let ky: Vec<f64> = (0..n_y).map(|i| fft_index(i, n_y) as f64).collect();
        let mut shape = vec![n_x; d];
        shape.extend(std::iter::repeat(n_y).take(n));
        let total = shape.iter().product();
        Ok(Grid {
            d,
            n,
            l,
            n_x,
            n_y,
            xi: Arc::new(xi),
            ky: Arc::new(ky),
            shape,
            total,
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.d, spec.n, spec.l, spec.n_x, spec.n_y)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            d: self.d,
            n: self.n,
            l: self.l,
            n_x: self.n_x,
            n_y: self.n_y,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-length of the truncated box per unbounded axis.
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    /// Number of axes, d + n.
    pub fn rank(&self) -> usize {
        self.d + self.n
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn total_points(&self) -> usize {
        self.total
    }

    /// Grid spacing on unbounded axes, 2L/N_x.
    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.n_x as f64
    }

    /// Grid spacing on torus axes, 2pi/N_y.
    pub fn dy(&self) -> f64 {
        2.0 * PI / self.n_y as f64
    }

    /// Volume of one grid cell, dx^d * dy^n.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.d as i32) * self.dy().powi(self.n as i32)
    }

    /// Factor turning a sum over raw FFT coefficients |u_hat|^2 into the
    /// L^2 quadrature of |u|^2 (cell volume over total point count).
    pub fn parseval_scale(&self) -> f64 {
        self.cell_volume() / self.total as f64
    }

    /// Frequency table for one unbounded axis, FFT ordering.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Integer wavenumber table for one torus axis, FFT ordering.
    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    /// Frequency table for the given axis (unbounded first, then torus).
    pub fn axis_freq(&self, axis: usize) -> &[f64] {
        if axis < self.d {
            &self.xi
        } else {
            &self.ky
        }
    }

    /// Physical coordinates along one unbounded axis, -L + j dx.
    pub fn x_coords(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| -self.l + j as f64 * self.dx()).collect()
    }

    /// Physical coordinates along one torus axis, j dy in [0, 2pi).
    pub fn y_coords(&self) -> Vec<f64> {
        (0..self.n_y).map(|j| j as f64 * self.dy()).collect()
    }

    /// Visit every sample in layout order with its coordinate vector
    /// (x axes first, then y axes).
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let xs = self.x_coords();
        let ys = self.y_coords();
        let rank = self.rank();
        let mut idx = vec![0usize; rank];
        let mut coords = vec![0.0f64; rank];
        for a in 0..rank {
            coords[a] = if a < self.d { xs[0] } else { ys[0] };
        }
        for flat in 0..self.total {
            f(flat, &coords);
            // advance the mixed-radix counter, last axis fastest
            for a in (0..rank).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] {
                    coords[a] = if a < self.d { xs[idx[a]] } else { ys[idx[a]] };
                    break;
                }
                idx[a] = 0;
                coords[a] = if a < self.d { xs[0] } else { ys[0] };
            }
        }
    }

    /// Visit every Fourier mode in layout order with (|xi|^2, |k|^2) for
    /// that mode; this is what all radial symbols are built from.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, f64, f64)) {
        let rank = self.rank();
        let mut idx = vec![0usize; rank];
        for flat in 0..self.total {
            let mut xi2 = 0.0f64;
            let mut k2 = 0.0f64;
            for a in 0..rank {
                let v = self.axis_freq(a)[idx[a]];
                if a < self.d {
                    xi2 += v * v;
                } else {
                    k2 += v * v;
                }
            }
            f(flat, xi2, k2);
            for a in (0..rank).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Visit every Fourier mode with its full frequency vectors
    /// (xi per unbounded axis, k per torus axis).
    pub fn for_each_mode_vec(&self, mut f: impl FnMut(usize, &[f64], &[f64])) {
        let rank = self.rank();
        let mut idx = vec![0usize; rank];
        let mut xiv = vec![0.0f64; self.d];
        let mut kv = vec![0.0f64; self.n];
        for a in 0..rank {
            if a < self.d {
                xiv[a] = self.xi[0];
            } else {
                kv[a - self.d] = self.ky[0];
            }
        }
        for flat in 0..self.total {
            f(flat, &xiv, &kv);
            for a in (0..rank).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] {
                    if a < self.d {
                        xiv[a] = self.xi[idx[a]];
                    } else {
                        kv[a - self.d] = self.ky[idx[a]];
                    }
                    break;
                }
                idx[a] = 0;
                if a < self.d {
                    xiv[a] = self.xi[0];
                } else {
                    kv[a - self.d] = self.ky[0];
                }
            }
        }
    }

    /// Build a real radial symbol table s(|xi|^2, |k|^2) over all modes.
    pub fn symbol_table(&self, s: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0f64; self.total];
        self.for_each_mode(|flat, xi2, k2| out[flat] = s(xi2, k2));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_matches_definitions() {
        let g = Grid::new(1, 1, 16.0 * PI, 256, 64).unwrap();
        assert!((g.dx() - PI / 8.0).abs() < 1e-15);
        assert!((g.dy() - PI / 32.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(1, 1, 16.0 * PI, 7, 64).is_err());
        assert!(Grid::new(1, 1, 16.0 * PI, 512, 48).is_err());
        assert!(Grid::new(1, 1, -1.0, 512, 64).is_err());
        assert!(Grid::new(2, 2, 16.0 * PI, 16, 16).is_err());
        assert!(Grid::new(0, 1, 16.0 * PI, 16, 16).is_err());
    }

    #[test]
    fn sample_count() {
        let g = Grid::new(2, 1, 8.0 * PI, 128, 32).unwrap();
        assert_eq!(g.total_points(), 128 * 128 * 32);
    }

    #[test]
    fn mode_iteration_consistent() {
        let g = Grid::new(1, 1, 4.0 * PI, 16, 8).unwrap();
        let mut via_pairs = vec![(0.0, 0.0); g.total_points()];
        g.for_each_mode(|flat, xi2, k2| via_pairs[flat] = (xi2, k2));
        g.for_each_mode_vec(|flat, xiv, kv| {
            let xi2: f64 = xiv.iter().map(|v| v * v).sum();
            let k2: f64 = kv.iter().map(|v| v * v).sum();
            assert!((via_pairs[flat].0 - xi2).abs() < 1e-12);
            assert!((via_pairs[flat].1 - k2).abs() < 1e-12);
        });
    }

    #[test]
    fn euclidean_grid_has_no_torus_axes() {
        let g = Grid::new(1, 0, 16.0 * PI, 256, 0).unwrap();
        assert_eq!(g.rank(), 1);
        assert_eq!(g.total_points(), 256);
        assert_eq!(g.n_y(), 1);
    }
}

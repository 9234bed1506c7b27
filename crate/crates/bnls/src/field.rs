//! Complex-valued samples on a grid: the unknown u or phi.
//!
//! Fields own their sample vector (row-major, last axis fastest) together
//! with a copy of the grid, so they can be moved between threads and
//! serialized without external bookkeeping. All mutating helpers preserve
//! the sample count; finiteness is checked where numerically meaningful.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BnlsError, Result};
use crate::grid::Grid;
use crate::spectral;

/// Complex function samples on a [`Grid`].
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    data: Vec<Complex64>,
}

impl Field {
    /// The zero field.
    pub fn zeros(grid: &Grid) -> Self {
        Field {
            grid: grid.clone(),
            data: vec![Complex64::default(); grid.total_points()],
        }
    }

    /// Build from a closure over physical coordinates (x axes, then y axes).
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut data = vec![Complex64::default(); grid.total_points()];
        grid.for_each_point(|flat, coords| data[flat] = f(coords));
        Field {
            grid: grid.clone(),
            data,
        }
    }

    /// Build from a real-valued closure over physical coordinates.
    pub fn from_real_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |c| Complex64::new(f(c), 0.0))
    }

    /// Wrap an existing sample vector; the length must match the grid.
    pub fn from_data(grid: &Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.total_points() {
            return Err(BnlsError::GridMismatch(format!(
                "sample count {} does not match grid ({})",
                data.len(),
                grid.total_points()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            data,
        })
    }

    /// The standard y-flat Gaussian bump exp(-|x|^2).
    pub fn gaussian(grid: &Grid) -> Self {
        let d = grid.d();
        Self::from_real_fn(grid, |c| {
            let r2: f64 = c[..d].iter().map(|x| x * x).sum();
            (-r2).exp()
        })
    }

    /// Deterministic smooth random field: band-limited spectral noise under
    /// a radial frequency envelope, localized in x by a Gaussian window and
    /// normalized to unit mass. Generic in y (nonzero torus modes) whenever
    /// the grid has torus axes.
    pub fn random_smooth(grid: &Grid, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = vec![Complex64::default(); grid.total_points()];
        // fill low modes only, with a smooth radial decay
        let sigma2 = 2.0 * 1.5 * 1.5;
        grid.for_each_mode(|flat, xi2, k2| {
            let m2 = xi2 + k2;
            let env = (-m2 / sigma2).exp();
            if env > 1e-12 {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                spec[flat] = Complex64::new(re, im) * env;
            }
        });
        spectral::fft_nd(grid, &mut spec, spectral::Direction::Inverse);
        let mut field = Field {
            grid: grid.clone(),
            data: spec,
        };
        // localize so dilation and tail-sensitive tests see a decaying field
        let d = grid.d();
        let w = grid.l() / 3.0;
        let window = Self::from_real_fn(grid, |c| {
            let r2: f64 = c[..d].iter().map(|x| (x / w) * (x / w)).sum();
            (-r2).exp()
        });
        field.mul_pointwise(&window);
        let m = spectral::l2_norm_sq(&field);
        if m > 0.0 {
            field.scale(1.0 / m.sqrt());
        }
        field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Error unless the two fields share a grid.
    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(BnlsError::GridMismatch(
                "fields live on different grids".into(),
            ))
        }
    }

    /// Multiply every sample by a real scalar.
    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Multiply every sample by a complex scalar.
    pub fn scale_complex(&mut self, s: Complex64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// self += a * other, sample-wise.
    pub fn add_scaled(&mut self, a: Complex64, other: &Field) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (v, w) in self.data.iter_mut().zip(&other.data) {
            *v += a * w;
        }
    }

    /// Pointwise product with another field.
    pub fn mul_pointwise(&mut self, other: &Field) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (v, w) in self.data.iter_mut().zip(&other.data) {
            *v *= w;
        }
    }

    /// Largest sample modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when every sample is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

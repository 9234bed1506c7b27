//! Equation parameters (d, n, alpha, beta) and the derived quantities that
//! depend on nothing but them: regime classification, scaling exponents,
//! the mass-to-dilation maps, and the limiting multiplier coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{BnlsError, Result};

/// Parameter regimes matching the qualitative phase structure of the
/// ground-state problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// beta = 0: scale-invariant reduction to the unit-mass lambda family.
    BetaZero,
    /// beta > 0 with alpha < min(8/(d+n), 4/d): negative energy at every
    /// mass, minimizers for all c.
    BetaPositiveLow,
    /// beta > 0 with alpha in [4/d, 8/(d+n)): zero energy up to an onset
    /// mass c_plus, negative beyond it.
    BetaPositiveOnset,
    /// beta < 0: energy bounded below by -beta^2 c/8; the onset c_minus
    /// tracks where the bound is beaten.
    BetaNegative,
}

/// The model: dimensions and coefficients of the equation
/// i dphi/dt - Delta^2 phi + beta Delta phi + |phi|^alpha phi = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Unbounded (Euclidean) axes.
    pub d: usize,
    /// Torus axes.
    pub n: usize,
    /// Nonlinearity exponent, alpha > 0.
    pub alpha: f64,
    /// Second-order dispersion coefficient.
    pub beta: f64,
}

impl ModelParams {
    pub fn new(d: usize, n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if d < 1 {
            return Err(BnlsError::InvalidParams("d must be at least 1".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(BnlsError::InvalidParams(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !beta.is_finite() {
            return Err(BnlsError::InvalidParams("beta must be finite".into()));
        }
        Ok(ModelParams { d, n, alpha, beta })
    }

    /// Mass-subcritical means alpha < 8/(d+n); outside it the energy is
    /// unbounded below on the mass sphere and solves are not meaningful.
    pub fn is_mass_subcritical(&self) -> bool {
        self.alpha < 8.0 / (self.d + self.n) as f64
    }

    /// Advisory message when the parameters leave the subcritical regime
    /// (callers warn, they do not reject).
    pub fn subcritical_warning(&self) -> Option<String> {
        if self.is_mass_subcritical() {
            None
        } else {
            Some(format!(
                "alpha = {} is not mass-subcritical for d + n = {} (needs alpha < {})",
                self.alpha,
                self.d + self.n,
                8.0 / (self.d + self.n) as f64
            ))
        }
    }

    pub fn regime(&self) -> Regime {
        if self.beta == 0.0 {
            Regime::BetaZero
        } else if self.beta < 0.0 {
            Regime::BetaNegative
        } else {
            let cut = (8.0 / (self.d + self.n) as f64).min(4.0 / self.d as f64);
            if self.alpha < cut {
                Regime::BetaPositiveLow
            } else {
                Regime::BetaPositiveOnset
            }
        }
    }

    /// Torus volume (2 pi)^n.
    pub fn torus_volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.n as i32)
    }

    /// Dilation parameter of the fourth-order reduction, c^(1/(d - 8/alpha)).
    pub fn kappa_c(&self, c: f64) -> f64 {
        c.powf(1.0 / (self.d as f64 - 8.0 / self.alpha))
    }

    /// Dilation parameter of the second-order reduction, c^(1/(d - 4/alpha)).
    pub fn gamma_c(&self, c: f64) -> f64 {
        c.powf(1.0 / (self.d as f64 - 4.0 / self.alpha))
    }

    /// Anisotropy coordinate of the fourth-order family, kappa_c^4.
    pub fn lambda_of_c(&self, c: f64) -> f64 {
        self.kappa_c(c).powi(4)
    }

    /// Anisotropy coordinate of the second-order family, gamma_c^2.
    pub fn tau_of_c(&self, c: f64) -> f64 {
        self.gamma_c(c).powi(2)
    }

    /// Energy exponent of the fourth-order reduction,
    /// (d - 8/alpha - 4)/(d - 8/alpha).
    pub fn energy_exponent_t(&self) -> f64 {
        let s = self.d as f64 - 8.0 / self.alpha;
        (s - 4.0) / s
    }

    /// Energy exponent of the second-order reduction,
    /// (d - 4/alpha - 2)/(d - 4/alpha).
    pub fn energy_exponent_s(&self) -> f64 {
        let s = self.d as f64 - 4.0 / self.alpha;
        (s - 2.0) / s
    }

    /// Coefficient of the large-anisotropy multiplier limit of the
    /// fourth-order family: -2(alpha d - 4 alpha - 8)/(alpha d - 8).
    pub fn theta_bar_coeff(&self) -> f64 {
        let ad = self.alpha * self.d as f64;
        -2.0 * (ad - 4.0 * self.alpha - 8.0) / (ad - 8.0)
    }

    /// Coefficient of the large-anisotropy multiplier limit of the
    /// second-order family: -2(alpha d - 2 alpha - 4)/(alpha d - 4).
    pub fn theta_hat_coeff(&self) -> f64 {
        let ad = self.alpha * self.d as f64;
        -2.0 * (ad - 2.0 * self.alpha - 4.0) / (ad - 4.0)
    }
}

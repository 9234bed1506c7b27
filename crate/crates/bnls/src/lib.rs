//! Numerical toolkit for normalized ground states of the focusing
//! mass-subcritical biharmonic NLS
//!
//! ```text
//! i dphi/dt - Delta^2 phi + beta Delta phi + |phi|^alpha phi = 0
//! ```
//!
//! on the waveguide R^d x T^n (torus period 2 pi). The library discretizes
//! the product domain pseudospectrally, evaluates the mass/energy functionals
//! and their anisotropically rescaled families, solves the constrained
//! minimization problems by normalized gradient flow, applies the dilation
//! maps that reduce mass spheres to unit mass, constructs explicit competitor
//! functions, locates bifurcation thresholds by continuation and bisection,
//! and time-integrates the equation by Strang splitting for orbital-stability
//! experiments.

pub mod error;
pub mod field;
pub mod flow;
pub mod functionals;
pub mod grid;
pub mod minimizer;
pub mod model;
pub mod profiles;
pub mod scalings;
pub mod snapshot;
pub mod spectral;
pub mod thresholds;

pub use error::BnlsError;
pub use field::Field;
pub use grid::Grid;
pub use model::ModelParams;

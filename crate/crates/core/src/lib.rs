//! Finite-dimensional variational interpolation with Sobolev-weighted
//! spectral densities.
//!
//! A function is represented by its coefficients on a symmetric frequency
//! lattice; fitting minimizes `‖P_X φ − Y‖² + λ Σ_J ⟨ξ_J⟩^α |φ_J|²`.
//! Alongside the solvers live a closed-form one-point reference, the
//! Gaussian critical-exponent analysis and the RBF construction that drives
//! the norm to zero in the subcritical regime.

pub mod closed_form;
pub mod critical;
pub mod error;
pub mod harness;
pub mod quadrature;
pub mod spectral;
pub mod subcritical;
pub mod tikhonov;

pub use num_complex;
pub use closed_form::{closed_form_h, closed_form_phi, ClosedFormParams};
pub use error::{Error, Result};
pub use spectral::{Backend, Dataset, FrequencyGrid, SolveConfig, SpectralCoefficients};
pub use tikhonov::{assemble, fit, solve, AssembledSystem, FittedModel, SinglePointReduction};

//! Closed-form minimizer of the one-point, one-dimensional problem.
//!
//! With `X = [0]`, `Y = [2]`, even coefficients and `φ(0) = 0`, the penalized
//! problem on modes `j = 1..M` has the explicit solution
//!
//! ```text
//! φ_j  = (1 + j²Δξ²)^{-α/2} / ((Z² + λ) Δξ),    Z² = Σ_{j=1}^{M} (1 + j²Δξ²)^{-α/2}
//! h(x) = 2/(Z² + λ) · Σ_{j=1}^{M} (1 + j²Δξ²)^{-α/2} cos(2π j x)
//! ```
//!
//! The synthesis uses `e^{2πi j x}` (no Δξ in the exponent), so `h` has
//! period 1 for every Δξ. Everything here is O(M) and independent of the
//! linear-algebra solvers, so it serves as their reference.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormParams {
    m: usize,
    delta_xi: f64,
    alpha: f64,
    lambda: f64,
    z_squared: f64,
}

impl ClosedFormParams {
    pub fn new(m: usize, delta_xi: f64, alpha: f64, lambda: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("M must be positive"));
        }
        if !(delta_xi.is_finite() && delta_xi > 0.0) {
            return Err(Error::domain(format!("delta_xi must be positive, got {delta_xi}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::domain(format!("lambda must be nonnegative, got {lambda}")));
        }
        let mut p = Self {
            m,
            delta_xi,
            alpha,
            lambda,
            z_squared: 0.0,
        };
        p.z_squared = (1..=m).rev().map(|j| p.inverse_weight(j)).sum();
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta_xi(&self) -> f64 {
        self.delta_xi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Z² = Σ_{j=1}^{M} (1 + j²Δξ²)^{-α/2}.
    pub fn z_squared(&self) -> f64 {
        self.z_squared
    }

    fn inverse_weight(&self, j: usize) -> f64 {
        let f = j as f64 * self.delta_xi;
        (1.0 + f * f).powf(-0.5 * self.alpha)
    }
}

/// φ_j for `1 ≤ j ≤ M`.
pub fn closed_form_phi(params: &ClosedFormParams, j: usize) -> Result<f64> {
    if j == 0 || j > params.m {
        return Err(Error::domain(format!("mode {j} outside 1..={}", params.m)));
    }
    Ok(params.inverse_weight(j) / ((params.z_squared + params.lambda) * params.delta_xi))
}

/// h(x) = 2/(Z² + λ) · Σ_j (1 + j²Δξ²)^{-α/2} cos(2π j x).
pub fn closed_form_h(params: &ClosedFormParams, x: f64) -> f64 {
    // Same summation order as Z², so h(0) = 2 exactly when λ = 0.
    // |x| makes evenness exact in floating point.
    let x = x.abs();
    let sum: f64 = (1..=params.m)
        .rev()
        .map(|j| params.inverse_weight(j) * (2.0 * PI * j as f64 * x).cos())
        .sum();
    2.0 * (sum / (params.z_squared + params.lambda))
}

/// Samples h on `points` equally spaced points of `[lo, hi]`.
pub fn closed_form_curve(params: &ClosedFormParams, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
    crate::harness::format::linspace(lo, hi, points)
        .into_iter()
        .map(|x| (x, closed_form_h(params, x)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        let p = ClosedFormParams::new(2, 1.0, 2.0, 1.0).unwrap();
        assert!((p.z_squared() - 0.7).abs() < 1e-15);
        assert!((closed_form_phi(&p, 1).unwrap() - 0.5 / 1.7).abs() < 1e-15);
        assert!((closed_form_phi(&p, 2).unwrap() - 0.2 / 1.7).abs() < 1e-15);
        assert!((closed_form_phi(&p, 1).unwrap() - 0.29412).abs() < 1e-5);
    }

    #[test]
    fn phi_rejects_out_of_range_modes() {
        let p = ClosedFormParams::new(3, 0.5, 2.0, 1.0).unwrap();
        assert!(closed_form_phi(&p, 0).is_err());
        assert!(closed_form_phi(&p, 4).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(ClosedFormParams::new(0, 1.0, 1.0, 1.0).is_err());
        assert!(ClosedFormParams::new(1, -1.0, 1.0, 1.0).is_err());
        assert!(ClosedFormParams::new(1, 1.0, 0.0, 1.0).is_err());
        assert!(ClosedFormParams::new(1, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn high_exponent_suppresses_high_modes() {
        let p = ClosedFormParams::new(5, 1.0, 60.0, 1.0).unwrap();
        let first = closed_form_phi(&p, 1).unwrap();
        for j in 2..=5 {
            assert!(closed_form_phi(&p, j).unwrap() / first < 1e-10);
        }
    }

    #[test]
    fn coefficient_mass_equals_relaxed_constraint() {
        for (m, dxi, alpha, lambda) in [(2, 1.0, 2.0, 1.0), (50, 0.1, 3.0, 0.3), (400, 0.01, 0.5, 2.0)] {
            let p = ClosedFormParams::new(m, dxi, alpha, lambda).unwrap();
            let mass: f64 = (1..=m).map(|j| closed_form_phi(&p, j).unwrap() * dxi).sum();
            let z2 = p.z_squared();
            assert!((mass - z2 / (z2 + lambda)).abs() < 1e-13);
            assert!(mass < 1.0);
        }
    }

    #[test]
    fn h_examples() {
        let p = ClosedFormParams::new(2, 1.0, 2.0, 1.0).unwrap();
        assert!((closed_form_h(&p, 0.0) - 1.4 / 1.7).abs() < 1e-15);
        let hard = ClosedFormParams::new(37, 0.3, 1.7, 0.0).unwrap();
        assert_eq!(closed_form_h(&hard, 0.0), 2.0);
    }

    #[test]
    fn h_is_even_and_one_periodic() {
        let p = ClosedFormParams::new(40, 0.05, 3.0, 0.7).unwrap();
        for x in [0.013, 0.25, 0.49, 1.3] {
            assert_eq!(closed_form_h(&p, x), closed_form_h(&p, -x));
            assert!((closed_form_h(&p, x) - closed_form_h(&p, x + 1.0)).abs() < 1e-12);
        }
    }
}

//! Sobolev norms of the narrowing Gaussian family and the critical exponent.
//!
//! For `ψ_σ(ξ) = (2π)^{d/2} σ^d e^{-2π²σ²‖ξ‖²}` (the transform of
//! `e^{-‖x‖²/(2σ²)}`) the substitution `r = σ‖ξ‖` gives
//!
//! ```text
//! ‖F⁻¹ψ_σ‖²_{H^{α/2}} = (2π)^d σ^{d-α} ω_d ∫₀^∞ r^{d-1} (σ² + r²)^{α/2} e^{-4π²r²} dr
//! ∫ ‖ξ‖^α |ψ_σ|² dξ   = (2π)^d σ^{d-α} ω_d ∫₀^∞ r^{α+d-1} e^{-4π²r²} dr
//! ```
//!
//! As σ → 0 the first tends to 0, `C_d` or ∞ according to α < d, α = d,
//! α > d, with `C_d = ½ (d-1)! (2π)^{-d} ω_d`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};

/// Half-width of the band around the expected slope used for classification.
pub const SLOPE_BAND: f64 = 0.05;
/// Relative tolerance on the terminal value in the critical case.
pub const CRITICAL_VALUE_TOL: f64 = 0.01;

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;
const RADIAL_REL_TOL: f64 = 1e-12;

/// ω_d = 2π^{d/2} / Γ(d/2), the area of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> Result<f64> {
    match d {
        0 => Err(Error::domain("sphere area needs d ≥ 1")),
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        _ => Ok(2.0 * PI / (d - 2) as f64 * sphere_area(d - 2)?),
    }
}

/// C_d = ½ (d-1)! (2π)^{-d} ω_d.
pub fn critical_constant(d: usize) -> Result<f64> {
    let omega = sphere_area(d)?;
    let fact: f64 = (1..d).map(|k| k as f64).product();
    Ok(0.5 * fact * (2.0 * PI).powi(-(d as i32)) * omega)
}

fn check_dim_sigma(d: usize, sigma: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::domain("dimension d must be positive"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must be nonnegative, got {alpha}")))
    }
}

/// Upper limit for radial integrals against `e^{-4π²r²}`. At r = 3 the
/// Gaussian is below e^{-355}.
pub fn radial_cutoff(sigma: f64) -> f64 {
    3.0_f64.max(2.0 * sigma)
}

fn radial_integral<F: Fn(f64) -> f64>(f: F, upper: f64) -> Result<f64> {
    let opts = QuadratureOptions::default().with_rel_tol(RADIAL_REL_TOL);
    Ok(integrate(f, 0.0, upper, opts)?.value)
}

/// ∫₀^∞ r^{d-1} (σ² + r²)^{α/2} e^{-4π²r²} dr, the σ-dependent bracket.
pub fn sobolev_bracket(d: usize, alpha: f64, sigma: f64) -> Result<f64> {
    check_dim_sigma(d, sigma)?;
    check_alpha(alpha)?;
    let s2 = sigma * sigma;
    let p = (d - 1) as i32;
    radial_integral(
        |r| r.powi(p) * (s2 + r * r).powf(0.5 * alpha) * (-FOUR_PI_SQ * r * r).exp(),
        radial_cutoff(sigma),
    )
}

/// ‖F⁻¹ψ_σ‖²_{H^{α/2}} by adaptive radial quadrature.
pub fn gaussian_sobolev_norm(d: usize, alpha: f64, sigma: f64) -> Result<f64> {
    let bracket = sobolev_bracket(d, alpha, sigma)?;
    Ok((2.0 * PI).powi(d as i32) * sigma.powf(d as f64 - alpha) * sphere_area(d)? * bracket)
}

/// ∫ ‖ξ‖^α |ψ_σ(ξ)|² dξ by adaptive radial quadrature.
pub fn gaussian_homogeneous_norm(d: usize, alpha: f64, sigma: f64) -> Result<f64> {
    check_dim_sigma(d, sigma)?;
    check_alpha(alpha)?;
    let moment = gaussian_moment_real(alpha + d as f64 - 1.0)?;
    Ok((2.0 * PI).powi(d as i32) * sigma.powf(d as f64 - alpha) * sphere_area(d)? * moment)
}

/// ∫₀^∞ r^k e^{-4π²r²} dr by quadrature, for real k ≥ 0.
pub fn gaussian_moment_real(k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::domain(format!("moment order must be nonnegative, got {k}")));
    }
    radial_integral(|r| r.powf(k) * (-FOUR_PI_SQ * r * r).exp(), radial_cutoff(0.0))
}

/// ∫₀^∞ r^k e^{-4π²r²} dr by quadrature.
pub fn gaussian_moment(k: u32) -> Result<f64> {
    radial_integral(|r| r.powi(k as i32) * (-FOUR_PI_SQ * r * r).exp(), radial_cutoff(0.0))
}

/// Closed form of ∫₀^∞ r^k e^{-4π²r²} dr:
/// `½ ((k-1)/2)! (2π)^{-(k+1)}` for odd k and
/// `(√π/2) (2π)^{-(k+1)} 2^{-k/2} (k-1)!!` for even k.
pub fn gaussian_moment_closed_form(k: u32) -> f64 {
    let scale = (2.0 * PI).powi(-(k as i32 + 1));
    if k % 2 == 1 {
        let fact: f64 = (1..=(k - 1) / 2).map(f64::from).product();
        0.5 * fact * scale
    } else {
        let double_fact: f64 = (1..k).rev().step_by(2).map(f64::from).product();
        0.5 * PI.sqrt() * scale * 0.5_f64.powi(k as i32 / 2) * double_fact
    }
}

/// The σ-free bounds `C₁ ≤ bracket(σ) ≤ C₂` valid for σ < 1:
/// `C₁ = ∫ r^{α+d-1} e^{-4π²r²}` and
/// `C₂ = ∫₀¹ r^{d-1}(1+r²)^{α/2} e^{-4π²r²} + 2^α ∫₀^∞ r^{α+d-1} e^{-4π²r²}`.
pub fn bracket_bounds(d: usize, alpha: f64) -> Result<(f64, f64)> {
    check_dim_sigma(d, 1.0)?;
    check_alpha(alpha)?;
    let c1 = gaussian_moment_real(alpha + d as f64 - 1.0)?;
    let p = (d - 1) as i32;
    let head = radial_integral(
        |r| r.powi(p) * (1.0 + r * r).powf(0.5 * alpha) * (-FOUR_PI_SQ * r * r).exp(),
        1.0,
    )?;
    Ok((c1, head + 2.0_f64.powf(alpha) * c1))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain("slope fit needs at least two paired samples"));
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::domain("log-log fit needs positive finite samples"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("slope fit needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}

/// `count` log-spaced values from `hi` down to `lo`.
pub fn log_spaced_decreasing(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitBehavior {
    /// Norm tends to zero as σ → 0.
    Vanishes,
    /// Norm tends to `C_d`.
    Converges,
    /// Norm grows without bound.
    Diverges,
    /// Flat slope but terminal value away from `C_d`.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrichotomySweep {
    pub d: usize,
    pub alpha: f64,
    pub sigmas: Vec<f64>,
    pub norms: Vec<f64>,
    pub fitted_slope: f64,
    pub expected_slope: f64,
    /// |fitted_slope − (d − α)| ≤ [`SLOPE_BAND`].
    pub slope_consistent: bool,
    pub terminal_norm: f64,
    pub critical_constant: f64,
    pub classification: LimitBehavior,
}

/// Evaluates the Sobolev norm along a decreasing σ sequence, fits the
/// log-log slope and classifies the σ → 0 limit.
pub fn run_trichotomy_sweep(d: usize, alpha: f64, sigmas: &[f64]) -> Result<TrichotomySweep> {
    if sigmas.len() < 3 {
        return Err(Error::domain("a trichotomy sweep needs at least 3 sigma values"));
    }
    if sigmas.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::domain("sigma values must be strictly decreasing"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let norms = sigmas
        .par_iter()
        .map(|&s| gaussian_sobolev_norm(d, alpha, s))
        .collect::<Result<Vec<_>>>()?;
    let fitted_slope = log_log_slope(sigmas, &norms)?;
    let expected_slope = d as f64 - alpha;
    let terminal_norm = *norms.last().expect("at least three norms");
    let cd = critical_constant(d)?;
    let classification = if fitted_slope > SLOPE_BAND {
        LimitBehavior::Vanishes
    } else if fitted_slope < -SLOPE_BAND {
        LimitBehavior::Diverges
    } else if (terminal_norm - cd).abs() <= CRITICAL_VALUE_TOL * cd {
        LimitBehavior::Converges
    } else {
        LimitBehavior::Inconclusive
    };
    Ok(TrichotomySweep {
        d,
        alpha,
        sigmas: sigmas.to_vec(),
        norms,
        fitted_slope,
        expected_slope,
        slope_consistent: (fitted_slope - expected_slope).abs() <= SLOPE_BAND,
        terminal_norm,
        critical_constant: cd,
        classification,
    })
}

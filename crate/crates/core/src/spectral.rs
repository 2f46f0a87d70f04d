//! Frequency lattice, training data, spectral coefficients and the discrete
//! Sobolev objective.
//!
//! The lattice is `{Δξ·J : J ∈ {-M, …, M}^d}` with `(2M+1)^d` points. Flat
//! indices are row-major with axis 0 slowest and each axis ascending from
//! `-M`, so `flat(-J) = G - 1 - flat(J)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Tolerance used when checking hermitian pairing of coefficients.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    dim: usize,
    m: usize,
    delta_xi: f64,
    len: usize,
}

impl FrequencyGrid {
    pub fn new(dim: usize, m: usize, delta_xi: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("grid dimension d must be positive"));
        }
        if m == 0 {
            return Err(Error::domain("band limit M must be positive"));
        }
        if !(delta_xi.is_finite() && delta_xi > 0.0) {
            return Err(Error::domain(format!("delta_xi must be positive, got {delta_xi}")));
        }
        let axis = 2 * m + 1;
        let len = u32::try_from(dim)
            .ok()
            .and_then(|d| axis.checked_pow(d))
            .ok_or_else(|| Error::domain(format!("grid (2M+1)^d overflows for M = {m}, d = {dim}")))?;
        Ok(Self { dim, m, delta_xi, len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band_limit(&self) -> usize {
        self.m
    }

    pub fn delta_xi(&self) -> f64 {
        self.delta_xi
    }

    /// Points per axis, `2M + 1`.
    pub fn axis_len(&self) -> usize {
        2 * self.m + 1
    }

    /// Total number of lattice points, `(2M+1)^d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lattice_index(&self, flat: usize) -> Vec<i64> {
        assert!(flat < self.len, "flat index {flat} out of range");
        let axis = self.axis_len();
        let mut out = vec![0_i64; self.dim];
        let mut rem = flat;
        for slot in out.iter_mut().rev() {
            *slot = (rem % axis) as i64 - self.m as i64;
            rem /= axis;
        }
        out
    }

    pub fn flat_index(&self, lattice: &[i64]) -> Result<usize> {
        if lattice.len() != self.dim {
            return Err(Error::domain(format!(
                "lattice index has {} components, grid has d = {}",
                lattice.len(),
                self.dim
            )));
        }
        let m = self.m as i64;
        let axis = self.axis_len();
        let mut flat = 0_usize;
        for &j in lattice {
            if j < -m || j > m {
                return Err(Error::domain(format!("lattice component {j} outside [-{m}, {m}]")));
            }
            flat = flat * axis + (j + m) as usize;
        }
        Ok(flat)
    }

    /// Flat index of `-J` given the flat index of `J`.
    pub fn negated(&self, flat: usize) -> usize {
        self.len - 1 - flat
    }

    /// Flat index of `J = 0`.
    pub fn zero_mode(&self) -> usize {
        self.len / 2
    }

    /// ‖J‖² for each flat index.
    pub fn squared_norms(&self) -> Vec<f64> {
        let axis = self.axis_len();
        let m = self.m as i64;
        let mut out = Vec::with_capacity(self.len);
        for flat in 0..self.len {
            let mut rem = flat;
            let mut s = 0_i64;
            for _ in 0..self.dim {
                let j = (rem % axis) as i64 - m;
                s += j * j;
                rem /= axis;
            }
            out.push(s as f64);
        }
        out
    }

    /// `(1 + ‖J‖²Δξ²)^{power}` for each flat index.
    pub fn bracket_powers(&self, power: f64) -> Vec<f64> {
        let dx2 = self.delta_xi * self.delta_xi;
        self.squared_norms()
            .into_iter()
            .map(|n2| (1.0 + n2 * dx2).powf(power))
            .collect()
    }

    /// Sobolev weights `⟨Δξ J⟩^α`.
    pub fn sobolev_weights(&self, alpha: f64) -> Vec<f64> {
        self.bracket_powers(0.5 * alpha)
    }

    /// Per-axis synthesis factors `e^{2πi Δξ j x_a}` for `j = -M..=M`.
    pub(crate) fn axis_phases(&self, x: f64) -> Vec<Complex64> {
        let m = self.m as i64;
        (-m..=m)
            .map(|j| Complex64::cis(2.0 * PI * self.delta_xi * j as f64 * x))
            .collect()
    }

    /// Evaluates `Σ_J c_J e^{2πi Δξ J·x}` by contracting one axis at a time.
    pub(crate) fn synthesize(&self, coeffs: &[Complex64], x: &[f64]) -> Complex64 {
        debug_assert_eq!(coeffs.len(), self.len);
        debug_assert_eq!(x.len(), self.dim);
        let axis = self.axis_len();
        let mut current: Vec<Complex64> = Vec::new();
        let mut src: &[Complex64] = coeffs;
        for a in (0..self.dim).rev() {
            let phases = self.axis_phases(x[a]);
            let next: Vec<Complex64> = src
                .chunks_exact(axis)
                .map(|block| block.iter().zip(&phases).map(|(c, e)| c * e).sum())
                .collect();
            current = next;
            src = &current;
        }
        current[0]
    }
}

impl fmt::Display for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={}, M={}, Δξ={}, G={}", self.dim, self.m, self.delta_xi, self.len)
    }
}

/// Training samples `x_i ∈ R^d` with real labels `y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    points: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("dataset empty"));
        }
        if points.len() != labels.len() {
            return Err(Error::domain(format!(
                "{} sample points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::domain("sample points need at least one coordinate"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::domain(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("point {i} has a non-finite coordinate")));
            }
        }
        if let Some(i) = labels.iter().position(|y| !y.is_finite()) {
            return Err(Error::domain(format!("label {i} is not finite")));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::domain(format!("points {j} and {i} are identical")));
                }
            }
        }
        Ok(Self { dim, points, labels })
    }

    /// One-dimensional convenience constructor.
    pub fn from_1d(xs: &[f64], ys: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect(), ys.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Smallest Euclidean distance between two distinct samples (∞ for n = 1).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..i {
                best = best.min(distance(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    /// SHA-256 over the bit patterns of d, n, X and Y.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        h.update((self.len() as u64).to_le_bytes());
        for p in &self.points {
            for v in p {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        for y in &self.labels {
            h.update(y.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize().as_slice())
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Complex coefficients on a [`FrequencyGrid`], indexed by flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
    hermitian: bool,
}

impl SpectralCoefficients {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "{} coefficients for a grid of size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            hermitian: false,
        })
    }

    /// Like [`new`](Self::new) but also checks and records hermitian pairing.
    pub fn new_hermitian(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        let mut c = Self::new(grid, values)?;
        let defect = c.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::domain(format!(
                "coefficients are not hermitian: max |φ(-J) - conj φ(J)| = {defect:e}"
            )));
        }
        c.hermitian = true;
        Ok(c)
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            hermitian: true,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// max over J of |φ(-J) - conj φ(J)|.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.values.len())
            .map(|k| (self.values[self.grid.negated(k)] - self.values[k].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces φ(J) by (φ(J) + conj φ(-J)) / 2.
    pub fn project_hermitian(&self) -> Self {
        let values: Vec<Complex64> = (0..self.values.len())
            .map(|k| 0.5 * (self.values[k] + self.values[self.grid.negated(k)].conj()))
            .collect();
        Self {
            grid: self.grid,
            values,
            hermitian: true,
        }
    }

    /// h(x) = Σ_J φ_J e^{2πi Δξ J·x}.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.grid.dim() {
            return Err(Error::domain(format!(
                "point has {} coordinates, grid has d = {}",
                x.len(),
                self.grid.dim()
            )));
        }
        Ok(self.grid.synthesize(&self.values, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Factorize the G×G normal equations.
    Direct,
    /// Factorize the n×n dual (kernel) system.
    Dual,
    /// SVD of the whitened constraint matrix.
    Svd,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Direct, Backend::Dual, Backend::Svd];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Direct => "direct",
            Backend::Dual => "dual",
            Backend::Svd => "svd",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Backend::Direct),
            "dual" => Ok(Backend::Dual),
            "svd" => Ok(Backend::Svd),
            other => Err(Error::parse(
                "backend",
                format!("unknown backend `{other}` (expected direct, dual or svd)"),
            )),
        }
    }
}

fn default_tolerance() -> f64 {
    1e-10
}
fn default_true() -> bool {
    true
}
fn default_budget() -> u64 {
    2 << 30
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    /// Sobolev exponent α.
    pub alpha: f64,
    /// Penalty weight λ; the penalty is λ·Σ⟨Δξ J⟩^α |φ_J|².
    pub lambda: f64,
    pub backend: Backend,
    #[serde(default = "default_tolerance")]
    pub solve_tolerance: f64,
    #[serde(default = "default_true")]
    pub hermitian_projection: bool,
    /// Multiply the reported objective by Δξ^d.
    #[serde(default)]
    pub riemann_normalize: bool,
    /// Pin φ(0) = 0 by removing the zero-frequency column from the system.
    #[serde(default)]
    pub exclude_zero_mode: bool,
    #[serde(default = "default_budget")]
    pub memory_budget_bytes: u64,
}

impl SolveConfig {
    pub fn new(alpha: f64, lambda: f64, backend: Backend) -> Self {
        Self {
            alpha,
            lambda,
            backend,
            solve_tolerance: default_tolerance(),
            hermitian_projection: true,
            riemann_normalize: false,
            exclude_zero_mode: false,
            memory_budget_bytes: default_budget(),
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::parse("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::parse("lambda", format!("must be nonnegative, got {}", self.lambda)));
        }
        if self.lambda == 0.0 && self.backend != Backend::Dual {
            return Err(Error::parse(
                "lambda",
                format!("lambda = 0 requires the dual backend, got {}", self.backend),
            ));
        }
        if !(self.solve_tolerance.is_finite() && self.solve_tolerance > 0.0) {
            return Err(Error::parse(
                "solve_tolerance",
                format!("must be positive, got {}", self.solve_tolerance),
            ));
        }
        Ok(())
    }
}

/// ⟨ξ⟩ = (1 + ‖ξ‖²)^{1/2}.
pub fn japanese_bracket(xi: &[f64]) -> Result<f64> {
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("japanese bracket of a non-finite frequency"));
    }
    Ok((1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt())
}

/// Discrete Q_α = Σ_J (1 + ‖J‖²Δξ²)^{α/2} |φ_J|², without a Δξ^d factor.
pub fn sobolev_objective(phi: &SpectralCoefficients, alpha: f64) -> f64 {
    phi.grid
        .sobolev_weights(alpha)
        .iter()
        .zip(&phi.values)
        .map(|(w, c)| w * c.norm_sqr())
        .sum()
}

/// Applies the discrete constraint operator: `(P_X φ)_k = Σ_J φ_J e^{2πi Δξ J·x_k}`.
pub fn apply_p_x(phi: &SpectralCoefficients, points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    points.iter().map(|x| phi.evaluate(x)).collect()
}

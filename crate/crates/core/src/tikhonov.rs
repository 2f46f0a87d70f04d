//! Penalized least squares in the frequency domain.
//!
//! Minimizes `‖Aφ − b‖² + ‖Γφ‖²` with `A[k, J] = e^{2πi Δξ J·x_k}` and
//! `Γ = √λ·diag((1 + ‖J‖²Δξ²)^{α/4})`, so the penalty is `λ·Q_α[φ]`.
//! Three backends compute the same minimizer:
//!
//! * [`solve_direct`]: Cholesky of the G×G normal matrix `AᴴA + ΓᴴΓ`.
//! * [`solve_dual`]: `φ = W⁻¹Aᴴ(AW⁻¹Aᴴ + λI)⁻¹b` with `W = ΓᴴΓ/λ`; only an
//!   n×n system is factorized.
//! * [`solve_svd`]: SVD of the whitened matrix `AΓ⁻¹`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{
    sobolev_objective, Backend, Dataset, FrequencyGrid, SolveConfig, SpectralCoefficients,
};

const COMPLEX_BYTES: u128 = 16;

/// The linear system of one fit. Immutable once built.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    grid: Option<FrequencyGrid>,
    a: DMatrix<Complex64>,
    /// (1 + ‖J‖²Δξ²)^{α/4}, one entry per column.
    weight_sqrt: Vec<f64>,
    lambda: f64,
    b: Vec<f64>,
    solve_tolerance: f64,
    memory_budget_bytes: u64,
}

impl AssembledSystem {
    /// Builds a system from explicit parts, for problems that do not live on a
    /// symmetric lattice.
    pub fn from_parts(
        a: DMatrix<Complex64>,
        weight_sqrt: Vec<f64>,
        lambda: f64,
        b: Vec<f64>,
    ) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::domain(format!(
                "A has {} rows but b has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.ncols() != weight_sqrt.len() {
            return Err(Error::domain(format!(
                "A has {} columns but {} weights were given",
                a.ncols(),
                weight_sqrt.len()
            )));
        }
        if weight_sqrt.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::domain("weights must be positive and finite"));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::domain(format!("lambda must be nonnegative, got {lambda}")));
        }
        Ok(Self {
            grid: None,
            a,
            weight_sqrt,
            lambda,
            b,
            solve_tolerance: 1e-10,
            memory_budget_bytes: u64::MAX,
        })
    }

    pub fn with_solve_tolerance(mut self, tol: f64) -> Self {
        self.solve_tolerance = tol;
        self
    }

    pub fn grid(&self) -> Option<&FrequencyGrid> {
        self.grid.as_ref()
    }

    pub fn a(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weight_sqrt(&self) -> &[f64] {
        &self.weight_sqrt
    }

    pub fn solve_tolerance(&self) -> f64 {
        self.solve_tolerance
    }

    /// Diagonal of Γ: √λ·(1 + ‖J‖²Δξ²)^{α/4}.
    pub fn gamma_diag(&self) -> Vec<f64> {
        let s = self.lambda.sqrt();
        self.weight_sqrt.iter().map(|w| s * w).collect()
    }

    /// Number of constraints n.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// Number of unknowns G.
    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    fn b_complex(&self) -> DVector<Complex64> {
        DVector::from_iterator(self.b.len(), self.b.iter().map(|&y| Complex64::new(y, 0.0)))
    }

    fn check_budget(&self, bytes: u128) -> Result<()> {
        if bytes > self.memory_budget_bytes as u128 {
            return Err(Error::Capacity {
                grid_size: self.cols(),
                required_bytes: bytes,
                budget_bytes: self.memory_budget_bytes as u128,
            });
        }
        Ok(())
    }

    fn require_positive_lambda(&self, backend: Backend) -> Result<()> {
        if self.lambda > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("the {backend} backend requires lambda > 0")))
        }
    }

    /// Wraps a solution vector as coefficients on the system's grid.
    pub fn coefficients(&self, phi: Vec<Complex64>) -> Result<SpectralCoefficients> {
        let grid = self
            .grid
            .ok_or_else(|| Error::domain("system was not assembled on a frequency grid"))?;
        SpectralCoefficients::new(grid, phi)
    }
}

/// Builds `A`, Γ and `b` for a dataset on a grid.
pub fn assemble(grid: &FrequencyGrid, data: &Dataset, config: &SolveConfig) -> Result<AssembledSystem> {
    config.validate()?;
    if data.dim() != grid.dim() {
        return Err(Error::domain(format!(
            "dataset has d = {} but grid has d = {}",
            data.dim(),
            grid.dim()
        )));
    }
    let n = data.len();
    let g = grid.len();
    let required = n as u128 * g as u128 * COMPLEX_BYTES;
    if required > config.memory_budget_bytes as u128 {
        return Err(Error::Capacity {
            grid_size: g,
            required_bytes: required,
            budget_bytes: config.memory_budget_bytes as u128,
        });
    }

    let rows: Vec<Vec<Complex64>> = data
        .points()
        .par_iter()
        .map(|x| {
            let mut row = lattice_row(grid, x);
            if config.exclude_zero_mode {
                row[grid.zero_mode()] = Complex64::new(0.0, 0.0);
            }
            row
        })
        .collect();
    let a = DMatrix::from_fn(n, g, |i, j| rows[i][j]);

    Ok(AssembledSystem {
        grid: Some(*grid),
        a,
        weight_sqrt: grid.bracket_powers(0.25 * config.alpha),
        lambda: config.lambda,
        b: data.labels().to_vec(),
        solve_tolerance: config.solve_tolerance,
        memory_budget_bytes: config.memory_budget_bytes,
    })
}

/// `e^{2πi Δξ J·x}` over the lattice in flat order, built as an outer
/// product of per-axis factors.
fn lattice_row(grid: &FrequencyGrid, x: &[f64]) -> Vec<Complex64> {
    let mut row = vec![Complex64::new(1.0, 0.0)];
    for &xa in x {
        let phases = grid.axis_phases(xa);
        let mut next = Vec::with_capacity(row.len() * phases.len());
        for prefix in &row {
            next.extend(phases.iter().map(|p| prefix * p));
        }
        row = next;
    }
    row
}

fn hermitian_condition_estimate(m: &DMatrix<Complex64>) -> Option<f64> {
    let eig = m.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if eig.is_empty() {
        None
    } else if min == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(max / min)
    }
}

fn residual_norm(m: &DMatrix<Complex64>, x: &DVector<Complex64>, rhs: &DVector<Complex64>) -> f64 {
    (m * x - rhs).norm()
}

/// φ = (AᴴA + ΓᴴΓ)⁻¹Aᴴb via Cholesky.
pub fn solve_direct(sys: &AssembledSystem) -> Result<Vec<Complex64>> {
    sys.require_positive_lambda(Backend::Direct)?;
    let g = sys.cols() as u128;
    sys.check_budget((g * g + sys.rows() as u128 * g) * COMPLEX_BYTES)?;

    let mut normal = sys.a.ad_mul(&sys.a);
    for (k, w) in sys.weight_sqrt.iter().enumerate() {
        normal[(k, k)] += Complex64::new(sys.lambda * w * w, 0.0);
    }
    let rhs = sys.a.ad_mul(&sys.b_complex());

    let chol = match normal.clone().cholesky() {
        Some(c) => c,
        None => {
            return Err(Error::solver(
                "normal matrix is not numerically positive definite",
                hermitian_condition_estimate(&normal),
            ))
        }
    };
    let phi = chol.solve(&rhs);
    let res = residual_norm(&normal, &phi, &rhs);
    if res > sys.solve_tolerance * rhs.norm() {
        return Err(Error::solver(
            format!("normal-equation residual {res:e} exceeds tolerance"),
            hermitian_condition_estimate(&normal),
        ));
    }
    Ok(phi.iter().copied().collect())
}

/// φ = W⁻¹Aᴴ(AW⁻¹Aᴴ + λI)⁻¹b, the same minimizer through an n×n system.
///
/// With λ = 0 this is the minimum-Q_α interpolant; if the kernel matrix is
/// then singular the Moore–Penrose pseudo-inverse is used instead of the
/// inverse.
pub fn solve_dual(sys: &AssembledSystem) -> Result<Vec<Complex64>> {
    let n = sys.rows();
    let inv_w: Vec<f64> = sys.weight_sqrt.iter().map(|w| 1.0 / (w * w)).collect();
    let mut scaled = sys.a.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::new(inv_w[k], 0.0);
    }
    // K = A W⁻¹ Aᴴ
    let mut kernel = &scaled * sys.a.adjoint();
    for i in 0..n {
        kernel[(i, i)] += Complex64::new(sys.lambda, 0.0);
    }
    let b = sys.b_complex();

    let mu = match kernel.clone().cholesky() {
        Some(chol) => chol.solve(&b),
        None if sys.lambda == 0.0 => kernel
            .clone()
            .pseudo_inverse(f64::EPSILON * n as f64 * kernel.norm())
            .map_err(|e| Error::solver(format!("pseudo-inverse failed: {e}"), None))?
            * &b,
        None => {
            return Err(Error::solver(
                "dual n×n system is singular to working precision",
                hermitian_condition_estimate(&kernel),
            ))
        }
    };
    if sys.lambda > 0.0 {
        let res = residual_norm(&kernel, &mu, &b);
        if res > sys.solve_tolerance * b.norm() {
            return Err(Error::solver(
                format!("dual residual {res:e} exceeds tolerance"),
                hermitian_condition_estimate(&kernel),
            ));
        }
    }
    let phi = scaled.ad_mul(&mu);
    Ok(phi.iter().copied().collect())
}

/// Whitened SVD route: `Ã = AΓ⁻¹ = UΣVᴴ`, `φ̃ = V·diag(σ/(σ²+1))·Uᴴb`, `φ = Γ⁻¹φ̃`.
pub fn solve_svd(sys: &AssembledSystem) -> Result<Vec<Complex64>> {
    sys.require_positive_lambda(Backend::Svd)?;
    let gamma = sys.gamma_diag();
    let mut whitened = sys.a.clone();
    for (k, mut col) in whitened.column_iter_mut().enumerate() {
        col /= Complex64::new(gamma[k], 0.0);
    }
    let svd = whitened
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::solver("SVD did not converge", None))?;
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("Vᴴ requested");
    let mut coeffs = u.ad_mul(&sys.b_complex());
    for (c, s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c *= s / (s * s + 1.0);
    }
    let phi_tilde = v_t.ad_mul(&coeffs);
    Ok(phi_tilde
        .iter()
        .zip(&gamma)
        .map(|(p, g)| p / g)
        .collect())
}

pub fn solve(sys: &AssembledSystem, backend: Backend) -> Result<Vec<Complex64>> {
    match backend {
        Backend::Direct => solve_direct(sys),
        Backend::Dual => solve_dual(sys),
        Backend::Svd => solve_svd(sys),
    }
}

/// A solved problem: coefficients, the configuration that produced them and
/// post-solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub coefficients: SpectralCoefficients,
    pub config: SolveConfig,
    pub dataset_hash: String,
    /// Achieved Q_α (times Δξ^d when `riemann_normalize` is set).
    pub objective: f64,
    /// |h(x_i) − y_i| recomputed from the final coefficients.
    pub residuals: Vec<f64>,
}

impl FittedModel {
    pub fn grid(&self) -> &FrequencyGrid {
        self.coefficients.grid()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        self.coefficients.evaluate(x)
    }

    pub fn evaluate_real(&self, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x)?.re)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Reported objective for a coefficient vector under `config`.
pub fn objective_value(phi: &SpectralCoefficients, config: &SolveConfig) -> f64 {
    let q = sobolev_objective(phi, config.alpha);
    if config.riemann_normalize {
        q * phi.grid().delta_xi().powi(phi.grid().dim() as i32)
    } else {
        q
    }
}

/// Assembles, solves with the configured backend, optionally projects onto
/// hermitian coefficients, and records objective and residuals.
pub fn fit(grid: &FrequencyGrid, data: &Dataset, config: &SolveConfig) -> Result<FittedModel> {
    let sys = assemble(grid, data, config)?;
    let phi = solve(&sys, config.backend)?;
    let mut coefficients = sys.coefficients(phi)?;
    if config.hermitian_projection {
        coefficients = coefficients.project_hermitian();
    }
    let residuals = data
        .points()
        .iter()
        .zip(data.labels())
        .map(|(x, &y)| Ok((coefficients.evaluate(x)? - Complex64::new(y, 0.0)).norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FittedModel {
        objective: objective_value(&coefficients, config),
        coefficients,
        config: *config,
        dataset_hash: data.content_hash(),
        residuals,
    })
}

/// [`fit`] plus wall-clock time in seconds.
pub fn fit_timed(grid: &FrequencyGrid, data: &Dataset, config: &SolveConfig) -> Result<(FittedModel, f64)> {
    let start = Instant::now();
    let model = fit(grid, data, config)?;
    Ok((model, start.elapsed().as_secs_f64()))
}

/// ‖∇(‖Aφ − b‖² + ‖Γφ‖²)‖ = 2‖Aᴴ(Aφ − b) + ΓᴴΓφ‖ and the scale
/// ‖Aᴴb‖ + ‖ΓᴴΓφ‖ it is compared against.
pub fn kkt_gradient(sys: &AssembledSystem, phi: &[Complex64]) -> (f64, f64) {
    let phi = DVector::from_column_slice(phi);
    let b = sys.b_complex();
    let misfit = sys.a.ad_mul(&(&sys.a * &phi - &b));
    let penalty = DVector::from_iterator(
        phi.len(),
        phi.iter()
            .zip(&sys.weight_sqrt)
            .map(|(p, w)| p * (sys.lambda * w * w)),
    );
    let grad = 2.0 * (misfit + &penalty).norm();
    (grad, sys.a.ad_mul(&b).norm() + penalty.norm())
}

/// Relative distance from φ to span(Γ⁻²Aᴴ): ‖(I − QQᴴ)φ‖ / ‖φ‖.
pub fn representer_residual(sys: &AssembledSystem, phi: &[Complex64]) -> f64 {
    let phi = DVector::from_column_slice(phi);
    let norm = phi.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut basis = sys.a.adjoint();
    for (k, mut row) in basis.row_iter_mut().enumerate() {
        let w = sys.weight_sqrt[k];
        row /= Complex64::new(w * w, 0.0);
    }
    let q = basis.qr().q();
    let proj = &q * q.ad_mul(&phi);
    (phi - proj).norm() / norm
}

/// The single-point problem `X = [0]`, `Y = [y]` in one dimension, posed on
/// the general solver with `φ(0)` pinned to zero.
///
/// Restricting to even coefficients on `j = 1..M` halves both the misfit and
/// the penalty counts relative to the full lattice, so the full-lattice
/// problem with penalty `2λ` has the same minimizer. The synthesis
/// `Σ_j c_j e^{2πi j x}` used by the reduced problem is the general
/// synthesis evaluated at `x / Δξ`.
#[derive(Debug, Clone, Copy)]
pub struct SinglePointReduction {
    pub m: usize,
    pub delta_xi: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub label: f64,
    pub backend: Backend,
}

impl SinglePointReduction {
    pub fn new(m: usize, delta_xi: f64, alpha: f64, lambda: f64) -> Self {
        Self {
            m,
            delta_xi,
            alpha,
            lambda,
            label: 2.0,
            backend: Backend::Dual,
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn fit(&self) -> Result<ReducedModel> {
        let grid = FrequencyGrid::new(1, self.m, self.delta_xi)?;
        let data = Dataset::from_1d(&[0.0], &[self.label])?;
        let mut config = SolveConfig::new(self.alpha, 2.0 * self.lambda, self.backend);
        config.exclude_zero_mode = true;
        Ok(ReducedModel {
            model: fit(&grid, &data, &config)?,
            delta_xi: self.delta_xi,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub model: FittedModel,
    delta_xi: f64,
}

impl ReducedModel {
    /// h(x) in the reduced problem's coordinates.
    pub fn h(&self, x: f64) -> Result<f64> {
        self.model.evaluate_real(&[x / self.delta_xi])
    }

    /// Coefficient of mode j as a density, φ_J / Δξ.
    pub fn density(&self, j: i64) -> Result<f64> {
        let grid = self.model.grid();
        let k = grid.flat_index(&[j])?;
        Ok(self.model.coefficients.values()[k].re / self.delta_xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::*;

    mod approx_eq {
        use num_complex::Complex64;

        pub fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
            let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
            if den == 0.0 {
                num
            } else {
                num / den
            }
        }
    }

    fn unit_system() -> AssembledSystem {
        AssembledSystem::from_parts(
            DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
            vec![1.0],
            1.0,
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn assemble_examples() {
        let grid = FrequencyGrid::new(1, 1, 1.0).unwrap();
        let cfg = SolveConfig::new(2.0, 1.0, Backend::Direct);
        let sys = assemble(&grid, &Dataset::from_1d(&[0.0], &[1.0]).unwrap(), &cfg).unwrap();
        assert!(sys.a().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        let sys = assemble(&grid, &Dataset::from_1d(&[0.5], &[1.0]).unwrap(), &cfg).unwrap();
        let expect = [-1.0, 1.0, -1.0];
        for (v, e) in sys.a().iter().zip(expect) {
            assert!((v - Complex64::new(e, 0.0)).norm() < 1e-15, "{v}");
        }
        let gamma = sys.gamma_diag();
        assert!((gamma[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((gamma[2] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(gamma[1], 1.0);
    }

    #[test]
    fn assemble_rejects_oversized_grid() {
        let grid = FrequencyGrid::new(2, 50, 0.1).unwrap();
        let mut cfg = SolveConfig::new(2.0, 1.0, Backend::Dual);
        cfg.memory_budget_bytes = 1024;
        let data = Dataset::from_1d(&[0.0], &[1.0]).unwrap();
        let data2 = Dataset::new(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        assert!(matches!(assemble(&grid, &data, &cfg), Err(Error::Domain(_))));
        match assemble(&grid, &data2, &cfg) {
            Err(Error::Capacity { grid_size, .. }) => assert_eq!(grid_size, 101 * 101),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn direct_solve_respects_memory_budget() {
        let grid = FrequencyGrid::new(1, 500, 0.1).unwrap();
        let mut cfg = SolveConfig::new(2.0, 1.0, Backend::Direct);
        cfg.memory_budget_bytes = 1 << 20;
        let data = Dataset::from_1d(&[0.0], &[1.0]).unwrap();
        let err = fit(&grid, &data, &cfg).unwrap_err();
        assert!(err.to_string().contains("G = 1001"), "{err}");
        assert!(fit(&grid, &data, &cfg.with_backend(Backend::Dual)).is_ok());
    }

    #[test]
    fn one_by_one_examples() {
        let sys = unit_system();
        for backend in Backend::ALL {
            let phi = solve(&sys, backend).unwrap();
            assert!((phi[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15, "{backend}");
        }
    }

    #[test]
    fn zero_lambda_only_for_dual() {
        let grid = FrequencyGrid::new(1, 3, 0.5).unwrap();
        let data = Dataset::from_1d(&[-0.2, 0.4], &[1.0, -1.0]).unwrap();
        let cfg = SolveConfig::new(2.0, 0.0, Backend::Dual);
        let model = fit(&grid, &data, &cfg).unwrap();
        assert!(model.max_residual() < 1e-10, "{:?}", model.residuals);
        assert!(fit(&grid, &data, &cfg.with_backend(Backend::Svd)).is_err());
    }

    #[test]
    fn zero_lambda_singular_kernel_uses_pseudo_inverse() {
        // x and x + 1/Δξ give identical constraint rows.
        let grid = FrequencyGrid::new(1, 2, 1.0).unwrap();
        let data = Dataset::from_1d(&[0.1, 1.1], &[1.0, 1.0]).unwrap();
        let model = fit(&grid, &data, &SolveConfig::new(2.0, 0.0, Backend::Dual)).unwrap();
        assert!(model.max_residual() < 1e-8, "{:?}", model.residuals);
    }

    #[test]
    fn dual_handles_duplicate_rows_with_positive_lambda() {
        // K + λI is positive definite for λ > 0, even with duplicated rows.
        let grid = FrequencyGrid::new(1, 2, 1.0).unwrap();
        let data = Dataset::from_1d(&[0.1, 1.1], &[1.0, 1.0]).unwrap();
        assert!(fit(&grid, &data, &SolveConfig::new(2.0, 1e-3, Backend::Dual)).is_ok());
    }

    #[test]
    fn example_one_system_matches_closed_form() {
        // A = (1, …, 1), b = 1/Δξ, Γ = √λ diag((1 + j²Δξ²)^{α/4}) over j = 1..M.
        let (m, dxi, alpha, lambda) = (2, 1.0, 2.0, 1.0);
        let ws: Vec<f64> = (1..=m).map(|j| (1.0 + (j as f64 * dxi).powi(2)).powf(alpha / 4.0)).collect();
        let sys = AssembledSystem::from_parts(
            DMatrix::from_element(1, m, Complex64::new(1.0, 0.0)),
            ws,
            lambda,
            vec![1.0 / dxi],
        )
        .unwrap();
        for backend in Backend::ALL {
            let phi = solve(&sys, backend).unwrap();
            assert!((phi[0].re - 0.5 / 1.7).abs() < 1e-14, "{backend}: {}", phi[0]);
            assert!((phi[1].re - 0.2 / 1.7).abs() < 1e-14, "{backend}: {}", phi[1]);
        }
    }

    #[test]
    fn backends_agree_small() {
        let grid = FrequencyGrid::new(1, 4, 0.3).unwrap();
        let data = Dataset::from_1d(&[-0.7, 0.1, 0.45], &[0.3, -1.2, 0.8]).unwrap();
        let cfg = SolveConfig::new(1.5, 0.1, Backend::Direct);
        let sys = assemble(&grid, &data, &cfg).unwrap();
        let d = solve_direct(&sys).unwrap();
        let u = solve_dual(&sys).unwrap();
        let s = solve_svd(&sys).unwrap();
        assert!(rel_diff(&u, &d) < 1e-8);
        assert!(rel_diff(&s, &d) < 1e-8);
    }

    #[test]
    fn zero_labels_give_zero_model() {
        let grid = FrequencyGrid::new(2, 2, 0.5).unwrap();
        let data = Dataset::new(vec![vec![0.0, 0.0], vec![0.3, -0.1]], vec![0.0, 0.0]).unwrap();
        for backend in Backend::ALL {
            let model = fit(&grid, &data, &SolveConfig::new(3.0, 1.0, backend)).unwrap();
            assert!(model.coefficients.values().iter().all(|v| v.norm() == 0.0));
            assert_eq!(model.objective, 0.0);
            assert!(model.residuals.iter().all(|r| *r == 0.0));
        }
    }

    #[test]
    fn a_rows_conjugate_under_point_negation() {
        let grid = FrequencyGrid::new(2, 3, 0.2).unwrap();
        let cfg = SolveConfig::new(2.0, 1.0, Backend::Dual);
        let data = Dataset::new(vec![vec![0.31, -0.77], vec![-0.31, 0.77]], vec![1.0, 1.0]).unwrap();
        let sys = assemble(&grid, &data, &cfg).unwrap();
        for j in 0..grid.len() {
            assert!((sys.a()[(0, j)].norm() - 1.0).abs() < 1e-14);
            assert!((sys.a()[(0, j)] - sys.a()[(1, j)].conj()).norm() < 1e-14);
        }
        let gamma = sys.gamma_diag();
        assert!(gamma.iter().all(|g| *g >= 1.0));
    }

    #[test]
    fn riemann_normalization_scales_objective() {
        let grid = FrequencyGrid::new(2, 3, 0.5).unwrap();
        let data = Dataset::new(vec![vec![0.1, 0.2]], vec![1.0]).unwrap();
        let mut cfg = SolveConfig::new(3.0, 0.5, Backend::Dual);
        let plain = fit(&grid, &data, &cfg).unwrap();
        cfg.riemann_normalize = true;
        let scaled = fit(&grid, &data, &cfg).unwrap();
        assert!((scaled.objective - plain.objective * 0.25).abs() < 1e-14 * plain.objective);
    }

    #[test]
    fn single_point_reduction_pins_zero_mode() {
        let red = SinglePointReduction::new(5, 0.5, 2.0, 1.0).fit().unwrap();
        assert_eq!(red.density(0).unwrap(), 0.0);
        let d1 = red.density(1).unwrap();
        let dm1 = red.density(-1).unwrap();
        assert!((d1 - dm1).abs() < 1e-15);
        assert!(red.h(0.1).unwrap().is_finite());
    }
}

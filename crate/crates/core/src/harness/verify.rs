//! Desk-scale self-check suite behind `fdvar verify`.
//!
//! Each check returns a [`CheckOutcome`]; the command prints one line per
//! check and exits non-zero if any fails. [`VerifyOptions`] exposes the two
//! fault-injection knobs used as negative controls.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::format::linspace;
use crate::closed_form::{closed_form_h, ClosedFormParams};
use crate::critical::{
    critical_constant, gaussian_moment, gaussian_moment_closed_form, gaussian_sobolev_norm, log_log_slope,
    log_spaced_decreasing,
};
use crate::error::Result;
use crate::spectral::{Backend, Dataset, FrequencyGrid, SolveConfig};
use crate::subcritical::{build_construction, construction_sobolev_norm, evaluate_construction};
use crate::tikhonov::{assemble, fit, kkt_gradient, representer_residual, solve, SinglePointReduction};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Reference values for C_1 and C_2.
    pub critical_constants: [f64; 2],
    /// Relative tolerance for backend agreement.
    pub agreement_tolerance: f64,
    pub instances: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            critical_constants: [
                critical_constant(1).expect("d = 1"),
                critical_constant(2).expect("d = 2"),
            ],
            agreement_tolerance: 1e-8,
            instances: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), zero when both vanish.
pub fn relative_difference(a: &[Complex64], b: &[Complex64]) -> f64 {
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// A small random fitting problem.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub seed: u64,
    pub grid: FrequencyGrid,
    pub data: Dataset,
    pub alpha: f64,
    pub lambda: f64,
}

/// Deterministic instance with n ≤ 5, d ≤ 2, M ≤ 8 and λ ∈ {1e-3, 1, 10}.
pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=2usize);
    let m = rng.random_range(1..=8usize);
    let delta_xi = rng.random_range(0.1..1.0);
    let alpha = rng.random_range(0.5..4.0);
    let lambda = [1e-3, 1.0, 10.0][rng.random_range(0..3usize)];
    let n = rng.random_range(1..=5usize);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    while points.len() < n {
        let p: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if points.iter().all(|q| crate::spectral::distance(q, &p) > 0.05) {
            points.push(p);
        }
    }
    let labels = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    RandomInstance {
        seed,
        grid: FrequencyGrid::new(d, m, delta_xi).expect("valid grid"),
        data: Dataset::new(points, labels).expect("distinct points"),
        alpha,
        lambda,
    }
}

fn timed(id: u8, name: &'static str, budget: Option<f64>, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let result = f();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = budget {
        if seconds > b {
            passed = false;
            detail.push_str(&format!("; over the {b} s budget"));
        }
    }
    CheckOutcome {
        id,
        name,
        passed,
        detail,
        seconds,
    }
}

fn two_point_data() -> Dataset {
    Dataset::from_1d(&[-0.5, 0.5], &[0.9, 0.9]).expect("two distinct points")
}

/// Dual-backend model on the two-point problem with Δξ = 0.1.
pub fn two_point_model(m: usize, alpha: f64, lambda: f64) -> Result<crate::tikhonov::FittedModel> {
    let grid = FrequencyGrid::new(1, m, 0.1)?;
    fit(&grid, &two_point_data(), &SolveConfig::new(alpha, lambda, Backend::Dual))
}

pub fn four_point_dataset() -> Dataset {
    Dataset::new(
        vec![vec![-0.75, 0.5], vec![-0.25, 0.5], vec![0.25, 0.5], vec![0.75, 0.5]],
        vec![0.9, -0.4, 0.7, 0.3],
    )
    .expect("distinct points")
}

fn check_closed_form() -> Result<(bool, String)> {
    let reduced = SinglePointReduction::new(1000, 0.01, 4.0, 1.0).fit()?;
    let params = ClosedFormParams::new(1000, 0.01, 4.0, 1.0)?;
    let mut err: f64 = 0.0;
    for x in linspace(-0.5, 0.5, 1001) {
        err = err.max((reduced.h(x)? - closed_form_h(&params, x)).abs());
    }
    Ok((err <= 1e-8, format!("sup error {err:.3e} (limit 1e-8)")))
}

fn check_critical_constants(table: [f64; 2]) -> Result<(bool, String)> {
    let a = gaussian_sobolev_norm(1, 1.0, 1e-3)?;
    let b = gaussian_sobolev_norm(2, 2.0, 1e-3)?;
    let ra = (a - table[0]).abs() / table[0];
    let rb = (b - table[1]).abs() / table[1];
    Ok((
        ra <= 0.01 && rb <= 0.01,
        format!("d=1: {a:.6} vs {:.6} ({ra:.2e}); d=2: {b:.6} vs {:.6} ({rb:.2e}); limit 1%", table[0], table[1]),
    ))
}

/// σ grid used by the slope checks: 21 log-spaced values from 1e-1 to 1e-3.
pub fn trichotomy_sigmas() -> Vec<f64> {
    log_spaced_decreasing(1e-1, 1e-3, 21)
}

fn check_trichotomy() -> Result<(bool, String)> {
    let sigmas = trichotomy_sigmas();
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, alpha) in [(1usize, 0.5), (1, 3.0), (2, 1.0), (2, 4.0)] {
        let norms = sigmas
            .iter()
            .map(|&s| gaussian_sobolev_norm(d, alpha, s))
            .collect::<Result<Vec<_>>>()?;
        let slope = log_log_slope(&sigmas, &norms)?;
        let want = d as f64 - alpha;
        let good = (slope - want).abs() <= 0.05;
        ok &= good;
        parts.push(format!("(d={d}, α={alpha}) slope {slope:.4} want {want}{}", if good { "" } else { " ✗" }));
    }
    Ok((ok, parts.join("; ")))
}

fn check_moments() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for k in 1..=8 {
        let q = gaussian_moment(k)?;
        let c = gaussian_moment_closed_form(k);
        worst = worst.max((q - c).abs() / c);
    }
    Ok((worst <= 1e-10, format!("worst relative error {worst:.3e} over k = 1..8 (limit 1e-10)")))
}

struct InstanceReport {
    agreement: f64,
    representer: f64,
    kkt_ratio: f64,
}

fn run_instance(inst: &RandomInstance) -> Result<InstanceReport> {
    let config = SolveConfig::new(inst.alpha, inst.lambda, Backend::Direct);
    let sys = assemble(&inst.grid, &inst.data, &config)?;
    let sols = Backend::ALL
        .iter()
        .map(|&b| solve(&sys, b))
        .collect::<Result<Vec<_>>>()?;
    let mut agreement: f64 = 0.0;
    for i in 0..sols.len() {
        for j in i + 1..sols.len() {
            agreement = agreement.max(relative_difference(&sols[i], &sols[j]));
        }
    }
    let mut representer: f64 = 0.0;
    let mut kkt_ratio: f64 = 0.0;
    for phi in &sols {
        representer = representer.max(representer_residual(&sys, phi));
        let (grad, scale) = kkt_gradient(&sys, phi);
        kkt_ratio = kkt_ratio.max(grad / (10.0 * sys.solve_tolerance() * scale));
    }
    Ok(InstanceReport {
        agreement,
        representer,
        kkt_ratio,
    })
}

fn check_backends(reports: &[Result<InstanceReport>], tol: f64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for r in reports {
        match r {
            Ok(r) => worst = worst.max(r.agreement),
            Err(e) => return Ok((false, format!("instance failed: {e}"))),
        }
    }
    Ok((
        worst <= tol,
        format!("{} instances, worst pairwise relative difference {worst:.3e} (limit {tol:e})", reports.len()),
    ))
}

fn check_optimality(reports: &[Result<InstanceReport>]) -> Result<(bool, String)> {
    let (mut rep, mut kkt): (f64, f64) = (0.0, 0.0);
    for r in reports {
        match r {
            Ok(r) => {
                rep = rep.max(r.representer);
                kkt = kkt.max(r.kkt_ratio);
            }
            Err(e) => return Ok((false, format!("instance failed: {e}"))),
        }
    }
    Ok((
        rep <= 1e-8 && kkt <= 1.0,
        format!("representer residual {rep:.3e} (limit 1e-8); gradient / bound {kkt:.3e} (limit 1)"),
    ))
}

fn check_band_limit() -> Result<(bool, String)> {
    let coarse = two_point_model(100, 10.0, 0.5)?;
    let fine = two_point_model(1000, 10.0, 0.5)?;
    let mut sup: f64 = 0.0;
    for x in linspace(-1.0, 1.0, 2001) {
        sup = sup.max((coarse.evaluate_real(&[x])? - fine.evaluate_real(&[x])?).abs());
    }
    let mut dev: f64 = 0.0;
    for model in [&coarse, &fine] {
        for x in [-0.5, 0.5] {
            dev = dev.max((model.evaluate_real(&[x])? - 0.9).abs());
        }
    }
    Ok((
        sup < 0.02 && dev <= 0.05,
        format!("sup |h_100 − h_1000| = {sup:.3e} (limit 0.02); max |h(±0.5) − 0.9| = {dev:.4} (limit 0.05)"),
    ))
}

fn check_degeneracy() -> Result<(bool, String)> {
    let model = two_point_model(1000, 0.5, 0.5)?;
    let mut far: f64 = 0.0;
    for x in linspace(-1.0, 1.0, 2001) {
        if (x + 0.5).abs() > 0.2 && (x - 0.5).abs() > 0.2 {
            far = far.max(model.evaluate_real(&[x])?.abs());
        }
    }
    let near = model.evaluate_real(&[-0.5])?.abs().max(model.evaluate_real(&[0.5])?.abs());
    Ok((
        far < 0.05 && near > 0.5,
        format!("far-field sup {far:.4} (limit 0.05); max |h(x_i)| = {near:.4} (needs > 0.5)"),
    ))
}

fn check_subcritical() -> Result<(bool, String)> {
    let data = four_point_dataset();
    let sigmas = [0.2, 0.1, 0.05, 0.025];
    let mut norms = Vec::new();
    let mut residual: f64 = 0.0;
    for &s in &sigmas {
        let c = build_construction(&data, s)?;
        for (x, y) in data.points().iter().zip(data.labels()) {
            residual = residual.max((evaluate_construction(&c, x)? - y).abs());
        }
        norms.push(construction_sobolev_norm(&c, 1.0)?);
    }
    let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
    let slope = log_log_slope(&sigmas, &norms)?;
    let listed: Vec<String> = norms.iter().map(|v| format!("{v:.4e}")).collect();
    Ok((
        decreasing && (slope - 1.0).abs() <= 0.1 && residual <= 1e-10,
        format!(
            "norms [{}]; decreasing {decreasing}; slope {slope:.4} (want 1 ± 0.1); residual {residual:.2e} (limit 1e-10)",
            listed.join(", ")
        ),
    ))
}

fn check_relaxation() -> Result<(bool, String)> {
    let tight = two_point_model(1000, 10.0, 1e-4)?.max_residual();
    let loose = two_point_model(1000, 10.0, 1.0)?.max_residual();
    Ok((
        tight < 0.1 * loose,
        format!("max residual {tight:.3e} at λ = 1e-4 vs {loose:.3e} at λ = 1 (ratio limit 0.1)"),
    ))
}

/// Runs every check in order.
pub fn run_verify(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    let mut out = vec![
        timed(1, "closed-form agreement", Some(30.0), check_closed_form),
        timed(2, "critical constants", Some(5.0), || check_critical_constants(opts.critical_constants)),
        timed(3, "trichotomy slopes", None, check_trichotomy),
        timed(4, "moment identities", None, check_moments),
    ];
    let start = Instant::now();
    let reports: Vec<_> = (0..opts.instances as u64).map(|s| run_instance(&random_instance(s))).collect();
    let shared = start.elapsed().as_secs_f64();
    let mut backends = timed(5, "backend agreement", None, || check_backends(&reports, opts.agreement_tolerance));
    backends.seconds += shared;
    if backends.seconds > 60.0 {
        backends.passed = false;
        backends.detail.push_str("; over the 60 s budget");
    }
    out.push(backends);
    out.push(timed(6, "band-limit convergence", None, check_band_limit));
    out.push(timed(7, "subcritical degeneracy", None, check_degeneracy));
    out.push(timed(8, "construction decay", None, check_subcritical));
    let mut opt = timed(9, "representer and KKT", None, || check_optimality(&reports));
    opt.seconds += shared;
    out.push(opt);
    out.push(timed(10, "lambda relaxation", None, check_relaxation));
    out
}

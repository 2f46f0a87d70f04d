// Gaussian Sobolev norm as σ → 0 on either side of α = d and at α = d.

use fdvar::critical::{log_spaced_decreasing, run_trichotomy_sweep, LimitBehavior};

pub fn run_example() -> Vec<(usize, f64, f64, LimitBehavior)> {
    let sigmas = log_spaced_decreasing(1e-2, 1e-4, 11);
    [(1, 0.5), (1, 1.0), (1, 3.0), (2, 1.0), (2, 2.0), (2, 4.0), (3, 3.0)]
        .iter()
        .map(|&(d, alpha)| {
            let s = run_trichotomy_sweep(d, alpha, &sigmas).unwrap();
            (d, alpha, s.fitted_slope, s.classification)
        })
        .collect()
}

#[allow(dead_code)]
fn main() {
    println!("{:>2} {:>5} {:>8}  limit", "d", "alpha", "slope");
    for (d, alpha, slope, class) in run_example() {
        println!("{d:>2} {alpha:>5} {slope:>8.4}  {class:?}");
    }
}

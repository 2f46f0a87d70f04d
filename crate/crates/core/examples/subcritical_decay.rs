// RBF interpolants driving the Sobolev norm to zero when α < d, and the
// same construction blowing up when α > d.

use fdvar::harness::verify::four_point_dataset;
use fdvar::subcritical::run_decay_sweep;
use fdvar::Dataset;

pub struct Decay {
    pub label: &'static str,
    pub norms: Vec<f64>,
    pub slope: f64,
}

pub fn run_example() -> Vec<Decay> {
    let sigmas = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let line = Dataset::from_1d(&[-0.75, -0.25, 0.25, 0.75], &[0.9, -0.4, 0.7, 0.3]).unwrap();
    [
        ("d=2, alpha=1", four_point_dataset(), 1.0),
        ("d=1, alpha=2", line, 2.0),
    ]
    .into_iter()
    .map(|(label, data, alpha)| {
        let s = run_decay_sweep(&data, alpha, &sigmas).unwrap();
        Decay {
            label,
            norms: s.points.iter().map(|p| p.norm).collect(),
            slope: s.fitted_slope,
        }
    })
    .collect()
}

#[allow(dead_code)]
fn main() {
    for d in run_example() {
        let norms: Vec<String> = d.norms.iter().map(|v| format!("{v:.4e}")).collect();
        println!("{}: slope {:.3}; norms {}", d.label, d.slope, norms.join(" "));
    }
}

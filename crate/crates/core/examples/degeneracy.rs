// Sweeping α through the critical value d = 1 on the two-point problem.
// Subcritical exponents give spikes at the data points and near-zero h
// elsewhere.

use fdvar::harness::verify::two_point_model;

pub struct Degeneracy {
    pub alpha: f64,
    pub at_data: f64,
    pub far_field: f64,
}

pub fn run_example() -> Vec<Degeneracy> {
    [0.5, 0.9, 2.0, 10.0]
        .iter()
        .map(|&alpha| {
            let model = two_point_model(1000, alpha, 0.5).unwrap();
            let far_field = (0..=200)
                .map(|k| -1.0 + 0.01 * k as f64)
                .filter(|x| (x + 0.5f64).abs() > 0.2 && (x - 0.5f64).abs() > 0.2)
                .map(|x| model.evaluate_real(&[x]).unwrap().abs())
                .fold(0.0, f64::max);
            Degeneracy {
                alpha,
                at_data: model.evaluate_real(&[0.5]).unwrap(),
                far_field,
            }
        })
        .collect()
}

#[allow(dead_code)]
fn main() {
    println!("{:>6} {:>10} {:>10}", "alpha", "h(0.5)", "far sup");
    for d in run_example() {
        println!("{:>6} {:>10.4} {:>10.4}", d.alpha, d.at_data, d.far_field);
    }
}

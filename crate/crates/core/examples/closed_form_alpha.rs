// One-point reconstruction h(x) from the closed form as the band limit grows.
// For α < 1 the value next to the origin drains away and h collapses to a
// spike; for α > 1 it settles on a fixed bump of width about Δξ/2π.
//
//     cargo run --example closed_form_alpha -- 1000000

use fdvar::closed_form::{closed_form_h, ClosedFormParams};

pub const PROBE: f64 = 0.002;

pub struct AlphaRow {
    pub alpha: f64,
    pub h0: f64,
    /// h(PROBE) for each band limit, in the order given.
    pub near: Vec<f64>,
}

pub fn table(band_limits: &[usize]) -> Vec<AlphaRow> {
    [0.5, 2.0, 4.0, 10.0]
        .iter()
        .map(|&alpha| {
            let params: Vec<_> = band_limits
                .iter()
                .map(|&m| ClosedFormParams::new(m, 0.01, alpha, 1.0).unwrap())
                .collect();
            AlphaRow {
                alpha,
                h0: closed_form_h(params.last().unwrap(), 0.0),
                near: params.iter().map(|p| closed_form_h(p, PROBE)).collect(),
            }
        })
        .collect()
}

pub fn run_example() -> Vec<AlphaRow> {
    table(&[1_000, 10_000, 100_000])
}

#[allow(dead_code)]
fn main() {
    let top = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let mut ms = vec![1_000usize];
    while *ms.last().unwrap() < top {
        let next = ms.last().unwrap() * 10;
        ms.push(next.min(top));
    }
    println!("delta_xi = 0.01, lambda = 1; h({PROBE}) for M = {ms:?}");
    for row in table(&ms) {
        let near: Vec<String> = row.near.iter().map(|v| format!("{v:.4}")).collect();
        println!("alpha {:>4}: h(0) = {:.4}, near = {}", row.alpha, row.h0, near.join(" "));
    }
}

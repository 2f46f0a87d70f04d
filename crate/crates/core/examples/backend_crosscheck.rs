// Direct, dual and SVD solves of the same random problems, compared
// pairwise.

use fdvar::harness::verify::{random_instance, relative_difference};
use fdvar::tikhonov::{assemble, solve};
use fdvar::{Backend, SolveConfig};

pub fn run_example() -> Vec<(u64, usize, f64)> {
    (0..12)
        .map(|seed| {
            let inst = random_instance(seed);
            let config = SolveConfig::new(inst.alpha, inst.lambda, Backend::Direct);
            let sys = assemble(&inst.grid, &inst.data, &config).unwrap();
            let direct = solve(&sys, Backend::Direct).unwrap();
            let worst = [Backend::Dual, Backend::Svd]
                .iter()
                .map(|&b| relative_difference(&direct, &solve(&sys, b).unwrap()))
                .fold(0.0, f64::max);
            (seed, inst.grid.len(), worst)
        })
        .collect()
}

#[allow(dead_code)]
fn main() {
    println!("{:>4} {:>5} {:>12}", "seed", "G", "max rel diff");
    for (seed, g, diff) in run_example() {
        println!("{seed:>4} {g:>5} {diff:>12.3e}");
    }
}

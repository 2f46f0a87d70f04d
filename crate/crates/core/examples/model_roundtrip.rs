// Fit from CSV and TOML files, save the model, reload it and evaluate.

use std::io::Write;

use fdvar::harness::commands::{cmd_eval, cmd_fit, EvalGrid};
use fdvar::harness::io::ConfigLayer;

pub fn run_example() -> (String, String) {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("points.csv");
    let config = dir.path().join("fit.toml");
    let model = dir.path().join("model.json");
    std::fs::write(&data, "x,y\n-0.5,0.9\n0.5,0.9\n").unwrap();
    std::fs::File::create(&config)
        .unwrap()
        .write_all(b"alpha = 10\nlambda = 0.5\nM = 100\ndelta_xi = 0.1\nbackend = \"dual\"\n")
        .unwrap();

    let mut summary = Vec::new();
    cmd_fit(Some(&config), &ConfigLayer::default(), &data, &model, &mut summary).unwrap();
    let mut csv = Vec::new();
    let grid = EvalGrid {
        lo: -1.0,
        hi: 1.0,
        points: 9,
    };
    cmd_eval(&model, &grid, None, &mut csv, &mut std::io::sink()).unwrap();
    (String::from_utf8(summary).unwrap(), String::from_utf8(csv).unwrap())
}

#[allow(dead_code)]
fn main() {
    let (summary, csv) = run_example();
    print!("{summary}{csv}");
}

// An experiment spec swept over α with the closed-form method, producing one
// CSV per point, a summary table and a manifest.

use fdvar::harness::commands::{cmd_sweep, ExperimentSpec, Manifest};

const SPEC: &str = r#"{
  "name": "alpha_split",
  "method": "closed_form",
  "config": { "M": 1000, "delta_xi": 0.01, "lambda": 1.0 },
  "sweep": { "axis": "alpha", "values": [0.5, 2, 4, 10] },
  "eval": { "lo": -0.5, "hi": 0.5, "points": 101 }
}"#;

pub fn run_example() -> (Manifest, Vec<String>) {
    let spec: ExperimentSpec = serde_json::from_str(SPEC).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = cmd_sweep(&spec, dir.path(), dir.path(), &mut std::io::sink()).unwrap();
    let mut files: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    (manifest, files)
}

#[allow(dead_code)]
fn main() {
    let (manifest, files) = run_example();
    for p in &manifest.points {
        println!("alpha = {:<4} {} h(0) = {:.5}", p.value, p.status, p.metric.unwrap_or(f64::NAN));
    }
    println!("wrote {}", files.join(", "));
}

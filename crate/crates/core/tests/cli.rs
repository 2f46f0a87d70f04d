use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fdvar::harness::io::write_model;
use fdvar::harness::verify::{run_verify, VerifyOptions};
use fdvar::num_complex::Complex64;
use fdvar::tikhonov::FittedModel;
use fdvar::{Backend, FrequencyGrid, SolveConfig, SpectralCoefficients};

fn fdvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdvar")).args(args).output().unwrap()
}

fn fdvar_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdvar"))
        .args(args)
        .env(key, value)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_curve(csv: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn fit_then_eval_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "one.csv", "x,y\n0,2\n");
    let cfg = write(dir.path(), "c.toml", "alpha = 4\nlambda = 1\nM = 100\ndelta_xi = 0.01\n");
    let model = dir.path().join("m.json");
    let o = fdvar(&["fit", "--config", s(&cfg), "--data", s(&data), "--out", s(&model)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o);
    for key in ["objective=", "max_residual=", "backend=dual", "wall_time_s="] {
        assert!(line.contains(key), "{line}");
    }
    let o = fdvar(&["eval", "--model", s(&model), "--lo", "-0.5", "--hi", "0.5", "--points", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("imaginary residue"));
    let curve = read_curve(&stdout(&o));
    assert_eq!(curve.len(), 11);
    let h0 = curve[5].1;
    assert!(h0 > 0.0 && h0 < 2.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "one.json", r#"[{"x":[0.0],"y":2.0}]"#);
    let model = dir.path().join("m.json");
    let o = fdvar(&[
        "fit", "--data", s(&data), "--out", s(&model), "--alpha", "3", "--lambda", "0.5", "-M", "5", "--delta-xi",
        "0.2", "--backend", "svd",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("backend=svd"));
}

#[test]
fn empty_dataset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "empty.csv", "x,y\n");
    let cfg = write(dir.path(), "c.toml", "alpha = 4\nlambda = 1\nM = 10\ndelta_xi = 0.1\n");
    let o = fdvar(&["fit", "--config", s(&cfg), "--data", s(&data), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dataset empty"), "{}", stderr(&o));
}

#[test]
fn missing_alpha_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "one.csv", "x,y\n0,2\n");
    let cfg = write(dir.path(), "c.toml", "lambda = 1\nM = 10\ndelta_xi = 0.1\n");
    let o = fdvar(&["fit", "--config", s(&cfg), "--data", s(&data), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));
}

#[test]
fn malformed_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "one.csv", "x,y\n0,2\n");
    let cfg = write(dir.path(), "c.toml", "alpha = 4\nlambda = -1\nM = 10\ndelta_xi = 0.1\n");
    let o = fdvar(&["fit", "--config", s(&cfg), "--data", s(&data), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));
}

#[test]
fn capacity_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "one.csv", "x,y\n0,2\n");
    let cfg = write(
        dir.path(),
        "c.toml",
        "alpha = 4\nlambda = 1\nM = 500\ndelta_xi = 0.1\nbackend = \"direct\"\nmemory_budget_bytes = 100000\n",
    );
    let o = fdvar(&["fit", "--config", s(&cfg), "--data", s(&data), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("G = 1001"), "{}", stderr(&o));
}

#[test]
fn eval_rejects_non_hermitian_model() {
    let dir = tempfile::tempdir().unwrap();
    let grid = FrequencyGrid::new(1, 2, 1.0).unwrap();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    values[3] = Complex64::new(0.0, 1.0);
    let model = FittedModel {
        coefficients: SpectralCoefficients::new(grid, values).unwrap(),
        config: SolveConfig::new(2.0, 1.0, Backend::Dual),
        dataset_hash: String::new(),
        objective: 0.0,
        residuals: vec![],
    };
    let path = dir.path().join("bad.json");
    write_model(&path, &model).unwrap();
    let o = fdvar(&["eval", "--model", s(&path), "--points", "7"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("imaginary residue"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn eval_zero_model_gives_zero_column() {
    let dir = tempfile::tempdir().unwrap();
    let grid = FrequencyGrid::new(2, 2, 0.5).unwrap();
    let model = FittedModel {
        coefficients: SpectralCoefficients::zeros(grid),
        config: SolveConfig::new(2.0, 1.0, Backend::Dual),
        dataset_hash: String::new(),
        objective: 0.0,
        residuals: vec![],
    };
    let path = dir.path().join("zero.json");
    write_model(&path, &model).unwrap();
    let out = dir.path().join("h.csv");
    let o = fdvar(&["eval", "--model", s(&path), "--points", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("x1,x2,h\n"));
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0.0")));
}

fn fit_two_point(dir: &Path, alpha: &str, m: &str) -> Vec<(f64, f64)> {
    let data = write(dir, "two.csv", "x,y\n-0.5,0.9\n0.5,0.9\n");
    let model = dir.join(format!("m_{alpha}_{m}.json"));
    let o = fdvar(&[
        "fit", "--data", s(&data), "--out", s(&model), "--alpha", alpha, "--lambda", "0.5", "-M", m, "--delta-xi",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = fdvar(&["eval", "--model", s(&model), "--lo", "-1", "--hi", "1", "--points", "401"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    read_curve(&stdout(&o))
}

#[test]
fn band_limit_reconstructions_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let a = fit_two_point(dir.path(), "10", "100");
    let b = fit_two_point(dir.path(), "10", "1000");
    let sup = a.iter().zip(&b).map(|(p, q)| (p.1 - q.1).abs()).fold(0.0, f64::max);
    assert!(sup < 0.02, "{sup}");
}

#[test]
fn subcritical_reconstruction_degenerates() {
    let dir = tempfile::tempdir().unwrap();
    let c = fit_two_point(dir.path(), "0.5", "1000");
    let far = c
        .iter()
        .filter(|(x, _)| (x + 0.5).abs() > 0.2 && (x - 0.5).abs() > 0.2)
        .map(|(_, h)| h.abs())
        .fold(0.0, f64::max);
    assert!(far < 0.05, "{far}");
}

fn alpha_spec(dir: &Path, values: &str) -> PathBuf {
    write(
        dir,
        "spec.json",
        &format!(
            r#"{{"name":"alpha_split","method":"closed_form","config":{{"M":1000,"delta_xi":0.01,"lambda":1}},
               "sweep":{{"axis":"alpha","values":[{values}]}},"eval":{{"lo":-0.5,"hi":0.5,"points":201}}}}"#
        ),
    )
}

#[test]
fn sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = alpha_spec(dir.path(), "0.5, 2, 4, 10");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = fdvar(&["sweep", "--spec", s(&spec), "--out-dir", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let points = manifest["points"].as_array().unwrap();
    assert_eq!(points.len(), 4);
    for (i, p) in points.iter().enumerate() {
        assert_eq!(p["index"], i);
        assert_eq!(p["status"], "ok");
        assert_eq!(p["artifact"], format!("alpha_split_alpha_{i:03}.csv"));
    }
}

#[test]
fn sweep_threads_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = alpha_spec(dir.path(), "0.5, 2, 4, 10");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = fdvar_env(&["sweep", "--spec", s(&spec), "--out-dir", s(&a)], "FDVAR_THREADS", "1");
    assert_eq!(o.status.code(), Some(0));
    let o = fdvar_env(&["sweep", "--spec", s(&spec), "--out-dir", s(&b)], "FDVAR_THREADS", "4");
    assert_eq!(o.status.code(), Some(0));
    for n in ["manifest.json", "summary.csv", "alpha_split_alpha_003.csv"] {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap());
    }
}

#[test]
fn bad_thread_count_exits_2() {
    let o = fdvar_env(&["verify", "--instances", "1"], "FDVAR_THREADS", "many");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("FDVAR_THREADS"));
}

#[test]
fn empty_sweep_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = alpha_spec(dir.path(), "");
    let o = fdvar(&["sweep", "--spec", s(&spec), "--out-dir", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_with_no_successful_point_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"name":"huge","method":"solver","points":[{"x":[0.0],"y":2.0}],
            "config":{"alpha":4,"lambda":1,"delta_xi":0.1,"memory_budget_bytes":64},
            "sweep":{"axis":"M","values":[100,200]},"eval":{"lo":0,"hi":1,"points":3}}"#,
    );
    let out = dir.path().join("o");
    let o = fdvar(&["sweep", "--spec", s(&spec), "--out-dir", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert_eq!(manifest.matches("\"failed\"").count(), 2 + 1);
}

#[test]
fn subcritical_sigma_sweep_decays() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "four.csv", "x1,x2,y\n-0.75,0.5,0.9\n-0.25,0.5,-0.4\n0.25,0.5,0.7\n0.75,0.5,0.3\n");
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"name":"decay","method":"subcritical","dataset_path":"four.csv","config":{"alpha":1},
            "sweep":{"axis":"sigma","values":[0.2,0.1,0.05,0.025]}}"#,
    );
    let out = dir.path().join("o");
    let o = fdvar(&["sweep", "--spec", s(&spec), "--out-dir", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let norms: Vec<f64> = summary.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(norms.len(), 4);
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
}

#[test]
fn subcritical_command_writes_decay_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "four.csv", "x1,x2,y\n-0.75,0.5,0.9\n-0.25,0.5,-0.4\n0.25,0.5,0.7\n0.75,0.5,0.3\n");
    let o = fdvar(&["subcritical", "--data", s(&data), "--alpha", "1", "--sigmas", "0.2,0.1,0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("sigma,norm,dominance_margin\n"));
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn critical_command_writes_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("n.csv");
    let verdict = dir.path().join("v.json");
    let o = fdvar(&[
        "critical", "-d", "2", "--alpha", "2", "--sigma-hi", "1e-2", "--sigma-lo", "1e-4", "--count", "5", "--out",
        s(&csv), "--verdict", s(&verdict),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(verdict).unwrap()).unwrap();
    assert_eq!(v["classification"], "converges");
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 6);
}

#[test]
fn closed_form_command_curve() {
    let o = fdvar(&["closed-form", "--alpha", "2", "-M", "2", "--delta-xi", "1", "--lo", "0", "--hi", "0", "--points", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let curve = read_curve(&stdout(&o));
    assert!((curve[0].1 - 1.4 / 1.7).abs() < 1e-15);
}

#[test]
fn verify_fresh_checkout_passes_all() {
    let o = fdvar(&["verify"]);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 10);
    assert_eq!(o.status.code(), Some(0), "{out}");
}

#[test]
fn verify_perturbed_constant_fails_constant_item() {
    let mut opts = VerifyOptions {
        instances: 5,
        ..VerifyOptions::default()
    };
    opts.critical_constants[1] *= 1.05;
    let outcomes = run_verify(&opts);
    assert!(!outcomes[1].passed, "{}", outcomes[1]);
    assert_eq!(outcomes[1].id, 2);
}

#[test]
fn verify_mismatched_tolerance_fails_agreement_item() {
    let opts = VerifyOptions {
        instances: 5,
        agreement_tolerance: 1e-18,
        ..VerifyOptions::default()
    };
    let outcomes = run_verify(&opts);
    assert!(!outcomes[4].passed, "{}", outcomes[4]);
    assert!(VerifyOptions::default().agreement_tolerance > 1e-12);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_langevin-lab"))
        .args(args)
        .env("LANGEVIN_LAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn quad_target(dir: &Path) -> String {
    let path = dir.join("quad.json");
    fs::write(&path, r#"{"type": "quadratic", "mean": [1.0], "precision": [[2.0]]}"#).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn sample_is_deterministic_and_writes_manifest() {
    let dir = TempDir::new().unwrap();
    let target = quad_target(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = lab(&[
            "sample", "--target", &target, "--h", "0.1", "--K", "100", "--seed", "7", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success());
        fs::read(&out).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("k,theta_0\n"));
    assert_eq!(text.lines().count(), 102);

    let manifest: Value =
        serde_json::from_slice(&fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "sample");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["parameters"]["h"], 0.1);
    assert_eq!(manifest["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn replay_reproduces_output() {
    let dir = TempDir::new().unwrap();
    let target = quad_target(dir.path());
    let out = dir.path().join("a.csv");
    assert!(lab(&[
        "sample", "--target", &target, "--h", "0.2", "--K", "30", "--seed", "3", "--sigma", "0.5",
        "--oracle", "gaussian", "--out", out.to_str().unwrap(),
    ])
    .status
    .success());
    let manifest = dir.path().join("a.csv.manifest.json");
    let again = dir.path().join("again.csv");
    let report = stdout_json(&lab(&[
        "replay", "--manifest", manifest.to_str().unwrap(), "--out", again.to_str().unwrap(),
    ]));
    assert_eq!(report["reproduced"], true);
    assert_eq!(fs::read(out).unwrap(), fs::read(again).unwrap());
}

#[test]
fn noisy_oracle_changes_the_path() {
    let dir = TempDir::new().unwrap();
    let target = quad_target(dir.path());
    let base = ["sample", "--target", target.as_str(), "--h", "0.1", "--K", "20", "--seed", "1"];
    let exact = lab(&base);
    let zero = lab(&[&base[..], &["--oracle", "gaussian", "--sigma", "0"]].concat());
    let noisy = lab(&[&base[..], &["--oracle", "gaussian", "--sigma", "0.5"]].concat());
    let rademacher = lab(&[&base[..], &["--oracle", "rademacher", "--sigma", "0.5"]].concat());
    for o in [&exact, &zero, &noisy, &rademacher] {
        assert!(o.status.success());
    }
    assert_eq!(exact.stdout, zero.stdout);
    assert_ne!(exact.stdout, noisy.stdout);
    assert_ne!(noisy.stdout, rademacher.stdout);
}

#[test]
fn subsampled_logistic_sampling() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("logit.json");
    fs::write(
        &path,
        r#"{"type": "logistic", "X": [[1, 0.5], [0, 1], [-1, 2], [0.3, -0.7]], "y": [1, 0, 1, 0], "lambda": 0.5}"#,
    )
    .unwrap();
    let target = path.to_str().unwrap();
    let ok = lab(&[
        "sample", "--target", target, "--h", "0.1", "--K", "10", "--oracle", "subsampled", "--batch", "2",
    ]);
    assert!(ok.status.success());
    assert_eq!(String::from_utf8(ok.stdout).unwrap().lines().next(), Some("k,theta_0,theta_1"));
    let bad = lab(&[
        "sample", "--target", target, "--h", "0.1", "--K", "10", "--oracle", "subsampled", "--batch", "9",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--batch"));
}

#[test]
fn replica_summary_matches_exact_moments() {
    let dir = TempDir::new().unwrap();
    let target = quad_target(dir.path());
    // f = (θ−1)², h = 0.1, K = 100 from θ0 = 0: mean and variance follow
    // m_k = 1 − 0.8^k and v_k = 0.2·(1 − 0.64^k)/0.36.
    let out = lab(&[
        "sample", "--target", &target, "--h", "0.1", "--K", "100", "--replicas", "1000", "--seed", "11",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("coordinate,replicas,mean,variance,mean_std_error,variance_std_error")
    );
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let exact_mean = 1.0 - 0.8f64.powi(100);
    let exact_var = 0.2 * (1.0 - 0.64f64.powi(100)) / 0.36;
    assert!(((row[2] - exact_mean) / row[4]).abs() < 4.0, "{row:?}");
    assert!(((row[3] - exact_var) / row[5]).abs() < 4.0, "{row:?}");
}

#[test]
fn bound_reports_json() {
    let report = stdout_json(&lab(&[
        "bound", "--m", "4", "--M", "5", "--h", "0.2222222222222222", "--K", "10", "--p", "1",
        "--w2init", "1",
    ]));
    assert!((report["value"].as_f64().unwrap() - 1.0725).abs() < 1e-4);
    assert_eq!(report["regime"], "a");
    for key in ["gamma", "contraction_term", "bias_term"] {
        assert!(report[key].is_number());
    }
    let noisy = stdout_json(&lab(&[
        "bound", "--m", "4", "--M", "5", "--h", "0.2", "--K", "10", "--p", "1", "--w2init", "1",
        "--sigma", "1",
    ]));
    assert!(noisy["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn bound_rejects_out_of_range_step() {
    let out = lab(&[
        "bound", "--m", "4", "--M", "5", "--h", "0.5", "--K", "10", "--p", "1", "--w2init", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--h"));
}

#[test]
fn plan_outputs_and_usage_errors() {
    let plan = stdout_json(&lab(&["plan", "--m", "4", "--M", "5", "--p", "10", "--w2init", "3.5", "--eps", "0.1"]));
    assert_eq!(plan["binding"], "accuracy");
    assert!(plan["predicted_bound"].as_f64().unwrap() <= 0.1);
    let many = stdout_json(&lab(&["plan", "--m", "4", "--M", "5", "--p", "10", "--w2init", "3.5", "--eps", "0.1,0.3"]));
    assert_eq!(many.as_array().unwrap().len(), 2);

    let zero = lab(&["plan", "--m", "4", "--M", "5", "--p", "10", "--w2init", "3.5", "--eps", "0"]);
    assert_eq!(zero.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&zero.stderr).contains("--eps"));
    let missing = lab(&["plan", "--m", "4"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn figure1_csv_schema() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fig.csv");
    let status = lab(&[
        "figure1", "--eps", "0.1,0.3", "--p", "10,100", "--grid-size", "10000", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,epsilon,k_our,k_dm,log10_k_our,log10_k_dm,ratio"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(row.len(), 7);
        let k_our: u64 = row[2].parse().unwrap();
        let k_dm: u64 = row[3].parse().unwrap();
        assert!(k_our < k_dm);
    }
    assert!(dir.path().join("fig.csv.manifest.json").exists());
}

#[test]
fn validate_passes_on_small_sweep() {
    let report = stdout_json(&lab(&["validate", "--instances", "1", "--seed", "5"]));
    assert_eq!(report["failures"], 0);
    assert!(report["first_counterexample"].is_null());
}

#[test]
fn bad_inputs_exit_with_usage_code() {
    let dir = TempDir::new().unwrap();
    let target = quad_target(dir.path());
    let missing = lab(&["sample", "--target", "/nonexistent.json", "--h", "0.1", "--K", "1"]);
    assert_eq!(missing.status.code(), Some(2));
    let neg_h = lab(&["sample", "--target", &target, "--h", "-1", "--K", "1"]);
    assert_eq!(neg_h.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&neg_h.stderr).contains("--h"));
    let wrong_dim = lab(&["sample", "--target", &target, "--h", "0.1", "--K", "1", "--theta0", "1,2"]);
    assert_eq!(wrong_dim.status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_langevin-lab"))
        .args(["plan", "--m", "4", "--M", "5", "--p", "1", "--w2init", "1", "--eps", "0.1"])
        .env("LANGEVIN_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

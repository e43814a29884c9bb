//! End-to-end tests of the `gsm` binary: exit codes, output schemas,
//! and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn gsm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn estimate_smoke_contract() {
    let dir = tempfile::tempdir().unwrap();
    let sim = gsm(
        &[
            "simulate", "--model", "1:1", "--m", "5", "--n", "60", "--graph", "er:0.3",
            "--seed", "3", "--out", "toy.csv",
        ],
        dir.path(),
    );
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    let before = std::fs::read(dir.path().join("toy.csv")).unwrap();

    let out = gsm(
        &[
            "estimate", "--data", "toy.csv", "--a", "1", "--b", "1", "--centered", "--h",
            "pow:1:3", "--mult", "auto", "--nlambda", "10", "--out", "est.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let est = read_json(&dir.path().join("est.json"));
    assert_eq!(est["schema"], "gsm/1");
    let k = est["K"].as_array().unwrap();
    assert_eq!(k.len(), 5);
    for i in 0..5 {
        for j in 0..5 {
            let kij = k[i].as_array().unwrap()[j].as_f64().unwrap();
            let kji = k[j].as_array().unwrap()[i].as_f64().unwrap();
            assert_eq!(kij, kji, "K must be symmetric");
        }
    }
    assert!(dir.path().join("est.json.manifest.json").exists());
    // Inputs are never mutated.
    assert_eq!(before, std::fs::read(dir.path().join("toy.csv")).unwrap());
}

#[test]
fn estimate_rejects_zero_with_log_linear_part() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "1.0,2.0\n0.5,0.0\n1.5,2.5\n").unwrap();
    let out = gsm(
        &[
            "estimate", "--data", "bad.csv", "--a", "0.5", "--b", "0", "--h", "pow:2:inf",
            "--out", "est.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("row 2") && msg.contains("column 2"), "message was: {msg}");
}

#[test]
fn estimate_recovers_support_with_ebic_on_easy_instance() {
    let dir = tempfile::tempdir().unwrap();
    let sim = gsm(
        &[
            "simulate", "--model", "1:1", "--m", "5", "--n", "2000", "--graph",
            "block:0.9:1", "--seed", "41", "--out", "easy.csv",
        ],
        dir.path(),
    );
    assert!(sim.status.success());
    let out = gsm(
        &[
            "estimate", "--data", "easy.csv", "--a", "1", "--b", "1", "--centered", "--h",
            "pow:1:3", "--ebic", "--refit", "--out", "est.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let est = read_json(&dir.path().join("est.json"));
    let truth = read_json(&dir.path().join("easy.csv.truth.json"));
    assert_eq!(est["support"], truth["support"], "seeded easy instance must recover support");
    assert!(est["ebic_path"].as_array().unwrap().len() == 50);
}

#[test]
fn simulate_is_deterministic_and_reports_truth() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--model", "1:1", "--m", "6", "--n", "50", "--graph", "block:0.8:2",
        "--mu", "0.5", "--seed", "11", "--out", "d.csv",
    ];
    assert!(gsm(&args, dir.path()).status.success());
    let first = std::fs::read(dir.path().join("d.csv")).unwrap();
    let truth1 = std::fs::read(dir.path().join("d.csv.truth.json")).unwrap();
    assert!(gsm(&args, dir.path()).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("d.csv")).unwrap());
    assert_eq!(truth1, std::fs::read(dir.path().join("d.csv.truth.json")).unwrap());

    // Truth eigenvalue normalization.
    let truth = read_json(&dir.path().join("d.csv.truth.json"));
    let k = truth["K"].as_array().unwrap();
    let m = k.len();
    let mat = nalgebra::DMatrix::from_fn(m, m, |i, j| {
        k[i].as_array().unwrap()[j].as_f64().unwrap()
    });
    let min_eig = mat.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    assert!((min_eig - 0.1).abs() < 1e-8, "min eigenvalue {min_eig}");

    // eta = K mu recorded for the non-centered truth.
    assert!(truth["eta"].as_array().unwrap().iter().any(|v| v.as_f64().unwrap() != 0.0));
}

#[test]
fn simulate_gamma_model_records_constant_eta() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsm(
        &[
            "simulate", "--model", "0.5:0", "--m", "4", "--n", "30", "--graph", "er:0.4",
            "--eta", "-0.5", "--seed", "5", "--out", "g.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let truth = read_json(&dir.path().join("g.csv.truth.json"));
    for v in truth["eta"].as_array().unwrap() {
        assert_eq!(v.as_f64().unwrap(), -0.5);
    }
    // b = 0 samples stay strictly positive.
    let text = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    for cell in text.split([',', '\n']).filter(|c| !c.is_empty()) {
        assert!(cell.parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn roc_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "roc", "--model", "1:1", "--graph", "block:0.8:2", "--m", "10", "--n", "150", "--h",
        "pow:1:3", "--mult", "auto", "--trials", "1", "--num-k0", "1", "--nlambda", "12",
        "--seed", "2", "--out-prefix", "run_",
    ];
    let out = gsm(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let auc1 = std::fs::read(dir.path().join("run_auc.json")).unwrap();
    let roc1 = std::fs::read(dir.path().join("run_roc.csv")).unwrap();
    assert!(dir.path().join("run_manifest.json").exists());
    let parsed = read_json(&dir.path().join("run_auc.json"));
    let mean = parsed["mean"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&mean));
    assert_eq!(parsed["trials"].as_u64(), Some(1));

    assert!(gsm(&args, dir.path()).status.success());
    assert_eq!(auc1, std::fs::read(dir.path().join("run_auc.json")).unwrap());
    assert_eq!(roc1, std::fs::read(dir.path().join("run_roc.csv")).unwrap());
}

#[test]
fn univariate_study_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsm(
        &[
            "univariate", "--target", "sigma2", "--known", "0", "--grid", "1:1:1", "--h",
            "const:1", "--out", "sig.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sig.csv")).unwrap();
    let line = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = line.split(',').collect();
    let cr: f64 = fields[4].parse().unwrap();
    assert!((cr - 2.0).abs() < 1e-6, "half-normal CR bound column {cr}");

    let out = gsm(
        &[
            "univariate", "--target", "mu", "--known", "1", "--grid", "0:8:0.5", "--h",
            "log1p:1,log1p:2", "--out", "mu.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("mu.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 34, "17 grid points x 2 weights");
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[6], "ok");
        let eff: f64 = fields[5].parse().unwrap();
        assert!(eff > 0.0 && eff <= 1.05, "efficiency {eff} out of band");
    }
    assert!(dir.path().join("mu.csv.manifest.json").exists());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.csv"), "1,2\n3,4\n").unwrap();
    let out = gsm(
        &["estimate", "--data", "d.csv", "--a", "1", "--b", "1", "--h", "bogus:1", "--out", "o.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let out = gsm(&["estimate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = gsm(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

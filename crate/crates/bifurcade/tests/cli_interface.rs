//! End-to-end tests of the external interfaces: the binary's exit-code
//! contract, the model file schema, and the emitted artifacts.

use serde_json::Value;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bifurcade"))
}

fn reconnect_model_json() -> &'static str {
    r#"{
  "label": "reconnect",
  "dim": 1,
  "mu": [1.0],
  "linear": { "Polynomial": { "coeffs": [[2.0, -3.0, 1.0]] } },
  "q": [],
  "c": [ { "k": 1, "i": 1, "j": 1, "l": 1, "value": -1.0 } ],
  "gradient_info": { "potential": "ScalarPolynomial", "cube_integrals": null }
}"#
}

fn read_report(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn detect_subcommand_reports_ch_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "detect",
            "--modes",
            "8",
            "--lambda-lo",
            "0",
            "--lambda-hi",
            "10",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report = read_report(dir.path());
    assert_eq!(report["schema"], 1);
    assert_eq!(report["command"], "detect");
    let rows = report["result"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let expect = [(1.0, 1, 0), (4.0, 1, 1), (9.0, 1, 2)];
    for (row, (l0, n, m)) in rows.iter().zip(expect) {
        assert!((row["lambda0"].as_f64().unwrap() - l0).abs() < 1e-10);
        assert_eq!(row["n"].as_u64().unwrap() as usize, n);
        assert_eq!(row["m"].as_u64().unwrap() as usize, m);
    }
    assert!(dir.path().join("crossings.csv").exists());
}

#[test]
fn malformed_model_file_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("broken.json");
    std::fs::write(&model_path, "this is not a model").unwrap();
    let out_dir = dir.path().join("out");
    let output = bin()
        .args(["detect", "--model"])
        .arg(&model_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!out_dir.join("report.json").exists());
}

#[test]
fn global_on_reconnect_model_labels_alternative_three() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("reconnect.json");
    std::fs::write(&model_path, reconnect_model_json()).unwrap();
    let status = bin()
        .args(["global", "--model"])
        .arg(&model_path)
        .args([
            "--lambda-lo",
            "0",
            "--lambda-hi",
            "3",
            "--norm-max",
            "10",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report = read_report(dir.path());
    let branches = report["result"]["global"]["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 2);
    let first = &branches[0];
    assert!(first["alternative"].as_str().unwrap().starts_with("(3)"));
    let term = &first["branch"]["termination"]["ReconnectTrivial"];
    assert!((term.as_f64().unwrap() - 2.0).abs() < 1e-4);

    // branch CSV endpoints: both ends on the trivial branch, lambda in {1, 2}
    let csv = std::fs::read_to_string(dir.path().join("branch_1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "lambda,arclength,v_norm,a1,n_unstable");
    let first_row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    let last_row: Vec<f64> = lines
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    // the branch starts at the switch amplitude and ends on the trivial branch
    assert!((first_row[0] - 1.0).abs() < 5e-3);
    assert!(last_row[3].abs() <= 1e-6);
    assert!((last_row[0] - 2.0).abs() < 1e-4);
    // arclength column is monotone
    let mut prev = -1.0;
    for line in &lines[1..] {
        let arc: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(arc > prev);
        prev = arc;
    }
}

#[test]
fn model_file_roundtrip_and_symmetrization() {
    // entries may be listed in any index order once per symmetry class;
    // the loader canonicalizes
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.json");
    std::fs::write(
        &path,
        r#"{
  "label": "custom",
  "dim": 2,
  "mu": [1.0, 4.0],
  "linear": { "Affine": { "c0": [1.0, 16.0], "c1": [1.0, 4.0] } },
  "q": [ { "k": 1, "i": 2, "j": 1, "value": 0.5 } ],
  "c": [ { "k": 2, "i": 2, "j": 1, "l": 1, "value": -1.0 } ]
}"#,
    )
    .unwrap();
    let model = bifurcade::model::load_model_file(&path).unwrap();
    assert_eq!(model.q_entry(1, 1, 2), 0.5);
    assert_eq!(model.q_entry(1, 2, 1), 0.5);
    assert_eq!(model.c_entry(2, 1, 1, 2), -1.0);
    // da1/dt includes 2 * 0.5 * a1 a2
    let f = bifurcade::model::vector_field(&model, 0.0, &[0.3, 0.2]).unwrap();
    assert!((f[0] - (-0.3 + 2.0 * 0.5 * 0.3 * 0.2)).abs() < 1e-12);
}

#[test]
fn index_subcommand_requires_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["index", "--modes", "5", "--lambda0", "1.0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn index_subcommand_dumps_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "index",
            "--modes",
            "5",
            "--lambda0",
            "1.0",
            "--lambda",
            "1.1",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report = read_report(dir.path());
    let result = &report["result"];
    assert_eq!(result["nontrivial"], true);
    assert_eq!(result["index"]["betti"]["0"], 2);
    let blocks = result["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 2);
    for b in blocks {
        assert!(b["faces_exit"].as_array().unwrap().is_empty());
        assert!(!b["faces_ingress"].as_array().unwrap().is_empty());
        assert!(b["tangency_report"].as_array().unwrap().is_empty());
    }
}

#[test]
fn probe_subcommand_reports_connections() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "probe", "--modes", "5", "--lambda", "1.5", "--t-end", "400", "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report = read_report(dir.path());
    let found = report["result"]["found"].as_array().unwrap();
    let descending: Vec<&Value> = found.iter().filter(|o| o["kind"] == "SigmaMinus").collect();
    assert_eq!(descending.len(), 2);
    for o in descending {
        let j = o["limit"]["Converged"]["j"].as_f64().unwrap();
        assert!(j < 0.0);
    }
}

#[test]
fn simulate_subcommand_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "simulate",
            "--modes",
            "5",
            "--lambda",
            "1.1",
            "--t-end",
            "100",
            "--initial",
            "0.01,0,0,0,0",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report = read_report(dir.path());
    let a1 = report["result"]["final_state"][0].as_f64().unwrap();
    assert!((a1.abs() - 0.36515).abs() < 1e-2);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,a1,a2,a3,a4,a5\n"));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = bifurcade::cli::RunConfig {
        model: bifurcade::cli::ModelSource::CahnHilliard1d {
            length: std::f64::consts::PI,
            b2: 0.0,
            b3: 1.0,
            n_modes: 5,
        },
        lambda_lo: 0.0,
        lambda_hi: 5.0,
        out_dir: dir.path().join("ignored-by-flag"),
        ..Default::default()
    };
    let config_path = dir.path().join("run.json");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let status = bin()
        .args(["detect", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report = read_report(dir.path());
    assert_eq!(report["result"].as_array().unwrap().len(), 2);
}

#[test]
fn numerical_failure_exits_3_with_diagnostics() {
    // a model whose crossing has no usable nonlinearity: branch switching
    // fails numerically, the report still lands on disk
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("flat.json");
    std::fs::write(
        &model_path,
        r#"{
  "label": "flat",
  "dim": 1,
  "mu": [1.0],
  "linear": { "Affine": { "c0": [0.0], "c1": [1.0] } },
  "q": [],
  "c": []
}"#,
    )
    .unwrap();
    let output = bin()
        .args(["branch", "--model"])
        .arg(&model_path)
        .args([
            "--lambda0",
            "0",
            "--lambda-lo",
            "-1",
            "--lambda-hi",
            "1",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let report = read_report(dir.path());
    assert!(report["result"]["error"]
        .as_str()
        .unwrap()
        .contains("switching"));
    assert!(!report["diagnostics"].as_array().unwrap().is_empty());
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_anyonqism");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("ANYONQISM_DIM_CAP").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect()
}

fn schema(name: &str) -> jsonschema::Validator {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../docs/schemas/{name}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    jsonschema::draft202012::new(&s).unwrap()
}

fn assert_valid(name: &str, v: &Value) {
    let errors: Vec<String> = schema(name).iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

#[test]
fn verify_xxx_passes() {
    let o = run(&["verify", "--model", "xxx", "--L", "6", "--theta", "1.0472", "--samples", "50"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_valid("verify", &v);
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["identity"].as_str().unwrap()).collect();
    for n in ["yang_baxter", "string_transparency", "rll", "commutation_relations", "transfer_commutation", "hamiltonian_affine_fit"] {
        assert!(names.contains(&n), "{n} missing");
    }
}

#[test]
fn verify_ungraded_tj_passes() {
    let o = run(&["verify", "--model", "tj", "--L", "4", "--theta1", "0", "--theta2", "0", "--theta3", "0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout_json(&o)["checks"].as_array().unwrap().iter().any(|c| c["identity"] == "rll_nested"));
}

#[test]
fn zero_sites_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = run(&["verify", "--L", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("L must be ≥ 1"));
    assert!(!out.exists());
    assert_eq!(code(&run(&["spectrum", "--model", "heisenberg"])), 2);
    assert_eq!(code(&run(&["spectrum", "--theta1", "0.2"])), 2);
}

#[test]
fn cap_exceeded_exits_three() {
    let o = Command::new(BIN).args(["spectrum", "--L", "5"]).env("ANYONQISM_DIM_CAP", "16").output().unwrap();
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());
}

#[test]
fn failed_check_exits_one_with_inputs() {
    let o = run(&["verify", "--L", "3", "--samples", "3", "--tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["passed"], false);
    let ybe = v["checks"].as_array().unwrap().iter().find(|c| c["identity"] == "yang_baxter").unwrap();
    assert_eq!(ybe["status"], "fail");
    assert!(!ybe["parameters"].as_array().unwrap().is_empty());
}

#[test]
fn spectrum_rows_cover_the_space() {
    for (model, l, d) in [("xxx", "3", 8usize), ("tj", "3", 27)] {
        let o = run(&["spectrum", "--model", model, "--L", l, "--format", "csv"]);
        assert_eq!(code(&o), 0);
        assert_eq!(csv_rows(&o).len(), d);
    }
    let o = run(&["spectrum", "--model", "tj", "--L", "2", "--theta2", "0.7", "--lambda", "0.3,-0.2"]);
    let v = stdout_json(&o);
    assert_valid("spectrum", &v);
    assert_eq!(v["total_dim"], 9);
}

#[test]
fn spectrum_two_sites() {
    let o = run(&["spectrum", "--L", "2", "--theta", "0.8", "--format", "csv"]);
    let rows = csv_rows(&o);
    let mut e: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    e.sort_by(f64::total_cmp);
    for (a, b) in e.iter().zip([-4.0, 0.0, 0.0, 0.0]) {
        assert!((a - b).abs() < 1e-12, "{e:?}");
    }
    let o = run(&["spectrum", "--model", "tj", "--L", "1", "--format", "csv"]);
    assert_eq!(csv_rows(&o).len(), 3);
}

#[test]
fn bethe_one_magnon() {
    let o = run(&["bethe", "--L", "4", "--sector", "1", "--theta", "2.1", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| r[1] == "inf").count(), 1);
    assert!(rows.iter().all(|r| r[7] == "true"));
}

#[test]
fn bethe_vacuum_and_tj_sector() {
    let o = run(&["bethe", "--L", "4", "--sector", "0"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_valid("bethe", &v);
    assert_eq!(v["sectors"][0]["match"]["matched"], 1);

    let o = run(&[
        "bethe", "--model", "tj", "--L", "3", "--theta1", "0.71", "--theta2", "-2.3", "--theta3", "1.9", "--sector", "2,1",
        "--strategy", "all",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_valid("bethe", &v);
    let entries = v["sectors"][0]["match"]["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        assert_eq!(e["matched"], true);
        assert!(e["energy_residual"].as_f64().unwrap() < 1e-7);
        assert!(e["lambda_residual"].as_f64().unwrap() < 1e-7);
    }
}

fn sweep_energies(o: &Output) -> Vec<(f64, usize, f64)> {
    csv_rows(o).iter().map(|r| (r[0].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap())).collect()
}

#[test]
fn one_magnon_sweep_is_flat() {
    let o = run(&["sweep", "--L", "4", "--sector", "1", "--grid", "9", "--format", "csv"]);
    let rows = sweep_energies(&o);
    assert_eq!(rows.len(), 9 * 4);
    for (_, level, e) in &rows {
        let first = rows.iter().find(|r| r.1 == *level).unwrap().2;
        assert!((e - first).abs() < 1e-12);
    }
}

#[test]
fn two_magnon_sweep_is_periodic_and_starts_ungraded() {
    let o = run(&["sweep", "--L", "4", "--sector", "2", "--grid", "7", "--bethe", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let rows = sweep_energies(&o);
    let at = |t: f64| rows.iter().filter(|r| (r.0 - t).abs() < 1e-12).map(|r| r.2).collect::<Vec<_>>();
    let (start, end) = (at(0.0), at(2.0 * std::f64::consts::PI));
    assert_eq!(start.len(), 6);
    for (a, b) in start.iter().zip(&end) {
        assert!((a - b).abs() < 1e-9);
    }
    let reference = csv_rows(&run(&["spectrum", "--L", "4", "--sector", "2", "--format", "csv"]));
    for (a, r) in start.iter().zip(&reference) {
        assert!((a - r[2].parse::<f64>().unwrap()).abs() < 1e-12);
    }
    assert!(rows.iter().any(|r| (r.2 - start[r.1]).abs() > 1e-3), "energies should move with θ");

    let o = run(&["sweep", "--model", "tj", "--L", "2", "--grid", "3", "--vary", "2", "--theta1", "0.4", "--bethe"]);
    assert_valid("sweep", &stdout_json(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": "tj", "L": 2, "theta2": 0.5, "sectors": ["1,1"], "format": "csv"}"#).unwrap();
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(csv_rows(&o).len(), 2);
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    let v = stdout_json(&o);
    assert_eq!(v["config"]["theta"][1], 0.5);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    assert_valid("config", &doc);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["verify", "--model", "tj", "--L", "3", "--theta2", "1.2", "--samples", "5", "--seed", "11"],
        &["spectrum", "--model", "xxx", "--L", "4", "--theta", "0.3", "--lambda", "0.4,0.1", "--format", "csv"],
        &["bethe", "--model", "tj", "--L", "3", "--theta1", "0.5", "--strategy", "all", "--seed", "3"],
        &["bethe", "--L", "4", "--theta", "1.0", "--strategy", "multistart", "--seed", "5", "--format", "csv"],
        &["sweep", "--L", "3", "--grid", "4", "--bethe", "--format", "csv"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let paths = [dir.path().join(format!("{k}a")), dir.path().join(format!("{k}b"))];
        for p in &paths {
            let mut a = args.to_vec();
            a.extend(["--out", p.to_str().unwrap()]);
            assert_eq!(code(&run(&a)), 0, "{args:?}");
        }
        assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap(), "{args:?}");
    }
}

#[test]
fn strategy_names_match_the_config_file() {
    for s in ["log_newton", "multistart", "homotopy", "all"] {
        assert_eq!(code(&run(&["bethe", "--L", "3", "--sector", "1", "--strategy", s])), 0, "{s}");
    }
    let o = run(&["bethe", "--L", "3", "--sector", "1", "--strategy", "log_newton"]);
    assert_eq!(stdout_json(&o)["config"]["strategy"], "log_newton");
}

#[test]
fn unmatched_root_sets_exit_one() {
    // sector with no holes at a generic twist: multistart also finds Bethe
    // solutions without an eigenvector, which the matcher must reject
    let o = run(&["bethe", "--model", "tj", "--L", "3", "--theta3", "-1.0", "--sector", "3,3", "--strategy", "multistart"]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["all_matched"], false);
    assert!(v["sectors"][0]["match"]["entries"].as_array().unwrap().iter().any(|e| e["matched"] == false));
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ndsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndsym")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = ndsym(&all);
    let v =
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (v, out.status.code().unwrap())
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn derive_matches_the_golden_report() {
    let out = ndsym(&["derive", "--n", "symbolic", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("derive_symbolic.json"));
}

#[test]
fn planar_derivation_leaves_a1_unconstrained() {
    let (v, code) = json(&["derive", "--n", "0"]);
    assert_eq!(code, 0);
    let constraints: Vec<&str> =
        v["constraints"].as_array().unwrap().iter().map(|c| c["text"].as_str().unwrap()).collect();
    assert_eq!(constraints, ["a5 = 0", "a7 = 0", "a8 = -a2 + a6"]);
    assert_eq!(v["geometry"], "0");
}

#[test]
fn spherical_derivation_forces_a1_to_vanish() {
    let (v, code) = json(&["derive", "--n", "2"]);
    assert_eq!(code, 0);
    let constraints: Vec<&str> =
        v["constraints"].as_array().unwrap().iter().map(|c| c["text"].as_str().unwrap()).collect();
    assert!(constraints.contains(&"a1 = 0"), "{constraints:?}");
}

#[test]
fn strict_mode_exits_three_and_prints_the_audit_row() {
    assert_eq!(ndsym(&["derive", "--strict-paper"]).status.code(), Some(3));
    let out = ndsym(&["derive", "--strict-reference"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("diffusion-translation") && err.contains("a1*D_r = 0") && err.contains("not-derivable"),
        "{err}"
    );
}

#[test]
fn cases_lists_six_entries_with_conditions_and_notes() {
    let (v, code) = json(&["cases", "--points", "200"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema_version"], 1);
    let cases = v["cases"].as_array().unwrap();
    let ids: Vec<&str> = cases.iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["A", "B", "C", "D", "E", "F"]);
    for c in cases {
        assert!(c["passed"].as_bool().unwrap());
        assert!(!c["conditions"].as_array().unwrap().is_empty());
        for check in c["checks"].as_array().unwrap() {
            assert_eq!(check["points"], 200);
            assert_eq!(check["symbolic"], "zero");
        }
    }
    assert!(cases[1]["notes"][0].as_str().unwrap().contains("reference table"));
}

#[test]
fn single_case_reports_the_time_power_law() {
    let (v, code) = json(&["cases", "--case", "d"]);
    assert_eq!(code, 0);
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 1);
    assert_eq!(cases[0]["diffusion"]["expr"], "C*(a3 + a4*t)^(-1 + 2*a2*a4^(-1))");
    assert_eq!(cases[0]["diffusion"]["branch"], "time-only");
}

#[test]
fn invalid_input_exits_one() {
    assert_eq!(ndsym(&["cases", "--case", "Z"]).status.code(), Some(1));
    assert_eq!(ndsym(&["derive", "--n", "3"]).status.code(), Some(1));
    assert_eq!(ndsym(&["verify"]).status.code(), Some(1));
    assert_eq!(ndsym(&["verify", "--invariance"]).status.code(), Some(1));
    assert_eq!(ndsym(&["simulate", "--d", "1 +"]).status.code(), Some(1));
    assert_eq!(ndsym(&["simulate", "--a5", "1"]).status.code(), Some(1));
}

#[test]
fn closure_is_identically_satisfied() {
    let out = ndsym(&["verify", "--closure"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("identically satisfied"));
    let (v, _) = json(&["verify", "--closure"]);
    assert_eq!(v["closure"]["residual"], "0");
    assert_eq!(v["closure"]["mutation_verdict"], "nonzero");
}

#[test]
fn case_b_material_residuals_and_tolerance_exit() {
    let (v, code) = json(&["verify", "--case", "B", "--a2", "1", "--a3", "1", "--a4", "2"]);
    assert_eq!(code, 0);
    let m = &v["material"]["residual"];
    assert!(m["res_d"].as_f64().unwrap() <= 1e-6 && m["res_gamma"].as_f64().unwrap() <= 1e-6, "{m}");
    let tight = ndsym(&["verify", "--case", "B", "--a2", "1", "--a3", "1", "--a4", "2", "--tol", "1e-12"]);
    assert_eq!(tight.status.code(), Some(2));
}

#[test]
fn user_arbitrary_functions_are_substituted() {
    let (v, code) = json(&["verify", "--case", "B", "--a3", "1", "--g", "1 + xi^2", "--f", "exp(-xi)"]);
    assert_eq!(code, 0);
    let d = v["material"]["diffusion"].as_str().unwrap();
    assert!(!d.contains('G'), "{d}");
    assert!(v["material"]["passed"].as_bool().unwrap());
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"command": "cases", "case": "B", "points": 50, "seed": 9}"#).unwrap();
    let p = path.to_str().unwrap();
    let (v, _) = json(&["cases", "--config", p]);
    assert_eq!(v["cases"][0]["id"], "B");
    assert_eq!(v["seed"], 9);
    let (v, _) = json(&["cases", "--config", p, "--case", "E", "--seed", "2"]);
    assert_eq!(v["cases"][0]["id"], "E");
    assert_eq!((v["seed"].as_u64(), v["points"].as_u64()), (Some(2), Some(50)));

    std::fs::write(&path, r#"{"case": "B", "pionts": 5}"#).unwrap();
    assert_eq!(ndsym(&["cases", "--config", p]).status.code(), Some(1));
    std::fs::write(&path, r#"{"command": "derive"}"#).unwrap();
    assert_eq!(ndsym(&["cases", "--config", p]).status.code(), Some(1));
}

#[test]
fn out_directory_receives_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = ndsym(&["cases", "--case", "A", "--points", "20", "--out", d, "--json"]);
    let written = std::fs::read(dir.path().join("cases.json")).unwrap();
    assert_eq!(written, out.stdout);
}

#[test]
fn reports_are_byte_stable() {
    let a = ndsym(&["cases", "--seed", "5", "--points", "100", "--json"]);
    let b = ndsym(&["cases", "--seed", "5", "--points", "100", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let c = ndsym(&["cases", "--seed", "6", "--points", "100", "--json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_exports_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = ndsym(&[
        "simulate", "--n", "1", "--d", "1 + r^2", "--gamma", "0.5", "--nr", "16", "--nt", "16", "--out", d, "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["residual"]["max"].as_f64().unwrap() <= 1e-10);
    let mut reader = csv::Reader::from_path(dir.path().join("phi.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["r", "t", "phi"]);
    assert_eq!(reader.records().count(), 17 * 17);
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("phi.json")).unwrap()).unwrap();
    assert_eq!(sidecar["grid"]["n"], 1);
}

#[test]
fn boundary_flags_are_validated_against_geometry() {
    let out = ndsym(&["simulate", "--n", "2", "--left", "0", "--nr", "8", "--nt", "8"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

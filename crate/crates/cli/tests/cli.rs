use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = finsler(args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn spaces_lists_the_zoo() {
    let v = json(&["spaces"]);
    let list = v["result"].as_array().unwrap();
    assert!(list.len() >= 4);
    let dim_of = |name: &str| {
        list.iter()
            .find(|e| e["name"] == name)
            .map(|e| e["dim"].as_u64().unwrap())
    };
    assert_eq!(dim_of("heisenberg"), Some(3));
    assert_eq!(dim_of("su2"), Some(3));

    let v = json(&["spaces", "--dim", "2"]);
    let names: Vec<&str> = v["result"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"hyperbolic"));
    assert!(v["result"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["dim"] == 2));

    let v = json(&["spaces", "--filter", "berwald"]);
    let list = v["result"].as_array().unwrap();
    for name in ["heisenberg", "su2", "hyperbolic", "flat"] {
        assert!(list.iter().any(|e| e["name"] == name), "{name}");
    }
    assert!(list.iter().all(|e| e["berwald"] == true));
}

#[test]
fn flat_euclidean_tensors_are_trivial() {
    let v = json(&[
        "tensors", "--space", "flat", "--x", "0.3,-1,2", "--y", "-1,2,0.5",
    ]);
    let r = &v["result"];
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((r["g"][i][j].as_f64().unwrap() - expect).abs() <= 1e-14);
            assert_eq!(r["nonlinear"][i][j].as_f64().unwrap(), 0.0);
            for k in 0..3 {
                for t in ["cartan", "gamma", "chern"] {
                    assert!(r[t][i][j][k].as_f64().unwrap().abs() <= 1e-14);
                }
            }
        }
    }
}

#[test]
fn hyperbolic_tensors_are_levi_civita() {
    // ds² = (du1² + du2²) / u2² at (0, 1)
    let v = json(&[
        "tensors",
        "--space",
        "hyperbolic",
        "--x",
        "0,1",
        "--y",
        "0.6,-0.8",
    ]);
    let chern = &v["result"]["chern"];
    let mut expect = [[[0.0; 2]; 2]; 2];
    expect[0][0][1] = -1.0;
    expect[0][1][0] = -1.0;
    expect[1][0][0] = 1.0;
    expect[1][1][1] = -1.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let c = chern[i][j][k].as_f64().unwrap();
                assert!((c - expect[i][j][k]).abs() <= 1e-8, "{i}{j}{k}: {c}");
            }
        }
    }
}

#[test]
fn zero_direction_is_a_domain_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = finsler(&[
        "tensors",
        "--space",
        "heisenberg-randers",
        "--y",
        "0,0,0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not smooth"));
    assert!(!out.exists());
}

#[test]
fn csv_output_carries_seed_and_full_precision() {
    let o = finsler(&[
        "tensors",
        "--space",
        "hyperbolic",
        "--y",
        "1,0",
        "--format",
        "csv",
        "--seed",
        "5",
    ]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("# finsler tensors space=hyperbolic seed=5")
    );
    assert_eq!(lines.next(), Some("tensor,i,j,k,value"));
    assert_eq!(lines.next(), Some("F,,,,1.0000000000000000e0"));
}

#[test]
fn heisenberg_search_finds_e3_and_horizontal_directions() {
    let v = json(&["search", "--space", "heisenberg"]);
    let cands = v["result"]["candidates"].as_array().unwrap();
    let certified: Vec<Vec<f64>> = cands
        .iter()
        .filter(|c| c["status"] == "certified")
        .map(|c| floats(&c["x"]))
        .collect();
    assert!(certified.iter().any(|x| x[2].abs() >= 1.0 - 1e-12));
    let horizontal = certified.iter().filter(|x| x[2].abs() <= 1e-8).count();
    assert!(horizontal >= 2, "{certified:?}");
    assert_eq!(v["seed"], 0);
}

#[test]
fn bi_invariant_search_flags_all_directions() {
    let v = json(&["search", "--space", "su2"]);
    assert_eq!(v["result"]["all_directions_geodesic"], true);
}

#[test]
fn randers_heisenberg_search_succeeds() {
    let o = finsler(&["search", "--space", "heisenberg-randers", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o));
    assert!(rows
        .iter()
        .any(|r| r[3] == "sphere-zero" && r[4] == "certified"));
}

#[test]
fn unattainable_tolerance_violates_the_guarantee() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = finsler(&[
        "search",
        "--space",
        "heisenberg-randers",
        "--samples",
        "200",
        "--tol",
        "t_residual=1e-40",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    // the report is still written so the failure can be inspected
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["config"]["tolerances"]["t_residual"], 1e-40);
}

#[test]
fn verify_reports_residual_triples() {
    let v = json(&["verify", "--space", "heisenberg", "--vector", "0,0,1"]);
    assert_eq!(v["result"]["status"], "certified");

    let v = json(&["verify", "--space", "heisenberg", "--vector", "1,0,1"]);
    let r = &v["result"];
    assert_eq!(r["status"], "rejected");
    assert!(r["t_residual"].as_f64().unwrap() > 1e-2);
    assert!(r["algebraic_residual"].as_f64().unwrap() > 1e-2);
    assert!(r["comparison"]["sup_distance"].as_f64().unwrap() > 1e-3);

    for x in ["1,2,3", "-0.5,0,0.1"] {
        let v = json(&["verify", "--space", "flat", "--vector", x]);
        assert_eq!(v["result"]["status"], "certified");
    }
}

#[test]
fn verify_rejects_the_zero_vector() {
    let o = finsler(&["verify", "--space", "heisenberg", "--vector", "0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sphere_field_on_su2_vanishes() {
    let o = finsler(&["sphere-field", "--space", "su2", "--samples", "500"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 500);
    for r in rows {
        assert!(r[7].parse::<f64>().unwrap() <= 1e-8);
    }
}

#[test]
fn heisenberg_sphere_field_comes_close_to_zero() {
    let o = finsler(&["sphere-field", "--space", "heisenberg", "--samples", "2000"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2000);
    let min = rows
        .iter()
        .map(|r| r[7].parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(min <= 1e-3, "{min}");
}

#[test]
fn single_sample_keeps_the_header() {
    let o = finsler(&["sphere-field", "--space", "heisenberg", "--samples", "1"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], "x1,x2,x3,v1,v2,v3,v_norm,t_norm");
}

#[test]
fn geodesic_csv_reaches_e() {
    let o = finsler(&[
        "geodesic",
        "--space",
        "hyperbolic",
        "--x",
        "0,1",
        "--y",
        "0,1",
    ]);
    let text = stdout(&o);
    assert!(text.starts_with("# finsler geodesic space=hyperbolic seed=0\nt,x1,x2,y1,y2\n"));
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(last[0], 1.0);
    assert!((last[2] - std::f64::consts::E).abs() <= 1e-6);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_files_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.toml",
        r#"
name = "h-randers"
family = "heisenberg"
[metric]
type = "randers"
b = [0.0, 0.0, 0.3]
[run]
samples = 7
seed = 11
"#,
    );
    let o = finsler(&["sphere-field", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# finsler sphere-field space=h-randers seed=11\n"));
    assert_eq!(text.lines().count(), 9);
    let o = finsler(&[
        "sphere-field",
        "--config",
        &cfg,
        "--samples",
        "3",
        "--seed",
        "2",
    ]);
    let text = stdout(&o);
    assert!(text.starts_with("# finsler sphere-field space=h-randers seed=2\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn bad_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(
        dir.path(),
        "u.toml",
        "family = \"heisenberg\"\nshape = 1\n[metric]\ntype = \"riemannian\"\n",
    );
    let bad_tol = write(
        dir.path(),
        "t.toml",
        "family = \"heisenberg\"\n[metric]\ntype = \"riemannian\"\n[tolerances]\nalgebraic = 0.0\n",
    );
    for args in [
        vec!["search", "--config", unknown.as_str()],
        vec!["search", "--config", bad_tol.as_str()],
        vec!["search", "--config", "/nonexistent.toml"],
        vec!["search", "--space", "klein-bottle"],
        vec!["search"],
        vec!["search", "--space", "su2", "--tol", "t_residual=-1"],
        vec!["verify", "--space", "su2", "--vector", "1,0"],
        vec!["frobnicate"],
    ] {
        let o = finsler(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn custom_algebras_support_algebraic_verification_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        r#"
family = "custom"
[metric]
type = "randers"
b = [0.0, 0.0, 0.3]
[algebra]
structure_constants = [
  [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
  [[0, 0, -1], [0, 0, 0], [0, 0, 0]],
  [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
]
"#,
    );
    let s = (1.0f64 - 0.09).sqrt().to_string();
    let on_cone = format!("{s},0,-0.3");
    let v = json(&["verify", "--config", &cfg, "--vector", &on_cone]);
    assert_eq!(v["result"]["status"], "uncorroborated");
    assert_eq!(v["result"]["radical_branch"], "radical-is-m");
    let v = json(&["verify", "--config", &cfg, "--vector", "1,0,0"]);
    assert_eq!(v["result"]["status"], "rejected");
    let o = finsler(&["search", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = finsler(&[
            "search",
            "--space",
            "hyperbolic-randers",
            "--seed",
            "4",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

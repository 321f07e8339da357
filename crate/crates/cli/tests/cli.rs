use std::process::{Command, Output};

use serde_json::Value;

fn secant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secant"))
        .args(args)
        .output()
        .expect("spawn secant")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("secant-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn roots_of_t3() {
    let out = secant(&["roots", "--poly", "cheb:3"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "-0.8660254038 0 0.8660254038\n");
}

#[test]
fn construct_type_i() {
    let v = json(&secant(&["cycles", "construct", "--type", "I", "--base", "1,2,3", "--scale", "-1"]));
    assert!((v["d"].as_f64().unwrap() - 2.447213595).abs() < 1e-8);
    let want = [2.23606798, -1.11803390, -0.6909830, 3.27254249];
    for (got, w) in v["newton_coefficients"].as_array().unwrap().iter().zip(want) {
        assert!((got.as_f64().unwrap() - w).abs() < 1e-6);
    }
    assert!(v["cycle"]["residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn immediate_t3_is_simply_connected() {
    let ppm = tmp("t3.ppm");
    let v = json(&secant(&[
        "immediate", "--poly", "cheb:3", "--root", "1", "--res", "512", "--out", ppm.to_str().unwrap(),
    ]));
    assert_eq!(v["hole_count"], 0);
    assert_eq!(v["hexagon"]["passes"], true);
    assert_eq!(v["forward_invariance"]["violations"], 0);
    let img = std::fs::read(&ppm).unwrap();
    assert!(img.starts_with(b"P6\n512 512\n255\n"));
    assert_eq!(img.len(), 15 + 3 * 512 * 512);
}

#[test]
fn orbit_csv_and_singular_seed() {
    let csv = tmp("orbit.csv");
    let v = json(&secant(&[
        "orbit", "--poly", "cheb:3", "--seed", "0.3,-0.2", "--out", csv.to_str().unwrap(),
    ]));
    assert_eq!(v["orbit"]["outcome"]["kind"], "converged");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("iter,x,y\n0,0.3,-0.2\n"));

    let v = json(&secant(&["orbit", "--poly", "cheb:3", "--seed", "0.5,0.5"]));
    assert_eq!(v["orbit"]["outcome"]["kind"], "singular");
}

#[test]
fn basin_summary_and_dump() {
    let dump = tmp("grid.sbg");
    let v = json(&secant(&[
        "basin", "--poly", "cheb:3", "--bounds=-1.5,1.5,-1.5,1.5", "--res", "64", "--workers", "2",
        "--dump", dump.to_str().unwrap(),
    ]));
    let fractions: f64 = v["summary"]["root_fractions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_f64().unwrap())
        .sum();
    assert!(fractions > 0.9);
    assert!(std::fs::read(&dump).unwrap().starts_with(b"SBG1"));
}

#[test]
fn cycles_find_golden_lambda() {
    let v = json(&secant(&["cycles", "find", "--poly", "cheb:3", "--density", "12"]));
    let cycles = v["cycles"].as_array().unwrap();
    assert!(!cycles.is_empty());
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    for c in cycles {
        let l = c["lambda"].as_f64().unwrap();
        assert!((l - golden).abs() < 1e-8 || (l + 1.0 / golden).abs() < 1e-8);
    }
}

#[test]
fn curves_export() {
    let stem = tmp("t3");
    let v = json(&secant(&["curves", "--poly", "cheb:3", "--root", "1", "--out", stem.to_str().unwrap()]));
    assert_eq!(v["delta_s_polylines"], 1);
    let crit = std::fs::read_to_string(v["critical_csv"].as_str().unwrap()).unwrap();
    let mut lines = crit.lines();
    assert_eq!(lines.next(), Some("y,x_star,gamma"));
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert!((f[1] + f[0] / 2.0).abs() < 1e-10);
    }
    let delta = std::fs::read_to_string(v["delta_s_csv"].as_str().unwrap()).unwrap();
    assert!(delta.starts_with("curve_id,x,y\n0,"));
}

#[test]
fn exit_codes() {
    assert_eq!(secant(&["roots"]).status.code(), Some(1));
    assert_eq!(secant(&["roots", "--poly", "1,x"]).status.code(), Some(1));
    assert_eq!(secant(&["basin", "--poly", "cheb:3", "--res", "0"]).status.code(), Some(1));
    assert_eq!(secant(&["cycles", "construct", "--type", "V", "--base", "1,2,3"]).status.code(), Some(1));
    // x^2 has a double root.
    assert_eq!(secant(&["roots", "--poly", "0,0,1"]).status.code(), Some(2));
    assert_eq!(secant(&["curves", "--poly", "cheb:3", "--root", "0"]).status.code(), Some(2));
    assert_eq!(secant(&["--help"]).status.code(), Some(0));
}

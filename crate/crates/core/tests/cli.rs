use std::path::PathBuf;
use std::process::{Command, Output};

use isocert::convex::CostFunction;
use serde_json::Value;

fn isocert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isocert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isocert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_gaussian_is_finite() {
    let out = isocert(&["check", "--measure", "gauss", "--cost", "quadratic:0.5", "--K", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "FINITE");
    assert!(v["integral_estimate"].as_f64().unwrap() > 0.0);
}

#[test]
fn check_laplace_is_divergent() {
    let out = isocert(&["check", "--measure", "exp", "--cost", "quadratic:0.5", "--K", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "DIVERGENT_LIKELY");
}

#[test]
fn certify_laplace_fails_with_exit_four() {
    let out = isocert(&["certify", "--measure", "exp", "--cost", "quadratic:0.5", "--K", "2"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["certified"], false);
}

#[test]
fn conjugate_table_matches_the_dual_cost() {
    let out = isocert(&["conjugate", "--cost", "c:1:1.5", "--grid", "0:10:201"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,conjugate,argmax,saturated"));
    let dual = CostFunction::closed_form(1.0, 3.0).unwrap();
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let x: f64 = f[0].parse().unwrap();
        let v: f64 = f[1].parse().unwrap();
        let exact = dual.value(x).unwrap();
        assert!((v - exact).abs() <= 1e-4 * exact.max(1e-12), "x={x}: {v} vs {exact}");
        rows += 1;
    }
    assert_eq!(rows, 201);
}

#[test]
fn config_file_matches_flags() {
    let cfg = scratch("run.cfg");
    std::fs::write(&cfg, "# gaussian run\nmeasure = gauss\ncost = quadratic\ndelta = 0.5\nK = 2\n").unwrap();
    let a = isocert(&["check", "--config", cfg.to_str().unwrap()]);
    let b = isocert(&["check", "--measure", "gauss", "--cost", "quadratic", "--delta", "0.5", "--K", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_configuration_exits_two() {
    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "measure = gauss\nbogus_key = 1\n").unwrap();
    assert_eq!(isocert(&["check", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(isocert(&["check", "--measure", "nope@@"]).status.code(), Some(2));
    assert_eq!(isocert(&["check", "--measure", "gauss", "--delta", "-1"]).status.code(), Some(2));
    assert_eq!(isocert(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_artifact() {
    let path = scratch("profile.csv");
    let out = isocert(&[
        "profile", "--measure", "gauss", "--kind", "if", "--grid", "1:3:3", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("r,s,I_F\n"));
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'));
}

#[test]
fn test_command_writes_member_csv() {
    let csv = scratch("members.csv");
    let out = isocert(&[
        "test", "--measure", "gauss", "--test", "theorem_2_1", "--family",
        "exponential:0.25,0.5,1", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'));
}

#[test]
fn runs_are_deterministic() {
    let args = ["test", "--measure", "gauss", "--test", "theorem_2_1", "--family", "random_smooth:6", "--seed", "7"];
    let a = isocert(&args);
    let b = isocert(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

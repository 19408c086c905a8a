use std::path::Path;
use std::process::{Command, Output};

use mixnorm::harness::{ChainReport, Report};

fn mixnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixnorm")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn norm_of_an_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.csv", "breakpoint,value\n0,2\n0.25,0\n");
    let out = mixnorm(&["norm", "--space", "L(2,1)", "--fstar", &f]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    // 2 · 2 · 0.25^{1/2}
    assert!((v - 2.0).abs() < 1e-12, "{v}");
}

#[test]
fn rearrange_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "{\"n\":2,\"N\":2}\n1,-3\n0,3\n");
    let out = mixnorm(&["rearrange", &g]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "breakpoint,value");
    assert_eq!(rows.len(), 4, "{text}");
}

#[test]
fn kfun_curve_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.csv", "breakpoint,value\n0,3\n0.5,1\n");
    let out = mixnorm(&["kfun", "--pair", "L(1),Linf", "--fstar", &f, "--t", "0.25,1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let k: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((k[0] - 0.75).abs() < 1e-15);
    assert!((k[1] - 2.0).abs() < 1e-15);
}

#[test]
fn hardy_curve_is_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.csv", "breakpoint,value\n0,3\n0.5,1\n");
    let out = mixnorm(&["hardy", "--fstar", &f, "--dim", "2", "--op", "H", "--points", "16"]);
    assert!(out.status.success());
    let vals: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 16);
    assert!(vals.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn bad_campaign_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(
        dir.path(),
        "bad.json",
        r#"{"id":"bad","family":[{"kind":"indicator","params":{"a":1}}],"domain":"Q(3)","range":"L(1)","n":2,"grids":[16,32]}"#,
    );
    let out = mixnorm(&["verify", &c]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown space variant") && err.contains("domain"), "{err}");
}

#[test]
fn verify_report_is_recomputable() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(
        dir.path(),
        "c.json",
        r#"{"id":"g","family":[{"kind":"power-log","params":{"gamma":0.5,"delta":0}},{"kind":"indicator","params":{"a":1}}],"domain":"W1:L(2)","range":"R:L(2,2)","n":2,"grids":[16,32,64]}"#,
    );
    let out = mixnorm(&["verify", &c]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(r.compute_verdict().0, r.verdict);
    assert_eq!(r.compute_constants(), r.constants);
}

#[test]
fn chain_writes_three_links() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("chain.json");
    let out = mixnorm(&["chain", "--p", "1.5", "--dim", "3", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: ChainReport = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert!(r.passed);
    assert_eq!(r.sobolev_to_mixed.levels, vec![64.0, 128.0, 256.0]);
}

#[test]
fn repeated_chain_runs_agree() {
    let a = mixnorm(&["chain", "--p", "2", "--dim", "2", "--grid", "32,64"]);
    let b = mixnorm(&["chain", "--p", "2", "--dim", "2", "--grid", "32,64"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

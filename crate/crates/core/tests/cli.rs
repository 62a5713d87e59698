use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kinchemo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinchemo"))
        .args(args)
        .output()
        .expect("spawn kinchemo")
}

const SMALL: [&str; 6] = ["--nx", "20", "--nv", "8", "--t-end", "0.02"];

fn with_small<'a>(head: &[&'a str]) -> Vec<&'a str> {
    head.iter().copied().chain(SMALL).collect()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn run_writes_snapshot_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.csv");
    let diag = dir.path().join("diag.json");
    let mut args = with_small(&["run", "--scheme", "mm_explicit"]);
    args.extend(["-o", out.to_str().unwrap(), "--diagnostics", diag.to_str().unwrap()]);
    let res = kinchemo(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let csv = read(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,n,S"));
    assert_eq!(lines.count(), 21);
    let json: serde_json::Value = serde_json::from_str(&read(&diag)).unwrap();
    assert_eq!(json["config"]["nx"], 20);
    assert!(json["blow_up"].is_null());
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let mut args = with_small(&["run", "--scheme", "odd_even", "--eps", "0.5"]);
        args.extend(["-o", p.to_str().unwrap()]);
        assert!(kinchemo(&args).status.success());
    }
    assert_eq!(read(&paths[0]), read(&paths[1]));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"scheme": "keller_segel", "Nx": 10, "t_end": 0.01, "dt_policy": {"fixed": 0.001}}"#)
        .unwrap();
    let res = kinchemo(&["run", "--config", cfg.to_str().unwrap(), "--nx", "16"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(String::from_utf8(res.stdout).unwrap().lines().count(), 18);
}

#[test]
fn blow_up_exits_with_two() {
    let res = kinchemo(&[
        "run", "--scheme", "explicit_kinetic", "--eps", "1e-6", "--dt", "macroscopic", "--nx", "40",
        "--nv", "16", "--t-end", "0.1",
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("blew up"));
}

#[test]
fn config_errors_exit_with_one() {
    assert_eq!(kinchemo(&["run", "--nx", "1"]).status.code(), Some(1));
    assert_eq!(kinchemo(&["run", "--eps=-1"]).status.code(), Some(1));
    assert_eq!(kinchemo(&["run", "--no-such-flag"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"unknown_field": 1}"#).unwrap();
    assert_eq!(kinchemo(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(kinchemo(&["run", "--dt", "bogus"]).status.code(), Some(1));
    assert_eq!(kinchemo(&["--help"]).status.code(), Some(0));
}

#[test]
fn converge_emits_table() {
    let res = kinchemo(&[
        "converge", "--eps-list", "1e-4", "--nx-list", "10,20,40", "--nv", "8", "--t", "0.005",
        "--dt", "diffusive_sq",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# scheme=mm_implicit eps=0.0001"));
    assert_eq!(lines[1], "Nx,error,order");
    assert!(lines[2].starts_with("10,,"));
    assert_eq!(lines.len(), 5);

    let res = kinchemo(&["converge", "--nx-list", "10,30"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn sweep_compare_evolve_headers() {
    let res = kinchemo(&with_small(&["sweep", "--eps-list", "1,0.5"]));
    assert!(res.status.success());
    let out = String::from_utf8(res.stdout).unwrap();
    assert_eq!(out.lines().next(), Some("x,n_eps=1,n_eps=0.5,n_ks"));

    let res = kinchemo(&with_small(&["compare", "--eps", "1"]));
    assert!(res.status.success());
    let out = String::from_utf8(res.stdout).unwrap();
    assert_eq!(out.lines().next(), Some("x,n_mm_implicit,n_explicit_kinetic,n_odd_even"));

    let res = kinchemo(&with_small(&["evolve", "--times", "0,0.01,0.02"]));
    assert!(res.status.success());
    let out = String::from_utf8(res.stdout).unwrap();
    assert_eq!(out.lines().next(), Some("x,n_t=0,n_t=0.01,n_t=0.02"));
}

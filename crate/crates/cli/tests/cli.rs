use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use chj_core::{heat_step, GridFunction64};

fn chj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chj")).args(args).output().expect("binary runs")
}

fn chj_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chj")).args(args).env("CHJ_THREADS", threads).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chj-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn solve_writes_field() {
    let o = chj(&["solve", "--H", "quadratic:1", "--f", "log-bump", "--t", "1/2", "--n", "5", "--intervals", "256"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("x,value\n"));
    assert_eq!(out.lines().count(), 258);
}

#[test]
fn validation_errors_exit_1() {
    let o = chj(&["solve", "--t", "0.3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("t must be dyadic k/2^n"));
    assert_eq!(chj(&["solve", "--f", "triangle"]).status.code(), Some(1));
    assert_eq!(chj(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(chj(&["oracle-compare", "--H", "zero"]).status.code(), Some(1));
    assert_eq!(chj(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_rules() {
    let dir = scratch("cfg");
    let p = dir.join("run.cfg");
    fs::write(&p, "intervals=128\nt=1/4\nn=4\n").unwrap();
    let ps = p.to_str().unwrap();
    let o = chj(&["solve", "--config", ps]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 130);
    let o = chj(&["solve", "--config", ps, "--intervals", "64"]);
    assert_eq!(stdout(&o).lines().count(), 66);
    fs::write(&p, "intervals=128\ncolour=blue\n").unwrap();
    let o = chj(&["solve", "--config", ps]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_compare_trace() {
    let o = chj(&["oracle-compare", "--intervals", "512", "--n", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("level,steps,dt,delta_sup,oracle_sup_error,runtime_ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let cols: Vec<&str> = r.split(',').collect();
        assert!(!cols[4].is_empty(), "{r}");
        assert!(cols[5].is_empty(), "runtime must stay empty without --timing");
    }
}

#[test]
fn timing_fills_runtime() {
    let o = chj(&["convergence", "--intervals", "128", "--n", "3", "--timing"]);
    assert!(stdout(&o).lines().skip(1).all(|r| !r.ends_with(',')));
}

#[test]
fn property_violation_exits_2() {
    // Time steps far below the grid resolution stop converging.
    let o = chj(&["oracle-compare", "--intervals", "64", "--n", "7"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("warning: finest step") && err.contains("property violation"), "{err}");
}

#[test]
fn properties_and_diagnostics_pass() {
    let o = chj(&["properties", "--intervals", "256"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",pass")));
    let o = chj(&["norms", "--R", "1,2,10", "--intervals", "256"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = chj(&["report", "--intervals", "256", "--n", "5", "--horizon", "1/2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("gradient_nonincrease=true"));
    assert!(out.contains("horizon_points=4"));
}

#[test]
fn zero_hamiltonian_is_heat_flow() {
    let dir = scratch("heat");
    let out = dir.join("u.csv");
    let o = chj(&[
        "solve",
        "--H",
        "zero",
        "--f",
        "gaussian-bump:1",
        "--intervals",
        "512",
        "--n",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let u = GridFunction64::read_csv(fs::read_to_string(&out).unwrap().as_bytes()).unwrap();
    let f = GridFunction64::from_fn(*u.spec(), |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
    assert!((&u - &heat_step(&f, 0.5).unwrap()).sup_norm() <= 1e-6);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn file_preset_round_trip() {
    let dir = scratch("file");
    let f = dir.join("f.csv");
    let g = GridFunction64::from_fn(chj_core::GridSpec64::line(6.0, 128).unwrap(), |x| (-x[0] * x[0]).exp()).unwrap();
    fs::write(&f, g.to_csv_string()).unwrap();
    let spec = format!("file:{}", f.display());
    let o = chj(&["norms", "--f", &spec]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let args = ["convergence", "--intervals", "512", "--n", "6", "--all-levels"];
    let one = chj_env(&args, "1");
    let many = chj_env(&args, "4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let args2 = ["solve", "--dim", "2", "--intervals", "32", "--half-width", "6", "--n", "3", "--f", "hat:2"];
    assert_eq!(chj_env(&args2, "1").stdout, chj_env(&args2, "3").stdout);
    assert_eq!(chj_env(&args, "x").status.code(), Some(1));
}

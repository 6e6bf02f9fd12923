use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tanglelab"));
    c.args(args).env_remove("TANGLELAB_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tanglelab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn constants_json_keys() {
    let o = run(&[
        "constants",
        "--lambda",
        "0.05",
        "--omega",
        "1",
        "--eps",
        "0.05",
        "--mu",
        "1e-4",
        "--rho",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    for k in
        ["alpha", "beta", "gamma_lambda", "A", "C", "S", "a", "b", "c", "k", "P_L", "P_L_plus", "L_minus", "L_plus"]
    {
        assert!(v[k].is_number(), "missing {k}");
    }
    assert_eq!(v["rho"].as_f64(), Some(5.0));
    let alpha = v["alpha"].as_f64().unwrap();
    let beta = v["beta"].as_f64().unwrap();
    assert!((alpha * beta - 1.0).abs() < 1e-15);
}

#[test]
fn floats_have_17_significant_digits() {
    let o = run(&["gamma", "--lambda", "0.05", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    let gamma = row.split(',').nth(3).unwrap();
    let mantissa = gamma.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{gamma}");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["no-such-command"])), 64);
    assert_eq!(code(&run(&["gamma", "--no-such-flag"])), 64);
    assert_eq!(code(&run(&[])), 64);
    assert_eq!(code(&run(&["gamma", "--lambda", "abc"])), 65);
    assert_eq!(code(&run(&["gamma", "--lambda", "0.5"])), 65);
    assert_eq!(code(&run(&["constants", "--mu", "0"])), 65);
    assert_eq!(code(&run(&["classify", "--grid", "3"])), 65);
    assert_eq!(code(&run_env(&["gamma"], &[("TANGLELAB_THREADS", "zero")])), 65);
    assert_eq!(code(&run(&["--help"])), 0);
    // an orbit below the tangle escapes, which is a domain error for the exponents
    assert_eq!(code(&run(&["lyapunov", "--preset", "tangle1", "--a", "0", "--n-iter", "1000"])), 1);
}

#[test]
fn verify_integrals_reports_each_check() {
    let o = run(&["verify-integrals", "--tol", "1e-8"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "check,value,reference,error,match,pass");
    assert_eq!(lines.len(), 1 + 2 + 8);
    assert!(lines[1].starts_with("K closed form") && lines[1].ends_with("true"));
    assert!(lines[2].starts_with("A,") && lines[2].ends_with("true"));
    let all_pass = lines.iter().skip(1).all(|l| l.ends_with("true"));
    assert_eq!(code(&o), if all_pass { 0 } else { 2 });
}

#[test]
fn scan_header_and_determinism() {
    let args = [
        "scan", "--param", "a", "--from", "0", "--to", "6.2832", "--steps", "40", "--preset", "tangle1", "--seed", "9",
    ];
    let a = run(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    assert_eq!(text.lines().next(), Some("a,outcome,lyap1,lyap2,rotation,period,branches"));
    assert_eq!(text.lines().count(), 41);
    let b = run_env(&args, &[("TANGLELAB_THREADS", "3")]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scan_writes_out_file() {
    let path = scratch("scan.csv");
    let p = path.to_str().unwrap();
    let o = run(&["scan", "--preset", "tangle1", "--steps", "4", "--out", p]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn config_file_precedence() {
    let cfg = scratch("run.cfg");
    std::fs::write(&cfg, "# scan settings\npreset = tangle1\nsteps = 5\nn_iter = 2000\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = run(&["scan", "--config", c]);
    assert_eq!(code(&from_file), 0, "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(stdout(&from_file).lines().count(), 6);
    let flag_wins = run(&["scan", "--config", c, "--steps", "3"]);
    assert_eq!(stdout(&flag_wins).lines().count(), 4);

    let bad = scratch("bad.cfg");
    std::fs::write(&bad, "stepz = 5\n").unwrap();
    assert_eq!(code(&run(&["scan", "--config", bad.to_str().unwrap()])), 65);
    std::fs::write(&bad, "steps = many\n").unwrap();
    assert_eq!(code(&run(&["scan", "--config", bad.to_str().unwrap()])), 65);
    assert_eq!(code(&run(&["scan", "--config", "/nonexistent/cfg"])), 65);
}

#[test]
fn every_json_has_schema_version() {
    let cmds: [&[&str]; 6] = [
        &["gamma", "--lambda", "0.05"],
        &["classify", "--preset", "curve1"],
        &["shift-check", "--preset", "tangle1", "--a", "0.9"],
        &["sinks", "--preset", "tangle1", "--a", "0.5", "--format", "json"],
        &["iterate", "--n-iter", "2", "--format", "json"],
        &["orbit", "--span", "1", "--ds", "0.5", "--format", "json"],
    ];
    for args in cmds {
        let o = run(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["schema_version"], 1, "{args:?}");
    }
}

#[test]
fn classify_grid_in_input_order() {
    let o =
        run(&["classify", "--grid", "2", "--omega-from", "1", "--omega-to", "2", "--rho-from", "0.1", "--rho-to", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').take(2).map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows, vec![vec![1.0, 0.1], vec![1.0, 2.0], vec![2.0, 0.1], vec![2.0, 2.0]]);
    assert!(text.lines().nth(1).unwrap().contains("BelowSStar"));
}

#[test]
fn shift_check_certifies_tangle_window() {
    let o = run(&["shift-check", "--preset", "tangle1", "--a", "0.9", "--refine", "10"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "pass");
    assert_eq!(v["samples_per_branch"], 320);
}

#[test]
fn curve_failure_is_a_verification_failure() {
    let o = run(&["curve", "--preset", "curve1", "--grid-n", "256", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pass = v["cones_pass"].as_bool().unwrap() && v["induced_monotone"].as_bool().unwrap();
    assert_eq!(code(&o), if pass { 0 } else { 2 });
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
}

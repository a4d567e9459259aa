//! End-to-end runs of the `fracsol` binary.

use std::process::{Command, Output};

fn fracsol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracsol"))
        .args(args)
        .env("FRACSOL_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const HEAT: &str = r#"{"alpha":1,"m":0,"d":0,"A":1,"B":0,"C":0,"a":0}"#;

#[test]
fn heat_kernel_grid_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    let o = fracsol(&[
        "solve",
        "pde",
        "--json",
        HEAT,
        "--grid",
        "x=0.5:2:4,t=0.5:2:4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,t,u");
    assert_eq!(lines.len(), 17);
    assert!(!csv.contains('\r'));
    let u: f64 = lines
        .iter()
        .find(|l| l.starts_with("1,1,"))
        .and_then(|l| l.split(',').nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!((u - 0.7788008).abs() < 1e-7);
}

#[test]
fn pde_descriptor_lists_roots_and_k() {
    let o = fracsol(&["solve", "pde", "--json", HEAT, "--no-closed-form"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "fox_h_form");
    assert_eq!(v["K"], 0.0);
    assert!(v["s1"].is_array() && v["s2"].is_array());
}

#[test]
fn lemma1_suite_passes() {
    let o = fracsol(&[
        "identities",
        "--suite",
        "lemma1",
        "--n",
        "1000",
        "--seed",
        "7",
        "--tol",
        "1e-11",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("PASS"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["points"].as_array().unwrap().len(), 1000);
}

#[test]
fn failing_verification_exits_two() {
    let o = fracsol(&["identities", "--suite", "wright-reductions", "--tol", "1e-20"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("FAIL"));
}

#[test]
fn mittag_leffler_at_zero() {
    let o = fracsol(&["eval", "ml", "--alpha", "1", "--beta", "1", "--z", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "z,value\n0,1\n");
}

#[test]
fn wright_and_fox_h_evaluation() {
    let o = fracsol(&[
        "eval",
        "wright",
        "--json",
        r#"{"upper":[[1,1]],"lower":[[1,1]]}"#,
        "--z",
        "-1,1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "z,re,im");
    let e: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((e - std::f64::consts::E).abs() < 1e-14);

    // H^{1,0}_{0,1}[z | (0,1)] = exp(-z)
    let o = fracsol(&[
        "eval",
        "foxh",
        "--json",
        r#"{"m":1,"l":0,"lower":[[0,1]]}"#,
        "--z",
        "1:2:2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let v: f64 = out.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((v / (-2.0f64).exp() - 1.0).abs() < 1e-8);
}

#[test]
fn verify_reports_csv_and_json() {
    let ode = r#"{"alpha":2.5,"m":1,"a_coeffs":[0.1,0.5,1]}"#;
    let o = fracsol(&["verify", "--json", ode, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("x,t,lhs,rhs,abs_err,rel_err\n"));
    assert_eq!(out.lines().count(), 6);

    let o = fracsol(&[
        "verify",
        "--json",
        r#"{"alpha":2.5,"m":1,"d":1,"A":1,"B":0.5,"C":0.1,"a":0}"#,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["method"], "termwise_exact");
    assert_eq!(v["points"].as_array().unwrap().len(), 25);
}

#[test]
fn input_errors_exit_one() {
    for args in [
        vec!["solve", "pde", "--json", "{not json"],
        vec![
            "solve",
            "pde",
            "--json",
            r#"{"alpha":1,"m":0,"d":0,"A":1,"B":0,"C":0,"a":0,"zz":1}"#,
        ],
        vec!["solve", "pde", "--json", HEAT, "--grid", "x=0:1:3,t=1:2:2"],
        vec!["eval", "ml", "--alpha", "1", "--z", "0", "--bogus"],
        vec!["identities", "--suite", "lemma1", "--tol", "-1"],
        vec![
            "solve",
            "pde",
            "--json",
            r#"{"alpha":2,"m":0,"d":0,"A":1,"B":0,"C":0,"a":0}"#,
        ],
    ] {
        let o = fracsol(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_lists_flags_and_exits_zero() {
    let o = fracsol(&["identities", "--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for flag in ["--suite", "--n", "--seed", "--tol", "--format", "--out"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = [
        "identities",
        "--suite",
        "reduction",
        "--n",
        "50",
        "--seed",
        "11",
        "--format",
        "csv",
    ];
    assert_eq!(fracsol(&args).stdout, fracsol(&args).stdout);
}

#[test]
fn input_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, HEAT).unwrap();
    let o = fracsol(&["verify", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

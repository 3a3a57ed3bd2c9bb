use std::process::{Command, Output};

fn kpell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpell")).args(args).env_remove("KPELL_DIGITS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn search_prints_both_solutions() {
    let o = kpell(&["search", "--k", "2:12", "--n", "7:200"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "P_8^(3) = 545\nP_7^(5) = 232\n");
}

#[test]
fn bounds_with_and_without_n() {
    let o = kpell(&["bounds", "--k", "2", "--n", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("= 1.286e14"), "{text}");
    assert!(text.contains("= 3.422e27"), "{text}");
    let o = kpell(&["--json", "bounds", "--k", "1400"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["n_cap"].as_str().unwrap().starts_with("8.244") && v["n_cap"].as_str().unwrap().ends_with("e62"));
    assert!(v.get("ell_cap").is_none());
}

#[test]
fn reduce_cells() {
    let o = kpell(&["reduce", "case1-ell", "--k", "3", "--d1", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("case1-ell k=3 d1=5: C = "));
    let o = kpell(&["--json", "reduce", "case1-m", "--k", "3", "--ell", "1", "--d1", "5", "--d2", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["cap"].as_u64().unwrap() > 0);
}

#[test]
fn retries_exhausted_exit_three() {
    // C = 10 leaves the lattice far too coarse even after five retries.
    let o = kpell(&["reduce", "case1-ell", "--k", "3", "--d1", "5", "--C", "10"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn domain_errors_exit_two() {
    for args in [
        &["bounds", "--k", "0"][..],
        &["reduce", "case1-ell", "--d1", "0"],
        &["reduce", "case1-m", "--d1", "4", "--d2", "4"],
        &["search", "--k", "2:5", "--n", "3:9"],
        &["--digits", "5", "verify", "roots", "--k", "2:3"],
    ] {
        let o = kpell(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(kpell(&["search", "--k", "9:2"]).status.code(), Some(2));
    assert_eq!(kpell(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_subcommands() {
    for args in [
        &["verify", "fib", "--k", "2:30"][..],
        &["verify", "roots", "--k", "2:40"],
        &["verify", "binet", "--k", "2:6", "--n", "1:80"],
    ] {
        let o = kpell(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert!(stdout(&o).contains(" 0 failures"));
    }
}

#[test]
fn digits_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_kpell"))
        .args(["verify", "roots", "--k", "2:3"])
        .env("KPELL_DIGITS", "8")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_search_only_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = kpell(&[
        "pipeline",
        "--k-max",
        "10",
        "--n-max",
        "60",
        "--no-case1",
        "--no-case2",
        "--report",
        report.to_str().unwrap(),
    ]);
    // The search alone does not establish the theorem.
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["matches"].as_array().unwrap().len(), 2);
    assert_eq!(v["verdict"]["holds"], false);
}

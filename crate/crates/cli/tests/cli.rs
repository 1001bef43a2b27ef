use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sordering")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn expand_at_zero_lambda_is_identity() {
    let o = run(&["expand", "--op", "exp_number", "--lambda", "0", "--s", "0.3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.contains("(1.0000000000000000e0+0.0000000000000000e0i) * S[s=2.9999999999999999e-1]"), "{first}");
    assert!(first.contains("exp( (0.0000000000000000e0+0.0000000000000000e0i)*ad + (0.0000000000000000e0+0.0000000000000000e0i)*a )"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn expand_weyl_coefficients() {
    let o = run(&["expand", "--op", "exp_number", "--lambda", "0.2", "--s", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let weyl = text.lines().find(|l| l.starts_with("weyl")).unwrap();
    assert!(weyl.contains("(9.0033200537504432e-1+0.0000000000000000e0i) * S[s=0.0000000000000000e0]"), "{weyl}");
    assert!(weyl.contains("(1.9933598924991167e-1+0.0000000000000000e0i)*(ad - v*)*(a - v)"), "{weyl}");
    let anti = text.lines().find(|l| l.starts_with("antinormal")).unwrap();
    assert!(anti.contains("8.1873075307798193e-1"), "{anti}");
}

#[test]
fn grid_output_is_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let state = "0.4*vacuum + 0.6*coherent(0.5-0.5i)";
    for out in [&a, &b] {
        let o = run(&[
            "grid", "--state", state, "--s", "-0.3", "--radius", "2", "--step", "0.5", "--dim", "24", "--out",
            path_arg(out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("re_alpha,im_alpha,re_value,im_value\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + 81);
}

#[test]
fn reconstruct_symbol_route_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&[
        "reconstruct", "--state", "vacuum", "--s", "0", "--route", "symbol", "--radius", "4", "--step", "0.1",
        "--dim", "16", "--out", path_arg(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["hs_error"].as_f64().unwrap() <= 1e-3);
    assert!((v["trace"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(v["dim"], 16);
    assert_eq!(v["grid"]["side"], 81);
    assert!(v["tail_mass"].as_f64().unwrap() >= 0.0);
}

#[test]
fn reconstruct_elements_route() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&[
        "reconstruct", "--state", "thermal(0.5)", "--s", "-0.5", "--route", "elements", "--radius", "6.5", "--step",
        "0.125", "--dim", "24", "--input-dim", "96", "--out", path_arg(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["hs_error"].as_f64().unwrap() <= 2e-3);
}

#[test]
fn mehta_thermal_value() {
    let o = run(&["mehta", "--state", "thermal(1)", "--z", "0", "--radius", "7.5", "--step", "0.125", "--dim", "160"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["p"][0].as_f64().unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn mehta_vacuum_is_numeric_failure() {
    let o = run(&["mehta", "--state", "vacuum", "--z", "0.5-0.2i"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error kind=p-singular exit=3 message="), "{err}");
}

#[test]
fn bad_state_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["grid", "--state", "thermal(-1)", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("kind=parse") && err.contains("byte 8"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_subcommand_and_bad_flag_values() {
    for args in [&["frobnicate"][..], &["expand", "--op", "squeeze", "--lambda", "1"], &["grid"]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error kind=usage exit=2"));
    }
}

#[test]
fn out_of_range_order_is_usage_error() {
    let o = run(&["expand", "--op", "exp_number", "--lambda", "0.2", "--s", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kind=out-of-range"));
}

#[test]
fn verify_quick_reports_every_criterion_and_passes() {
    let o = run(&["verify", "--quick"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 12);
    for c in checks {
        for key in ["check_id", "paper_anchor", "measured_error", "tolerance", "passed"] {
            assert!(c.get(key).is_some(), "{key} missing");
        }
    }
    let all = checks.iter().all(|c| c["passed"].as_bool().unwrap());
    assert_eq!(v["passed"].as_bool().unwrap(), all);
    let expected = if all { 0 } else { 1 };
    assert_eq!(o.status.code(), Some(expected));
    // a correct build passes every check
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

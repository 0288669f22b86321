use assert_cmd::Command;
use serde_json::Value;
use std::fs;
use tempfile::tempdir;

fn sumform() -> Command {
    Command::cargo_bin("sumform").expect("binary should build")
}

fn stdout_json(out: &std::process::Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout should be JSON")
}

fn stderr_json(out: &std::process::Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "stderr must be one line: {text}");
    serde_json::from_str(text.trim_end()).expect("stderr should be JSON")
}

/// A bundle for 1.10 whose f is a table of `x + shift` on the points k/36.
fn table_bundle(shift: &str) -> String {
    let shift: i64 = shift.parse().unwrap();
    let points: Vec<Value> = (0..=36)
        .map(|k| {
            let y = num_text(k * 10 + shift * 36, 360);
            serde_json::json!([num_text(k, 36), y])
        })
        .collect();
    let identity = serde_json::json!({
        "form": "affine_additive", "t": ["1", "0", "0", "0"], "const": "0"
    });
    serde_json::json!({
        "equation": "1.10",
        "family": "4.2",
        "n": 3,
        "m": 3,
        "params": {},
        "functions": {
            "f": {"form": "table", "points": points},
            "g": [identity, identity, identity]
        }
    })
    .to_string()
}

fn num_text(num: i64, den: i64) -> String {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let g = gcd(num, den).max(1);
    let (n, d) = (num / g, den / g);
    if d == 1 { n.to_string() } else { format!("{n}/{d}") }
}

#[test]
fn verify_theorem1_multiplicative_exits_zero() {
    let out = sumform()
        .args(["verify", "--equation", "1.11", "--family", "3.3", "--alpha", "2"])
        .args(["--n", "3", "--m", "3", "--d", "6", "--backend", "exact"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["max_abs_residual"], "0");
    assert_eq!(report["passed"], true);
    assert_eq!(report["evaluations"], 1024);
    let keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "equation", "family", "n", "m", "d", "exact", "max_abs_residual", "witness",
            "evaluations", "boundary_pairs", "irrational_points", "passed"
        ]
    );
}

#[test]
fn entropy_of_fair_coin_is_one() {
    let out = sumform().args(["entropy", "--alpha", "2", "--dist", "1/2,1/2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["H"], 1.0);
    assert_eq!(v["H_exact"], "1");
}

#[test]
fn table_bundle_passes_and_perturbed_table_fails_with_witness() {
    let dir = tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    fs::write(&good, table_bundle("0")).unwrap();
    fs::write(&bad, table_bundle("1")).unwrap();

    let ok = sumform().args(["verify", "--bundle"]).arg(&good).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let report = stdout_json(&ok);
    assert_eq!(report["irrational_points"], false);
    assert_eq!(report["evaluations"], 784);

    let fail = sumform().args(["verify", "--bundle"]).arg(&bad).output().unwrap();
    assert_eq!(fail.status.code(), Some(1));
    let report = stdout_json(&fail);
    assert_eq!(report["passed"], false);
    assert_ne!(report["max_abs_residual"], "0");
    assert_eq!(report["witness"]["p"].as_array().unwrap().len(), 3);
    assert_eq!(report["witness"]["q"].as_array().unwrap().len(), 3);
}

#[test]
fn perturb_flag_breaks_every_family() {
    for family in ["3.1i", "3.1ii", "3.3", "4.1", "4.2", "4.4", "5.1", "5.2", "5.4"] {
        let out = sumform()
            .args(["verify", "--family", family, "--seed", "11", "--perturb", "1/10", "--d", "3"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(1), "family {family}");
        assert_eq!(stdout_json(&out)["family"], "none");
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempdir().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let path = dir.path().join(format!("r{i}.json"));
            sumform()
                .args(["verify", "--family", "5.4", "--seed", "42", "--variant", "hamel", "--d", "4", "-o"])
                .arg(&path)
                .assert()
                .success();
            fs::read(&path).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);

    let sampled: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            sumform()
                .args(["verify", "--family", "4.4", "--seed", "7", "--random", "40"])
                .output()
                .unwrap()
                .stdout
        })
        .collect();
    assert_eq!(sampled[0], sampled[1]);

    let bundles: Vec<Vec<u8>> = (0..2)
        .map(|_| sumform().args(["construct", "--family", "4.2", "--seed", "3"]).output().unwrap().stdout)
        .collect();
    assert_eq!(bundles[0], bundles[1]);
}

#[test]
fn construct_output_round_trips_through_verify() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("b.json");
    sumform()
        .args(["construct", "--family", "5.2", "--seed", "9", "--variant", "hamel", "-o"])
        .arg(&path)
        .assert()
        .success();
    let out = sumform().args(["verify", "--d", "3", "--bundle"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["family"], "5.2");
}

#[test]
fn classify_names_the_family() {
    for (family, expect) in [("3.1ii", "3.1ii"), ("4.4", "4.4"), ("5.4", "5.4"), ("R2", "R2")] {
        let out = sumform().args(["classify", "--family", family, "--d", "4"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(stdout_json(&out)["family"], expect);
    }
    let out = sumform()
        .args(["classify", "--family", "4.4", "--perturb", "1/10", "--d", "4"])
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["family"], "none");
}

#[test]
fn classify_from_samples_csv() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let mut csv = String::from("x,y\n");
    for k in 0..=12 {
        csv.push_str(&format!("{k}/12,{}\n", num_text(k * k, 144)));
    }
    fs::write(&path, csv).unwrap();
    let out = sumform()
        .args(["classify", "--equation", "1.10", "--n", "3", "--samples"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["family"], "4.4");
    assert!((v["alpha"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn solve_grid_writes_csv_and_report() {
    let dir = tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = sumform().args(["solve-grid", "--g-power", "2", "--d", "4", "--report"]).arg(&report).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("x,y\n"));
    assert!(csv.trim_end().ends_with("1,1.0"));
    let summary: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(summary["nullity"], 1);

    let out = sumform().args(["solve-grid", "--d", "6", "--cap", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "system-too-large");
}

#[test]
fn errors_are_single_line_json_with_exit_two() {
    let cases: &[(&[&str], &str)] = &[
        (&["verify", "--family", "9.9"], "parse-error"),
        (&["verify", "--family", "4.2", "--n", "2"], "arity-too-small"),
        (&["verify", "--family", "5.2", "--lambda", "0"], "lambda-zero"),
        (&["verify", "--family", "3.3", "--equation", "1.10"], "unsupported-equation"),
        (&["verify", "--family", "3.3", "--d", "0"], "invalid-grid"),
        (&["entropy", "--alpha", "1", "--dist", "1/2,1/2"], "alpha-is-one"),
        (&["entropy", "--alpha", "2", "--dist", "1/2,1/3"], "sum-not-one"),
        (&["verify", "--bogus"], "usage"),
        (&["verify", "--family", "3.3", "--random", "5"], "usage"),
    ];
    for (args, code) in cases {
        let out = sumform().args(*args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        let err = stderr_json(&out);
        assert_eq!(err["error"], *code, "{args:?}");
        assert!(err["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn help_exits_zero() {
    sumform().arg("--help").assert().success();
    sumform().args(["verify", "--help"]).assert().success();
}

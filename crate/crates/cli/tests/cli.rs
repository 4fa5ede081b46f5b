use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn secant3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secant3"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn secant3_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secant3"))
        .args(args)
        .env(key, val)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn three_points() -> Value {
    json!({
        "schema": "secant3/1",
        "format": {"k": 3, "n": [1, 1, 1], "d": [1, 1, 1]},
        "presentation": {"kind": "three-points", "points": [
            [["1", "0"], ["1", "0"], ["1", "0"]],
            [["0", "1"], ["0", "1"], ["0", "1"]],
            [["1", "1"], ["1", "2"], ["1", "3"]]
        ]},
        "coords": ["2", "-1/2", "3"]
    })
}

#[test]
fn bound_of_three_qubits_is_five() {
    let o = secant3(&[
        "bound",
        "--format",
        r#"{"k":3,"n":[1,1,1],"d":[1,1,1]}"#,
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "5");
    let o = secant3(&[
        "bound",
        "--format",
        r#"{"n":[1,1],"d":[1,1]}"#,
        "--c",
        "4",
        "--alpha",
        "2",
        "--json",
    ]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "8");
}

#[test]
fn witness_k5_x4() {
    let o = secant3(&["witness", "--k", "5", "--x", "4", "--seed", "7", "--json"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = stdout_json(&o);
    assert_eq!(v["certificate"]["size"], 4);
    assert_eq!(v["decomposition"]["terms"].as_array().unwrap().len(), 4);
    assert_eq!(v["certificate"]["flatteningMaxRank"], 3);
    assert!(v["certificate"]["rank"]["note"].is_string());
    let o = secant3(&["witness", "--k", "3", "--x", "3"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exact_decomposition_round_trips_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pres.json", &three_points());
    let a = secant3(&["decompose", "--in", &input, "--exact", "--json"]);
    let b = secant3(&["decompose", "--in", &input, "--exact", "--json"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let cert = stdout_json(&a);
    assert_eq!(cert["certificate"]["mode"], "exact");
    assert_eq!(cert["certificate"]["residual"], 0.0);
    let path = write(dir.path(), "cert.json", &cert);
    let v = secant3(&["verify", "--p", &path, "--dec", &path, "--json"]);
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn corrupted_decomposition_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pres.json", &three_points());
    let mut cert = stdout_json(&secant3(&["decompose", "--in", &input, "--json"]));
    cert["decomposition"]["terms"][0]["coeff"] = json!("7");
    let d = write(dir.path(), "d.json", &cert["decomposition"]);
    let p = write(dir.path(), "p.json", &cert["tensor"]);
    let o = secant3(&["verify", "--p", &p, "--dec", &d, "--exact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_certificate_re_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let input = json!({
        "format": {"n": [1, 1, 1], "d": [1, 1, 1]},
        "presentation": {"kind": "tangent",
            "support": [["1", "0"], ["1", "0"], ["1", "0"]],
            "direction": [["0", "1"], ["0", "1"], ["0", "1"]]},
        "coords": ["0", "1"]
    });
    let path = write(dir.path(), "pres.json", &input);
    let out = dir.path().join("cert.json");
    let o = secant3(&["decompose", "--in", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cert: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(cert["certificate"]["size"], 3);
    let o = secant3(&[
        "verify",
        "--p",
        out.to_str().unwrap(),
        "--dec",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    // exact verification of a numeric decomposition is a usage error
    let o = secant3(&["decompose", "--in", &path, "--exact"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn schema_errors_name_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"presentation\": {\n    \"kind\": 3\n  }\n}\n").unwrap();
    let o = secant3(&["decompose", "--in", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    let o = secant3(&["decompose", "--in", r#"{"schema":"secant3/9"}"#]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn batch_reports_per_entry() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(
        dir.path(),
        "empty.json",
        &json!({"schema": "secant3/1", "entries": []}),
    );
    assert_eq!(
        secant3(&["batch", "--in", &empty, "--json"]).status.code(),
        Some(0)
    );

    let good = json!({"command": "decompose", "input": three_points(), "seed": 3});
    let bad = json!({"command": "decompose", "input": {"presentation": {"kind": "jet3"}}});
    let manifest = write(
        dir.path(),
        "m.json",
        &json!({"entries": [good.clone(), bad, good]}),
    );
    let o = secant3(&["batch", "--in", &manifest, "--workers", "2", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let r = stdout_json(&o);
    assert_eq!(r["total"], 3);
    assert_eq!(r["passed"], 2);
    assert_eq!(r["boundCompliant"], 2);
    assert_eq!(r["entries"][1]["exitCode"], 3);
}

#[test]
fn sylvester_and_family() {
    let o = secant3(&[
        "sylvester",
        "--in",
        r#"{"coeffs":["1","0","0","0","1"]}"#,
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["rnc"]["a"], 4);
    assert_eq!(v["rnc"]["coeffs"].as_array().unwrap().len(), 2);

    let w = stdout_json(&secant3(&["witness", "--k", "4", "--x", "3", "--json"]));
    let input = json!({"presentation": w["presentation"], "tensor": w["tensor"]});
    let o = secant3(&["family", "--in", &input.to_string(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let f = stdout_json(&o);
    assert!(f["slope"].as_f64().unwrap() >= 0.9);
}

#[test]
fn precision_variable() {
    let o = secant3_env(
        &["witness", "--k", "4", "--x", "3"],
        "SECANT3_PRECISION",
        "113",
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("53"));
    let o = secant3_env(
        &["witness", "--k", "4", "--x", "3", "--json"],
        "SECANT3_PRECISION",
        "12",
    );
    let v = stdout_json(&o);
    let re: f64 = v["decomposition"]["terms"][0]["coeff"][0]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    // 12 significant bits: scaling the mantissa to 12 bits leaves an integer
    let scaled = re * 2f64.powi(11 - re.abs().log2().floor() as i32);
    assert_eq!(scaled, scaled.round());
    let o = secant3_env(
        &["bound", "--format", r#"{"n":[1],"d":[1]}"#],
        "SECANT3_PRECISION",
        "lots",
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn curvilinear_subcommand() {
    let jet = |o: [&str; 2], w: [&str; 2]| {
        json!({"format": {"n": [1, 1, 1], "d": [1, 1, 1]}, "order": 3,
               "factors": [[[o[0], w[0]], [o[1], w[1]]], [[o[0], w[0]], [o[1], w[1]]], [[o[0], w[0]], [o[1], w[1]]]]})
    };
    let input = json!({"multijet": {"components": [jet(["1", "0"], ["0", "1"])]}, "coords": ["1", "1", "1"]});
    let o = secant3(&["curvilinear", "--in", &input.to_string(), "--json"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = stdout_json(&o);
    assert_eq!(v["certificate"]["size"], 2);
    assert_eq!(v["certificate"]["bound"], 8);
}

#[test]
fn unknown_flag_is_invalid_input() {
    assert_eq!(secant3(&["witness", "--bogus"]).status.code(), Some(3));
}

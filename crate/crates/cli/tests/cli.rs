use serde_json::Value;
use std::process::{Command, Output};

fn csint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csint")).args(args).output().expect("binary runs")
}

fn schema() -> Value {
    let text = include_str!("../schemas/run_record.schema.json");
    serde_json::from_str(text).unwrap()
}

fn type_ok(v: &Value, ty: &Value) -> bool {
    let one = |t: &str| match t {
        "object" => v.is_object(),
        "string" => v.is_string(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        _ => false,
    };
    match ty {
        Value::String(t) => one(t),
        Value::Array(ts) => ts.iter().any(|t| one(t.as_str().unwrap())),
        _ => true,
    }
}

/// Structural check for the subset of JSON Schema the record schema uses.
fn conforms(v: &Value, s: &Value) -> Result<(), String> {
    if let Some(ty) = s.get("type") {
        if !type_ok(v, ty) {
            return Err(format!("{v} is not {ty}"));
        }
    }
    if let Some(Value::Array(allowed)) = s.get("enum") {
        if !allowed.contains(v) {
            return Err(format!("{v} not in {allowed:?}"));
        }
    }
    if let Some(min) = s.get("minimum").and_then(Value::as_f64) {
        if v.as_f64().is_some_and(|x| x < min) {
            return Err(format!("{v} below {min}"));
        }
    }
    let Some(obj) = v.as_object() else { return Ok(()) };
    for key in s.get("required").and_then(Value::as_array).into_iter().flatten() {
        if !obj.contains_key(key.as_str().unwrap()) {
            return Err(format!("missing {key}"));
        }
    }
    let props = s.get("properties").and_then(Value::as_object);
    for (k, x) in obj {
        match props.and_then(|p| p.get(k)) {
            Some(sub) => conforms(x, sub).map_err(|e| format!("{k}: {e}"))?,
            None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                return Err(format!("unexpected {k}"))
            }
            None => {}
        }
    }
    Ok(())
}

fn record(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let rec: Value = serde_json::from_str(text.trim()).unwrap();
    conforms(&rec, &schema()).unwrap();
    rec
}

#[test]
fn hopf_linking_number() {
    let rec = record(&csint(&["invariant", "lk", "--preset", "hopf"]));
    let v = rec["result"]["value"].as_f64().unwrap();
    assert!((v.abs() - 1.0).abs() < 1e-6, "{v}");
    assert_eq!(rec["config"]["method"], "quadrature");
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let args = ["invariant", "v2", "--preset", "trefoil", "--samples", "2e4", "--seed", "7", "--deterministic"];
    let a = csint(&args);
    let b = csint(&args);
    record(&a);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_out_appends_records() {
    let path = std::env::temp_dir().join(format!("csint-cli-{}.jsonl", std::process::id()));
    let _ = std::fs::remove_file(&path);
    let p = path.to_str().unwrap();
    for _ in 0..2 {
        record(&csint(&["invariant", "writhe", "--preset", "circle", "--samples", "1e4", "--json-out", p]));
    }
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    for l in lines {
        conforms(&serde_json::from_str(l).unwrap(), &schema()).unwrap();
    }
}

#[test]
fn file_input_matches_preset() {
    let link = csint::geom::presets::by_name("hopf").unwrap();
    let path = std::env::temp_dir().join(format!("csint-hopf-{}.json", std::process::id()));
    std::fs::write(&path, link.to_json()).unwrap();
    let a = record(&csint(&["invariant", "lk", "--file", path.to_str().unwrap()]));
    let b = record(&csint(&["invariant", "lk", "--preset", "hopf"]));
    std::fs::remove_file(&path).unwrap();
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn anomaly_degree_two_report() {
    let rec = record(&csint(&["anomaly", "--degree", "2", "--configurations", "20", "--alpha1", "--samples", "2e4"]));
    let report = &rec["result"]["report"];
    assert_eq!(report["passed"], true);
    assert_eq!(report["survivors"].as_array().unwrap().len(), 0);
    let a1 = rec["result"]["alpha1"]["value"].as_f64().unwrap();
    assert!((a1 - 1.0).abs() < 0.05, "{a1}");
}

#[test]
fn shrink_prints_csv() {
    let out = csint(&["shrink", "--preset", "trefoil-blackboard", "--lambdas", "1,0.5", "--samples", "2e4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,estimate,std_error"));
    let rows: Vec<Vec<f64>> = lines
        .by_ref()
        .take(2)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], 1.0);
    assert!(text.contains("prediction_mod1"));
}

#[test]
fn bad_input_exits_two() {
    for args in [
        vec!["anomaly"],
        vec!["anomaly", "--degree", "6"],
        vec!["invariant", "lk", "--preset", "no-such-link"],
        vec!["invariant", "writhe", "--preset", "hopf"],
        vec!["invariant", "lk", "--preset", "hopf", "--pair", "0,5"],
        vec!["invariant", "lk", "--file", "/nonexistent/link.json"],
        vec!["shrink", "--preset", "trefoil", "--lambdas", "0"],
    ] {
        let out = csint(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn threads_do_not_change_results() {
    let args = ["invariant", "v2", "--preset", "figure-eight", "--samples", "3e4", "--deterministic"];
    let run = |k: &str| Command::new(env!("CARGO_BIN_EXE_csint")).args(args).env("CSINT_THREADS", k).output().unwrap();
    let a = run("1");
    let b = run("3");
    record(&a);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn shrink_at_one_is_the_writhe() {
    let w = record(&csint(&["invariant", "writhe", "--preset", "trefoil-blackboard"]));
    let out = csint(&["shrink", "--preset", "trefoil-blackboard", "--lambdas", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1].parse::<f64>().unwrap(), w["result"]["value"].as_f64().unwrap());
    let circle = record(&csint(&["invariant", "writhe", "--preset", "circle"]));
    assert_eq!(circle["result"]["value"].as_f64().unwrap(), 0.0);
}

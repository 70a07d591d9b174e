//! Black-box tests of the `latarb` binary: exit codes, report shape against
//! the published schemas, overrides, and trace output.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
const SCHEMAS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas");

fn latarb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latarb")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

/// Minimal structural validator for the subset of JSON Schema the published
/// schemas use: type, required, properties, additionalProperties: false,
/// items, enum, oneOf, $ref into $defs, and numeric bounds.
fn validate(schema: &Value, value: &Value, root: &Value, at: &str) {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.rsplit('/').next().unwrap();
        let target = &root["$defs"][name];
        assert!(!target.is_null(), "{at}: unresolved $ref {r}");
        return validate(target, value, root, at);
    }
    if let Some(options) = schema.get("oneOf").and_then(Value::as_array) {
        let ok = options.iter().any(|s| {
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                validate(s, value, root, at)
            }))
            .is_ok()
        });
        assert!(ok, "{at}: no oneOf branch matched {value}");
        return;
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        assert!(allowed.contains(value), "{at}: {value} not in {allowed:?}");
        return;
    }
    let types: Vec<&str> = match &schema["type"] {
        Value::String(s) => vec![s.as_str()],
        Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
        _ => vec![],
    };
    if !types.is_empty() {
        let actual = match value {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) if n.is_u64() || n.is_i64() => "integer",
            Value::Number(_) => "number",
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        let ok = types.iter().any(|t| *t == actual || (*t == "number" && actual == "integer"));
        assert!(ok, "{at}: expected {types:?}, got {actual} ({value})");
    }
    if let Some(n) = value.as_f64() {
        if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
            assert!(n >= min, "{at}: {n} < minimum {min}");
        }
        if let Some(max) = schema.get("maximum").and_then(Value::as_f64) {
            assert!(n <= max, "{at}: {n} > maximum {max}");
        }
        if let Some(m) = schema.get("exclusiveMinimum").and_then(Value::as_f64) {
            assert!(n > m, "{at}: {n} <= exclusiveMinimum {m}");
        }
    }
    if let Value::Object(map) = value {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                assert!(map.contains_key(key), "{at}: missing required key '{key}'");
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
            let allowed = props.map(|p| p.keys().collect::<Vec<_>>()).unwrap_or_default();
            for key in map.keys() {
                assert!(allowed.contains(&key), "{at}: unexpected key '{key}'");
            }
        }
        if let Some(props) = props {
            for (key, sub) in props {
                if let Some(v) = map.get(key) {
                    validate(sub, v, root, &format!("{at}.{key}"));
                }
            }
        }
    }
    if let (Value::Array(items), Some(item_schema)) = (value, schema.get("items")) {
        for (i, v) in items.iter().enumerate() {
            validate(item_schema, v, root, &format!("{at}[{i}]"));
        }
    }
}

fn load_schema(name: &str) -> Value {
    let text = std::fs::read_to_string(format!("{SCHEMAS}/{name}")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn analyze_report_matches_schema() {
    let out = latarb(&["analyze", "--scenario", &fixture("albany.json")]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let schema = load_schema("analysis-report.schema.json");
    validate(&schema, &report, &schema, "$");
    assert_eq!(report["scenario"], "albany");
    assert!((report["optimal_delay"]["gamma_star_ms"].as_f64().unwrap() - 84.86).abs() < 0.01);
}

#[test]
fn simulate_report_matches_schema() {
    for (scenario, extra) in [
        ("albany.json", vec![]),
        ("frankfurt.json", vec![]),
        ("albany.json", vec!["--strategy", "timed", "--t-exec", "150"]),
    ] {
        let mut args = vec!["simulate", "--scenario"];
        let path = fixture(scenario);
        args.push(&path);
        args.extend(["-n", "20000"]);
        args.extend(extra.iter());
        let out = latarb(&args);
        assert!(out.status.success(), "{scenario}: {}", String::from_utf8_lossy(&out.stderr));
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        let schema = load_schema("simulation-report.schema.json");
        validate(&schema, &report, &schema, "$");
    }
}

#[test]
fn calibrate_report_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("cal.json");
    let out = latarb(&["calibrate", "-n", "50000", "--json", json.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FLAG"), "calibrate table must flag the timed row:\n{stdout}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let schema = load_schema("calibration-report.schema.json");
    validate(&schema, &report, &schema, "$");
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = latarb(&["simulate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn semantically_invalid_scenario_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // Valid JSON, but e_s < e_l violates the cost ordering.
    std::fs::write(
        &bad,
        r#"{
            "market": {"costs": {"e_sim": 0.0, "e_l": 4.0, "e_s": 2.5}},
            "latency": {"s": {"gaussian": {"mu": 51, "sigma": 28}}, "l": {"gaussian": {"mu": 103, "sigma": 25.7}}, "h": 4.0},
            "strategy": "immediate"
        }"#,
    )
    .unwrap();
    let out = latarb(&["simulate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_on_empirical_legs_points_to_simulate() {
    let out = latarb(&["analyze", "--scenario", &fixture("kampala.json")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("simulate"), "error should point to simulate: {err}");
}

#[test]
fn ingest_reports_entries_and_line_errors() {
    let out = latarb(&["ingest", &fixture("wondernetwork-2021.csv")]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("10 entries ok"));
    assert!(stdout.contains("kampala-chicago") && stdout.contains("671.0"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "name,kind,p1,p2\nok,gaussian,51,28\nbroken,gaussian,oops,28\n").unwrap();
    let out = latarb(&["ingest", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3"), "error should carry the line number: {err}");

    let out = latarb(&["ingest", "/nonexistent/catalog.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn strategy_overrides_resolve() {
    let out = latarb(&[
        "simulate",
        "--scenario",
        &fixture("albany.json"),
        "--strategy",
        "delayed",
        "--delta",
        "100",
        "-n",
        "10000",
    ]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["resolved_delta_ms"], 100.0);

    // --delta without --strategy is rejected.
    let out = latarb(&["simulate", "--scenario", &fixture("albany.json"), "--delta", "100"]);
    assert_eq!(out.status.code(), Some(1));

    // Timed needs exactly one of --t-exec / --target.
    let out = latarb(&[
        "simulate", "--scenario", &fixture("albany.json"), "--strategy", "timed",
        "--t-exec", "150", "--target", "0.9",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn trace_writes_per_trial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = latarb(&[
        "simulate",
        "--scenario",
        &fixture("albany.json"),
        "-n",
        "50",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,send_s,send_l,arrival_s,arrival_l,exec_s,exec_l,classification"
    );
    assert_eq!(lines.count(), 50);
    assert!(Path::new(&trace).exists());
}

#[test]
fn target_strategy_resolves_execution_time() {
    let out = latarb(&["simulate", "--scenario", &fixture("kampala.json"), "-n", "10000"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["resolved_t_exec_ms"], 671.0);
    assert_eq!(report["frequencies"]["sim"], 1.0);
}

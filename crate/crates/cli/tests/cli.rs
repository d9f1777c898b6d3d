//! End-to-end runs of the `dynledger` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynledger"))
        .args(args)
        .current_dir(root())
        .env_remove("DYNLEDGER_SEED")
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn schema_for(def: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("docs/schemas/dynledger.schema.json")).unwrap();
    let mut schema: Value = serde_json::from_str(&text).unwrap();
    schema["$ref"] = Value::from(format!("#/$defs/{def}"));
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(def: &str, doc: &Value) {
    let v = schema_for(def);
    let errors: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{def}: {errors:#?}");
}

const SIEGEL: [&str; 4] = [
    "--map-file",
    "docs/examples/siegel-map.json",
    "--annot",
    "docs/examples/siegel.json",
];

#[test]
fn ext_of_z_squared() {
    let v = json_ok(&["ext", "--map", "z^2"]);
    assert_eq!(v["global"]["ker"], 0);
    assert_eq!(v["global"]["coker"], 2);
    assert_valid("ext", &v);
}

#[test]
fn siegel_count_reads_one_le_one() {
    let mut args = vec!["count"];
    args.extend(SIEGEL);
    let v = json_ok(&args);
    assert_eq!(
        (v["lhs_I41"].as_i64(), v["rhs_I41"].as_i64()),
        (Some(1), Some(1))
    );
    assert_eq!(v["satisfied_I41"], true);
    assert_valid("count", &v);
}

#[test]
fn siegel_parameter_on_the_command_line() {
    let v = json_ok(&[
        "count",
        "--map",
        "z^2 + c",
        "--param",
        "c=-0.3905408702184-0.5867879073469687i",
        "--annot",
        "docs/examples/siegel.json",
    ]);
    assert_eq!(v["n_SD"], 1);
    assert_eq!(v["lhs_I41"], 1);
}

#[test]
fn count_table_is_text() {
    let out = run(&["count", "--map", "z + z^2", "--table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("v79") && text.contains("0 <= 0"), "{text}");
}

#[test]
fn mobius_residue_vanishes() {
    let v = json_ok(&[
        "residue", "--map", "z/(z+1)", "--form", "(1)/z^2", "--family", "fatou",
    ]);
    let value = v["estimate"]["value"].as_f64().unwrap();
    assert!(value.abs() < 1e-6, "{value}");
    assert_eq!(v["nu"], serde_json::json!([0.0, 0.0]));
    assert_valid("residue", &v);
}

#[test]
fn residue_trace_csv_and_seed() {
    let dir = tempdir();
    let csv = dir.join("trace.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_dynledger"))
        .args([
            "residue", "--map", "2z", "--form", "log", "--family", "disc", "--csv",
        ])
        .arg(&csv)
        .env("DYNLEDGER_SEED", "42")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 42);
    assert!((v["estimate"]["value"].as_f64().unwrap() - 4f64.ln()).abs() < 1e-3);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,value"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn every_command_matches_the_schema() {
    let cases: [(&str, Vec<&str>); 5] = [
        ("parse", vec!["parse", "--map", "(z^2 - 1)/(2z)"]),
        (
            "cycles",
            vec!["cycles", "--map", "z^2 - 0.75", "--max-period", "2"],
        ),
        ("parabolic", vec!["parabolic", "--map", "z + z^3"]),
        ("tails", vec!["tails", "--map", "z^2 - 1"]),
        ("ext", vec!["ext", "--map", "z + z^2"]),
    ];
    for (def, args) in cases {
        assert_valid(def, &json_ok(&args));
    }
    let mut args = vec!["tails"];
    args.extend(SIEGEL);
    assert_valid("tails", &json_ok(&args));
}

#[test]
fn parabolic_reports_abel_residuals() {
    let v = json_ok(&["parabolic", "--map", "z + z^3"]);
    let p = &v["parabolic"][0];
    assert_eq!(p["e"], 2);
    for c in p["abel"].as_array().unwrap() {
        assert!(c["max_residual"].as_f64().unwrap() < 1e-6, "{c}");
    }
}

#[test]
fn transcript_is_csv() {
    let out = run(&[
        "tails",
        "--map",
        "z^2 - 2",
        "--transcript",
        "0",
        "--steps",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,re,im,chart");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("1,-2e0,"));
}

#[test]
fn corpus_run_passes_and_is_deterministic() {
    let a = run(&["corpus-run"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let b = run(&["corpus-run"]);
    assert_eq!(a.stdout, b.stdout, "corpus-run output differs between runs");
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_valid("corpus_run", &v);
    let names: Vec<&str> = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn expectation_miss_exits_one() {
    let dir = tempdir();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"entries": [{"name": "wrong", "map": {"expr": "z^2"},
            "expected": [{"path": "/degree", "value": 3, "provenance": "TRIVIAL", "source": "deliberately wrong"}]}]}"#,
    )
    .unwrap();
    let out = run(&["corpus-run", "--corpus", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["entries"][0]["checks"][0]["actual"], 2);
}

#[test]
fn input_errors_exit_two_with_json() {
    for args in [
        vec!["parse", "--map", "z^2 +"],
        vec!["cycles"],
        vec!["parse", "--map", "z^2 + c"],
        vec!["count", "--map", "z/(z+1)"],
        vec!["parse", "--map", "z^2", "--param", "c"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
        assert_valid("error", &err);
    }
    let out = run(&["parse", "--map", "z^2 + c"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "unbound_parameter");
}

#[test]
fn raster_writes_ppm() {
    let dir = tempdir();
    let path = dir.join("basins.ppm");
    let out = run(&[
        "raster",
        "--map",
        "z^2 - 1",
        "--width",
        "16",
        "--height",
        "12",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let bytes = std::fs::read(&path).unwrap();
    let header = b"P6\n16 12\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 16 * 12 * 3);
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "dynledger-cli-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

use std::path::{Path, PathBuf};
use std::process::Command;

use jsonschema::JSONSchema;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dslab"))
}

fn run(args: &[&str]) -> (i32, Vec<u8>, String) {
    let o = bin().args(args).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), o.stdout, String::from_utf8_lossy(&o.stderr).into_owned())
}

fn schema(name: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&v).expect("schema compiles")
}

fn assert_valid(name: &str, doc: &Value) {
    let s = schema(name);
    let msgs: Vec<String> = match s.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{name}: {msgs:?}\n{doc}");
}

struct Files {
    _dir: tempfile::TempDir,
    seq4: PathBuf,
    seq5: PathBuf,
    plain: PathBuf,
    segs: PathBuf,
}

fn files() -> Files {
    let dir = tempfile::tempdir().unwrap();
    let seq4 = dir.path().join("s4.json");
    let seq5 = dir.path().join("s5.json");
    assert_eq!(run(&["generate", "--order", "4", "-i", "2", "-j", "3", "--out", seq4.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["generate", "--order", "5", "-i", "1", "-j", "3", "--out", seq5.to_str().unwrap()]).0, 0);
    let plain = dir.path().join("plain.json");
    std::fs::write(&plain, r#"{"symbols":[0,1,0,2,0,2,1,2]}"#).unwrap();
    let segs = dir.path().join("segs.json");
    std::fs::write(
        &segs,
        r#"[{"x1":[0,1],"x2":[10,1],"a":[0,1],"b":[0,1]},
            {"x1":[4,1],"x2":[6,1],"a":[0,1],"b":[-1,1]},
            {"x1":null,"x2":null,"a":[1,3],"b":[2,1]}]"#,
    )
    .unwrap();
    Files { _dir: dir, seq4, seq5, plain, segs }
}

/// (schema, arguments) for every command shape.
fn commands(f: &Files) -> Vec<(&'static str, Vec<String>)> {
    let p = |x: &PathBuf| x.to_str().unwrap().to_string();
    let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut out = vec![
        ("generate", v(&["generate", "--order", "4", "-i", "2", "-j", "2", "--stats-only"])),
        ("generate", v(&["generate", "--order", "5", "-i", "2", "-j", "1"])),
        ("verify", v(&["verify", "--in", &p(&f.seq4)])),
        ("verify", v(&["verify", "--in", &p(&f.plain), "--order", "3"])),
        ("oracle", v(&["oracle", "--s", "3", "--n", "5"])),
        ("oracle", v(&["oracle", "--s", "4", "--n", "4", "--m", "5"])),
        ("bounds", v(&["bounds", "--s", "5", "--n", "1000", "--m", "64", "--best"])),
        ("bounds", v(&["bounds", "--s", "3", "--n", "1000", "--m", "64", "--i", "2"])),
        ("appendices", v(&["bounds", "--verify-appendices", "--smax", "12", "--imax", "12"])),
        ("envelope", v(&["envelope", "--in", &p(&f.segs), "--check-order", "3", "--stats"])),
        ("envelope", v(&["envelope", "--random", "segments", "--n", "60", "--trials", "4", "--stats", "--seed", "9"])),
        ("envelope", v(&["envelope", "--random", "lines", "--n", "60", "--trials", "4", "--check-order", "1"])),
        ("selftest", v(&["selftest", "--quick", "--only", "1,5,7,8,9"])),
        ("table", v(&["ackermann", "--imax", "4", "--jmax", "8", "--format", "json"])),
        ("table", v(&["bounds", "--s", "4", "--n", "50", "--m", "9", "--table", "--format", "json"])),
    ];
    for report in ["feathers", "nesting", "ensemble"] {
        for strat in ["halving", "ackermann:2,3", "permissible:1"] {
            out.push(("tree", v(&["tree", "--in", &p(&f.seq4), "--strategy", strat, "--report", report])));
            out.push(("tree", v(&["tree", "--in", &p(&f.seq5), "--strategy", strat, "--report", report])));
        }
    }
    out
}

#[test]
fn outputs_match_schemas() {
    let f = files();
    for (name, args) in commands(&f) {
        let args: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let (code, out, err) = run(&args);
        assert!(code == 0 || code == 1, "{args:?}: {code} {err}");
        let doc: Value = serde_json::from_slice(&out).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_valid(name, &doc);
        assert_eq!(doc["config"]["prng"], "ChaCha8");
    }
}

#[test]
fn outputs_are_deterministic_across_runs_and_workers() {
    let f = files();
    for (_, args) in commands(&f) {
        let mut outs = Vec::new();
        for w in ["1", "4", "4"] {
            let mut a: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
            a.extend(["--workers", w]);
            outs.push(run(&a).1);
        }
        assert_eq!(outs[0], outs[1], "{args:?}");
        assert_eq!(outs[1], outs[2], "{args:?}");
    }
}

#[test]
fn generate_example() {
    let (code, out, _) = run(&["generate", "--order", "4", "-i", "2", "-j", "2", "--stats-only"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_slice(&out).unwrap();
    for (k, x) in [("N", 8), ("B", 16), ("length", 32), ("mult", 4)] {
        assert_eq!(v[k], x);
    }
}

#[test]
fn exit_codes() {
    let (code, out, err) = run(&["oracle", "--s", "3", "--frobnicate"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("Usage"));
    assert_eq!(run(&["nosuch"]).0, 2);
    assert_eq!(run(&["bounds", "--s", "3", "--n", "5", "--m", "0"]).0, 2);
    assert_eq!(run(&["verify", "--in", "/nonexistent/x.json"]).0, 2);
    assert_eq!(run(&["bounds", "--verify-appendices", "--smax", "12", "--imax", "12"]).0, 0);
    // S4(2,2) has a length-6 alternation
    let f = files();
    assert_eq!(run(&["verify", "--in", f.seq4.to_str().unwrap(), "--order", "4"]).0, 1);
    assert_eq!(run(&["envelope", "--in", f.segs.to_str().unwrap(), "--check-order", "1"]).0, 1);
    let (code, out, _) = run(&["envelope", "--in", f.segs.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["sequence"], serde_json::json!([2, 0, 1, 0, 2]));
    assert_eq!(v["breakpoints"], serde_json::json!([[0, 1], [4, 1], [6, 1], [10, 1]]));
    let (code, _, err) = run(&["generate", "--order", "5", "-i", "3", "-j", "3"]);
    assert_eq!(code, 3, "{err}");
    assert_eq!(run(&["oracle", "--s", "3", "--n", "9"]).0, 3);
}

#[test]
fn symbol_cap_from_environment() {
    let o = bin().args(["generate", "--order", "4", "-i", "2", "-j", "3"]).env("DSLAB_MAX_SYMBOLS", "100").output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = bin().args(["generate", "--order", "4", "-i", "2", "-j", "2"]).env("DSLAB_MAX_SYMBOLS", "100").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["max_symbols"], 100);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let (code, out, _) = run(&["ackermann", "--imax", "2", "--jmax", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.lines().nth(1) == Some("i,j,value,saturated"));
}

#[test]
fn generated_sequence_round_trips_through_verify_and_tree() {
    let f = files();
    let (code, out, _) = run(&["verify", "--in", f.seq5.to_str().unwrap(), "--order", "5"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["valid"], true);
    let (code, out, _) = run(&["tree", "--in", f.seq5.to_str().unwrap(), "--report", "ensemble"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_slice(&out).unwrap();
    let rows = v["per_symbol"].as_array().unwrap();
    let total: u64 = rows.iter().map(|r| r["occurrences"].as_u64().unwrap()).sum();
    assert_eq!(total, v["summary"]["all"]["total"].as_u64().unwrap());
}

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lax-glue")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn strip_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn parse_error_names_the_locus() {
    let out = run(&["subdivide", data("bad_leq.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("ParseError"), "{err}");
    assert!(err.contains("leq[0]"), "{err}");
}

#[test]
fn missing_file_is_an_io_error() {
    let out = run(&["subdivide", "/nonexistent/poset.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("Io"));
}

#[test]
fn subdivide_with_a_sieve() {
    let out = run(&["subdivide", data("delta2.json").to_str().unwrap(), "--sieve", "0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "PASS");
    assert_eq!(r["output"]["count"], 7);
    assert!(r["output"]["dot"].as_str().unwrap().starts_with("digraph"));
}

#[test]
fn size_limit_is_enforced() {
    let out = Command::new(env!("CARGO_BIN_EXE_lax-glue"))
        .args(["subdivide", data("delta2.json").to_str().unwrap()])
        .env("LAXGLUE_SIZE_LIMIT", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("SizeLimit"));
}

#[test]
fn reports_are_deterministic() {
    let input = data("interval_sets.json");
    let args = ["verify", input.to_str().unwrap(), "--suite", "recollement", "--seed", "7", "--samples", "10"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip_timing(report(&a)), strip_timing(report(&b)));
}

#[test]
fn glue_on_the_interval() {
    let out = run(&[
        "glue",
        data("interval_sets.json").to_str().unwrap(),
        data("interval_section.json").to_str().unwrap(),
        "--sieve",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    for key in ["j_lower_star", "j_lower_shriek", "i_lower_star", "gluing"] {
        assert!(r["output"].get(key).is_some(), "{key}");
    }
}

#[test]
fn fracture_on_the_interval() {
    let out = run(&[
        "fracture",
        data("interval_sets.json").to_str().unwrap(),
        data("interval_section.json").to_str().unwrap(),
        "--sieve",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["output"]["is_iso"], true);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = std::env::temp_dir().join(format!("lax-glue-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&["subdivide", data("delta1.json").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["output"]["count"], 3);
}

#[test]
fn replay_is_a_fixpoint() {
    let diagram: Value = serde_json::from_str(&std::fs::read_to_string(data("degenerate_d2.json")).unwrap()).unwrap();
    // a section without its spine map 1<2
    let witness = json!({"replay": {
        "command": {"name": "extendable", "input": "degenerate_d2.json", "check": "roundtrip", "section": null},
        "config": {"max_dim": 1},
        "inputs": {"input": diagram},
        "check": "spine data present",
        "instance": {"x": {"0": 1, "1": 1, "2": 1}, "phi": {"0<1": [[1]]}}
    }});
    let dir = std::env::temp_dir().join(format!("lax-glue-replay-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let first = dir.join("w1.json");
    std::fs::write(&first, witness.to_string()).unwrap();
    let out = run(&["replay", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let r1 = report(&out);
    let failing = r1["checks"].as_array().unwrap().iter().find(|c| c["verdict"] == "FAIL").unwrap().clone();
    assert_eq!(failing["name"], "spine data present");
    let second = dir.join("w2.json");
    std::fs::write(&second, failing["witness"].to_string()).unwrap();
    let r2 = report(&run(&["replay", second.to_str().unwrap()]));
    assert_eq!(r1["checks"], r2["checks"]);
}

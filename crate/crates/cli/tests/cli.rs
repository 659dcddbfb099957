use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn nmcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmcode")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{}: {}", e, String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn params_exit_code_follows_violations() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", &json!({"formula": "switching", "w": 2, "t": 2, "p": 0.00390625, "delta": 0.0, "m": 8}));
    let o = nmcode(&["params", ok.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v.as_array().unwrap().len(), 1);

    let many = write(
        dir.path(),
        "many.json",
        &json!([
            {"formula": "chernoff", "sigma": 8},
            {"formula": "chernoff", "sigma": 1000, "eps": 0.1, "mu": 10.0}
        ]),
    );
    let o = nmcode(&["params", many.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o).as_array().unwrap().len(), 2);
}

#[test]
fn malformed_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &json!({"formula": "no-such-formula"}));
    assert_eq!(nmcode(&["params", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(nmcode(&["params", dir.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn encode_then_decode() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "pipe.json", &json!({"toy_k": 1, "ss": "two-bit", "depth": 2, "p_log_inv": 1, "sigma": 1, "t": 2}));
    let spec = spec.to_str().unwrap();
    for msg in ["00", "01", "10", "11"] {
        let o = nmcode(&["encode", "--pipeline", spec, "--message", msg, "--seed", "5"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let c = stdout_json(&o)["codeword"].as_str().unwrap().to_string();
        let again = stdout_json(&nmcode(&["encode", "--pipeline", spec, "--message", msg, "--seed", "5"]));
        assert_eq!(again["codeword"], c);

        let d = nmcode(&["decode", "--pipeline", spec, "--codeword", &c]);
        assert_eq!(d.status.code(), Some(0));
        assert_eq!(stdout_json(&d)["message"], msg);
    }
    assert_eq!(nmcode(&["encode", "--pipeline", spec, "--message", "0a"]).status.code(), Some(2));
    assert_eq!(nmcode(&["decode", "--pipeline", spec, "--codeword", "0101"]).status.code(), Some(2));
}

#[test]
fn switching_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sw.json",
        &json!({
            "master_seed": 3,
            "mode": {"montecarlo": {"trials": 2000}},
            "target": {
                "kind": "switching",
                "family": {"random-dnf": {"m": 4, "terms": 4, "width": 2, "n": 32, "seed": 1}},
                "w": 2, "t": 2, "p_log_inv": 6,
                "source": {"cw": {"sigma": 8}}
            },
            "output": "report.json"
        }),
    );
    let csv = dir.path().join("sw.csv");
    let o = nmcode(&["switching", "--config", cfg.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let printed = stdout_json(&o);
    assert_eq!(printed["trials"], 2000);
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, printed);
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 2);
    assert!(rows.starts_with("members,n,trials"));
}

#[test]
fn star_experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "star.json",
        &json!({
            "master_seed": 8,
            "mode": {"montecarlo": {"trials": 300}},
            "target": {"kind": "star-reduction", "k": 2, "n": 16, "p_log_inv": 1, "sigma": 1, "t": 2, "collapse": "base"},
            "adversaries": [{"kind": "identity"}, {"kind": "constant", "fill": true}, {"kind": "random-local", "locality": 2, "seed": 4}]
        }),
    );
    let a = nmcode(&["nm-experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = nmcode(&["nm-experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["results"].as_array().unwrap().len(), 3);
}

#[test]
fn pipeline_experiment_persists_spec() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "pipe.json",
        &json!({
            "master_seed": 1,
            "mode": {"montecarlo": {"trials": 40}},
            "target": {"kind": "pipeline", "toy_k": 1, "ss": "two-bit", "depth": 2, "p_log_inv": 1, "sigma": 1, "t": 2},
            "adversaries": [{"kind": "identity"}],
            "output": "out.json"
        }),
    );
    let o = nmcode(&["nm-experiment", "--config", cfg.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    let spec: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out.pipeline.json")).unwrap()).unwrap();
    assert_eq!(spec["ss"], "two-bit");
    assert_eq!(spec["depth"], 2);
}

#[test]
fn hybrid_replay_rejects_star_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.json",
        &json!({
            "master_seed": 1,
            "mode": {"montecarlo": {"trials": 10}},
            "target": {"kind": "star-reduction", "k": 2, "n": 16, "p_log_inv": 1, "sigma": 1, "t": 2, "collapse": "base"},
            "adversaries": [{"kind": "identity"}]
        }),
    );
    let o = nmcode(&["hybrid-replay", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ss-reduction"));
}

#[test]
fn hybrid_replay_on_desk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.json",
        &json!({
            "master_seed": 2,
            "mode": {"montecarlo": {"trials": 200}},
            "target": {"kind": "ss-reduction", "preset": "desk"},
            "adversaries": [{"kind": "identity"}, {"kind": "random-constant", "seed": 3}]
        }),
    );
    let o = nmcode(&["hybrid-replay", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for r in stdout_json(&o)["results"].as_array().unwrap() {
        assert!(r["mismatches"].as_object().unwrap().values().all(|c| c == 0));
    }
}

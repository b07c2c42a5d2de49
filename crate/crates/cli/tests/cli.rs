use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn incidence(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incidence")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = incidence(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stdout));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("incidence-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn divisor_interval() {
    let r = ok(&["proset", "intervals", "--family", "nstar_div", "--from", "3", "--to", "30"]);
    assert_eq!(r["result"]["interval"], serde_json::json!(["3", "6", "15", "30"]));
    assert_eq!(r["invocation"], "proset intervals --family nstar_div --from 3 --to 30");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn identity_squared_is_identity() {
    let id = r#"{"proset":"chain:3","ring":"F5","entries":[["0","0","1"],["1","1","1"],["2","2","1"]]}"#;
    let path = scratch("id.json", id);
    let p = path.to_str().unwrap();
    let r = ok(&["algebra", "mul", "--a", p, "--b", p]);
    let again = ok(&["algebra", "mul", "--a", id, "--b", id]);
    assert_eq!(r["result"], again["result"]);
    assert_eq!(r["result"]["entries"].as_array().unwrap().len(), 3);
    for e in r["result"]["entries"].as_array().unwrap() {
        assert_eq!(e[0], e[1]);
        assert_eq!(e[2], "1");
    }
}

#[test]
fn emitted_matrix_reads_back_identically() {
    let first = incidence(&["algebra", "random", "--proset", "two_block:2,2", "--ring", "Z/6", "--seed", "7"]);
    assert!(first.status.success());
    let path = scratch("random.json", std::str::from_utf8(&first.stdout).unwrap());
    let back = ok(&["algebra", "pow", "--a", path.to_str().unwrap(), "--exp", "1"]);
    let first: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(first["result"], back["result"]);
    let text = serde_json::to_string(&back["result"]).unwrap();
    let third = ok(&["algebra", "pow", "--a", &text, "--exp", "1"]);
    assert_eq!(serde_json::to_string(&third["result"]).unwrap(), text);
}

#[test]
fn emitted_proset_reads_back() {
    let info = ok(&["proset", "info", "--proset", "two_block:1,2"]);
    let text = serde_json::to_string(&info["result"]).unwrap();
    let again = ok(&["proset", "info", "--proset", &text]);
    assert_eq!(info["result"], again["result"]);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["group", "commutator", "--proset", "chain:3", "--ring", "F3", "--depth", "2", "--trials", "20", "--seed", "5"];
    assert_eq!(incidence(&args).stdout, incidence(&args).stdout);
    let a = incidence(&["scramble", "--proset", "chain:3", "--ring", "F2"]);
    let b = incidence(&["scramble", "--proset", "chain:3", "--ring", "F2", "--seed", "0"]);
    let (a, b): (Value, Value) = (serde_json::from_slice(&a.stdout).unwrap(), serde_json::from_slice(&b.stdout).unwrap());
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn scrambled_chain_is_recovered() {
    let scrambled = incidence(&["scramble", "--proset", "chain:3", "--ring", "F2", "--seed", "11"]);
    assert!(scrambled.status.success());
    let path = scratch("scrambled.json", std::str::from_utf8(&scrambled.stdout).unwrap());
    let rec = ok(&["recover", "--input", path.to_str().unwrap(), "--mode", "exhaustive"]);
    let recovered = serde_json::to_string(&rec["result"]["proset"]).unwrap();
    let iso = ok(&["proset", "iso", "--proset", &recovered, "--other", "chain:3"]);
    assert_eq!(iso["result"]["isomorphic"], true);
    assert_eq!(rec["result"]["relations"].as_array().unwrap().len(), 3);
}

#[test]
fn domain_errors_exit_one_with_name() {
    let out = incidence(&["group", "dickson", "--n", "2", "--q", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"], "HypothesisViolation");

    let out = incidence(&["recover", "--input", r#"{"proset":"full:2"}"#]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let out = incidence(&["recover", "--mode", "exhaustive"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--input"));
    let out = incidence(&["recover", "--input", "x", "--mode", "guess"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mode"));
}

#[test]
fn functor_commands() {
    let map = r#"{"domain":"chain:2","codomain":"chain:3","map":{"0":"1","1":"2"}}"#;
    let v = ok(&["functor", "validate", "--map", map]);
    assert_eq!(v["result"]["valid"], true);
    let m = r#"{"proset":"chain:3","ring":"F5","entries":[["0","0","1"],["1","1","2"],["2","2","3"],["1","2","4"],["0","2","1"]]}"#;
    let applied = ok(&["functor", "apply", "--map", map, "--matrix", m]);
    let entries = applied["result"]["entries"].as_array().unwrap();
    assert!(entries.contains(&serde_json::json!(["0", "1", "4"])));
    assert_eq!(entries.len(), 3);

    let bad = r#"{"domain":"chain:2","codomain":"chain:3","map":{"0":"0","1":"2"}}"#;
    let out = incidence(&["functor", "validate", "--map", bad]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiments_run() {
    let v = ok(&["experiment", "--config", r#"{"experiment":"dickson","n":2,"q":5,"seed":42}"#]);
    assert_eq!(v["result"]["seed"], 42);
    let v = ok(&["experiment", "--config", r#"{"experiment":"qz","proset":{"family":"Zig"},"ring":"F2","window":"-2..2","inner":"-1..1"}"#]);
    assert_eq!(v["result"]["report"]["surjective"], true);
    let v = ok(&["experiment", "--config", r#"{"experiment":"generation","proset":"chain:3"}"#]);
    assert_eq!(v["result"]["report"]["reassembles"], true);
}

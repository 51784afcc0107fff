use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    out: Value,
    raw: String,
}

fn twomark(args: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_twomark")).args(args).output().unwrap();
    let raw = String::from_utf8(o.stdout).unwrap();
    Run {
        code: o.status.code().unwrap(),
        out: serde_json::from_str(&raw).unwrap_or(Value::Null),
        raw,
    }
}

fn write(dir: &TempDir, name: &str, v: Value) -> String {
    let p: PathBuf = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn seven_cycle() -> Value {
    let edges: Vec<Value> = (0..7).map(|i| json!([i, (i + 1) % 7, 1])).collect();
    json!({"vertices": 7, "edges": edges, "marks": {"v": 0, "w": 1}})
}

#[test]
fn certify_seven_cycle() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", seven_cycle());
    let r = twomark(&["certify", "--graph", &g]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out["pass"], json!(true));
    assert_eq!(r.out["k"], json!(7));
    assert_eq!(r.out["max_inv_k"], json!(1));
    assert!(r.out.get("permutations").is_none());

    let dumped = twomark(&["certify", "--graph", &g, "--dump-perms"]);
    assert_eq!(dumped.out["permutations"].as_array().unwrap().len(), 7);
}

#[test]
fn certify_rejects_tree_and_small_cap() {
    let dir = TempDir::new().unwrap();
    let tree = write(&dir, "t.json", json!({"vertices": 3, "edges": [[0, 1, 1], [1, 2, 1]], "marks": {"v": 0, "w": 2}}));
    assert_eq!(twomark(&["certify", "--graph", &tree]).code, 2);
    let g = write(&dir, "g.json", seven_cycle());
    assert_eq!(twomark(&["certify", "--graph", &g, "--cap", "3"]).code, 2);
}

#[test]
fn non_submodular_tau_exits_one() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", json!({"vertices": 2, "edges": [[0, 1, 3]], "marks": {"v": 0, "w": 1}}));
    let r = twomark(&["certify", "--graph", &g]);
    assert_eq!(r.code, 1);
    assert_eq!(r.out["pass"], json!(false));
}

#[test]
fn demazure_idempotent_reflection() {
    let dir = TempDir::new().unwrap();
    let s = json!({"kind": "periodic", "period": 3, "values": [1, 0, 2]});
    let p1 = write(&dir, "p1.json", s.clone());
    let p2 = write(&dir, "p2.json", s.clone());
    let r = twomark(&["demazure", "--left", &p1, "--right", &p2, "--oracle"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out["product"], s);
    assert_eq!(r.out["oracle_agrees"], json!(true));
    assert_eq!(r.out["inv_k"], json!(1));
}

#[test]
fn chain_all_xi() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "c.json", json!({"loops": [{"l1": 1, "l2": 2}, {"l1": 1, "l2": 2}]}));
    let r = twomark(&["chain", "--spec", &spec, "--all-xi"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.out["k"], json!(3));
    assert_eq!(r.out["genus"], json!(2));
    let entries = r.out["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 9);
    assert!(entries.iter().all(|e| e["agrees"] == json!(true)));
}

#[test]
fn rank_reduce_and_degree_cap() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", seven_cycle());
    let d = write(&dir, "d.json", json!({"coeffs": {"3": 2}}));
    let r = twomark(&["rank", "--graph", &g, "--divisor", &d]);
    assert_eq!((r.code, r.out["rank"].clone()), (0, json!(1)));

    let red = twomark(&["reduce", "--graph", &g, "--divisor", &d, "--base", "0"]);
    assert_eq!(red.out["reduced"], json!({"0": 1, "6": 1}));
    let moved = write(&dir, "m.json", json!({"coeffs": {"2": 1, "4": 1, "0": -1}}));
    let red = twomark(&["reduce", "--graph", &g, "--divisor", &moved, "--base", "0"]);
    assert_eq!(red.out["reduced"], json!({"6": 1}));
    assert_eq!(red.out["effective"], json!(true));

    let big = write(&dir, "big.json", json!({"coeffs": {"0": 13}}));
    assert_eq!(twomark(&["rank", "--graph", &g, "--divisor", &big]).code, 2);
    assert_eq!(twomark(&["rank", "--graph", &g, "--divisor", &big, "--max-degree", "13"]).code, 0);
}

#[test]
fn tau_glue_splitting_bn() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", seven_cycle());
    let d = write(&dir, "d.json", json!({"coeffs": {"1": 1}}));
    let t = twomark(&["tau", "--graph", &g, "--divisor", &d]);
    assert_eq!(t.code, 0);
    assert_eq!(t.out["report"]["verdict"], json!("submodular"));
    assert_eq!(t.out["equations_hold"], json!(true));

    let zero = write(&dir, "z.json", json!({"coeffs": {}}));
    let gl = twomark(&[
        "glue", "--left", &g, "--right", &g, "--d1", &d, "--d2", &zero, "--verify-chaining",
    ]);
    assert_eq!(gl.code, 0, "{}", gl.raw);
    assert_eq!(gl.out["rank"], gl.out["direct_rank"]);
    assert_eq!(gl.out["chaining"]["tables_agree"], json!(true));

    let s = twomark(&["splitting", "--graph", &g, "--divisor", &d]);
    assert_eq!(s.code, 0);
    assert_eq!(s.out["splitting"]["kind"], json!("classified"));

    let bn = twomark(&["bn-check", "--graph", &g, "--divisor", &d]);
    assert_eq!(bn.code, 0, "{}", bn.raw);
    let neg = write(&dir, "n.json", json!({"coeffs": {"1": -1}}));
    assert_eq!(twomark(&["bn-check", "--graph", &g, "--divisor", &neg]).code, 1);
}

#[test]
fn output_is_deterministic_with_sorted_keys() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", seven_cycle());
    let a = twomark(&["certify", "--graph", &g, "--dump-perms"]).raw;
    let b = twomark(&["certify", "--graph", &g, "--dump-perms"]).raw;
    assert_eq!(a, b);
    let keys: Vec<&str> = a.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn text_format_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.json", seven_cycle());
    let r = twomark(&["certify", "--graph", &g, "--format", "text"]);
    assert_eq!(r.code, 0);
    assert!(r.raw.lines().any(|l| l == "pass: true"));
    assert_eq!(twomark(&["rank", "--graph", "/nonexistent.json", "--divisor", &g]).code, 2);
    assert_eq!(twomark(&["bogus"]).code, 2);
}

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpa")).args(args).output().expect("spawn hpa")
}

fn json(args: &[&str]) -> Value {
    let mut a = vec!["--output", "json"];
    a.extend_from_slice(args);
    let out = hpa(&a);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hpa-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn graph_info_text() {
    let out = hpa(&["graph-info"]);
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("hash 32f569d12ee52c62"));
    assert!(s.contains("delta^2 = 5/2 + (1/2)*s0 where s0=sqrt(13)"));
    assert!(s.contains("~ 2.074313293051942683461584650648540580301816086770307675446445"));
}

#[test]
fn loops_match_adjacency_power() {
    let v = json(&["loops", "--n", "4", "--shading", "+"]);
    assert_eq!(v["at_base"], 15);
    assert_eq!(v["adjacency_power"], "15");
    assert_eq!(v["loops"], 375);
}

#[test]
fn second_moment_is_the_norm() {
    let v = json(&["traces", "--max-k", "2"]);
    assert_eq!(v["moments"]["2"], v["norm"]);
    assert_eq!(v["moments"]["1"]["num"], "0");
}

#[test]
fn json_output_is_deterministic() {
    let a = hpa(&["--output", "json", "lowweight", "--max-n", "4"]);
    let b = hpa(&["--output", "json", "lowweight", "--max-n", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(serde_json::to_vec_pretty(&v).unwrap(), a.stdout.trim_ascii_end());
}

#[test]
fn report_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("hpa-cli-report-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("info.json");
    let to_file = hpa(&["--output", "json", "--report", p.to_str().unwrap(), "graph-info"]);
    assert_eq!(to_file.status.code(), Some(0));
    let direct = hpa(&["--output", "json", "graph-info"]);
    let written = std::fs::read(&p).unwrap();
    assert_eq!(written.trim_ascii_end(), direct.stdout.trim_ascii_end());
}

#[test]
fn seeded_axioms_pass() {
    let out = hpa(&["--seed", "7", "axioms", "--max-n", "2", "--count", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn graph_without_generator_exits_one() {
    let g = scratch(
        "edge.json",
        r#"{"vertices":[{"id":"p","parity":"even"},{"id":"q","parity":"odd"}],"edges":[{"id":"x","even":"p","odd":"q","mult":1}],"base":"p"}"#,
    );
    let out = hpa(&["--graph", g.to_str().unwrap(), "verify-all"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_input_exits_two() {
    let g = scratch("broken.json", "{\"vertices\": [");
    assert_eq!(hpa(&["--graph", g.to_str().unwrap(), "graph-info"]).status.code(), Some(2));
    let odd_base = scratch(
        "oddbase.json",
        r#"{"vertices":[{"id":"p","parity":"even"},{"id":"q","parity":"odd"}],"edges":[{"id":"x","even":"p","odd":"q","mult":1}],"base":"q"}"#,
    );
    assert_eq!(hpa(&["--graph", odd_base.to_str().unwrap(), "graph-info"]).status.code(), Some(2));
    let m = scratch("manifest.json", "{\"generator\": 3}");
    assert_eq!(hpa(&["--manifest", m.to_str().unwrap(), "verify-all"]).status.code(), Some(2));
    assert_eq!(hpa(&["--precision", "8", "graph-info"]).status.code(), Some(2));
    assert_eq!(hpa(&["--graph", "/nonexistent/graph.json", "graph-info"]).status.code(), Some(2));
}

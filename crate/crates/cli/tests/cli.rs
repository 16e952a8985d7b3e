mod common;

use std::fs;
use std::process::{Command, Output};

use common::factorial;
use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shufflegf"))
        .args(args)
        .output()
        .unwrap()
}

fn json_of(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn shuffle_of_a_with_itself() {
    assert_eq!(json_of(&["shuffle", "a", "a"]), json!(["~a a", "a ~a"]));
}

#[test]
fn factorial_equation_verifies() {
    let v = json_of(&["ode", "verify", "T = 1 + z*T + z^2*T'", "--max", "6"]);
    assert_eq!(v["result"], "PASS");
    assert_eq!(v["series"], json!([1, 1, 2, 6, 24, 120, 720]));
}

#[test]
fn prefix_walks() {
    let v = json_of(&["walks", "--mode", "prefix", "--max", "3"]);
    assert_eq!(v["counts"], json!([1, 2, 6, 18]));
    assert_eq!(v["closed_form"], v["counts"]);
}

#[test]
fn closed_walks() {
    let v = json_of(&["walks", "--mode", "closed", "--max", "6"]);
    assert_eq!(v["counts"], json!([1, 0, 2, 0, 10, 0, 70]));
    assert_eq!(v["convolution"], v["counts"]);
}

#[test]
fn grammar_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dyck.txt");
    fs::write(&path, "D -> _ | \"u\" D \"d\" D\n").unwrap();
    let arg = format!("@{}", path.display());
    let v = json_of(&["enumerate", &arg, "--max", "4", "--words"]);
    assert_eq!(v["counts"], json!([1, 0, 1, 0, 2]));
    assert_eq!(v["words"][4], json!(["u d u d", "u u d d"]));
    assert_eq!(json_of(&["class", &arg])["class"], "context-free");
    assert_eq!(json_of(&["deps", &arg])["acyclic"], true);
    assert_eq!(json_of(&["proper", &arg])["proper"], true);
}

#[test]
fn improper_grammar_is_reported() {
    let v = json_of(&["proper", "S -> S | \"a\""]);
    assert_eq!(v["proper"], false);
    assert_eq!(v["issues"][0]["kind"], "non-shrinking-cycle");
}

#[test]
fn large_numbers_are_strings() {
    let ones = format!("[{}]", vec!["1"; 25].join(","));
    let v = json_of(&["series", "laplace", &ones, "--role", "egf"]);
    assert_eq!(v["role"], "ogf");
    assert_eq!(v["coeffs"][18], json!(6402373705728000u64));
    assert_eq!(v["coeffs"][19], json!(factorial(19).to_string()));
}

#[test]
fn series_csv() {
    let out = run(&["series", "qinv", "[0,0,2,0,10]", "--csv"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "n,value\n0,1\n1,0\n2,2\n3,0\n4,14\n"
    );
}

#[test]
fn terminal_pointing() {
    assert_eq!(
        json_of(&["point", "--terminal", "a b"]),
        json!(["a' b", "a b'"])
    );
}

#[test]
fn closure_of_a_letter() {
    assert_eq!(
        json_of(&["closure", "a", "--max", "5"])["set"],
        json!([0, 1, 2, 6, 24, 120])
    );
}

#[test]
fn growth_of_powers() {
    let seq = format!(
        "[{}]",
        (0..30)
            .map(|n| (3u64.pow(n)).to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    let v = json_of(&["growth", &seq, "--window", "5:29"]);
    assert!((v["alpha"].as_f64().unwrap() - 3.0).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "S -> \"a\""]).status.code(), Some(2));
    assert_eq!(run(&["series", "qinv", "[1,2]"]).status.code(), Some(1));
    assert_eq!(
        run(&["ode", "compile", "T = 1 + T'"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["enumerate", "S -> A", "--max", "2"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["class", "@/nonexistent/grammar"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["growth", "[1,2,3]", "--window", "x"]).status.code(),
        Some(1)
    );
    let out = run(&["series", "qinv", "[1,2]"]);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero constant term"));
}

#[test]
fn ode_split_and_compile() {
    let out = run(&["ode", "split", "T = 1 - z*T"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "P = 1 + z*N\nN = z*P\n"
    );
    let v = json_of(&["ode", "compile", "T = 1 + z*T + z^2*T'"]);
    assert_eq!(
        v["P"],
        "P -> _ | \"[x1_0]\" P | \"[x2_0] [x2_1]\" point(P)\n"
    );
}

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use tempfile::TempDir;

fn bounce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bounce")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn save(dir: &Path, name: &str, p: &bounce_core::LabeledPolygon) -> PathBuf {
    let path = dir.join(name);
    p.save(&path).unwrap();
    path
}

#[test]
fn sturmian_three_halves() {
    let o = bounce(&["sturmian", "--p", "3", "--q", "2", "--insertions"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "0010100101\ninsertions: - B A - B A\nlengths: 0 1 1 0 1 1\ntotal: 4\n"
    );
}

#[test]
fn json_output_parses() {
    let o = bounce(&["--json", "sturmian", "--p", "3", "--q", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["word"], "0010100101");
}

#[test]
fn square_language_to_length_two() {
    let dir = TempDir::new().unwrap();
    let t = save(dir.path(), "sq.json", &square());
    let o = bounce(&["--quiet", "language", "--table", t.to_str().unwrap(), "--max-len", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.iter().filter(|l| !l.contains(',')).count(), 4);
    assert_eq!(lines.iter().filter(|l| l.contains(',')).count(), 12);
    assert!(!lines.contains(&"A,A"));
}

#[test]
fn rhombus_acute_corner_is_exact() {
    let dir = TempDir::new().unwrap();
    let t = save(dir.path(), "r.json", &rhombus());
    let o = bounce(&["angle", "--table", t.to_str().unwrap(), "--pair", "A,B"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "exact_rational 1/3 → π/3 (certified to depth 6)\nvalue: 1.047197551197\n"
    );
}

#[test]
fn trace_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let t = save(dir.path(), "r.json", &rhombus());
    let args = ["trace", "--table", t.to_str().unwrap(), "--point", "0.7,0.3", "--angle", "0.4", "--bounces", "5"];
    let (a, b) = (bounce(&args), bounce(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("word: A,B,A,D,C\n"));
}

#[test]
fn square_words_persist() {
    let dir = TempDir::new().unwrap();
    let t = save(dir.path(), "sq.json", &square());
    let words = dir.path().join("words.txt");
    std::fs::write(&words, "A,B\nB,D\nA,C,A\n").unwrap();
    let o = bounce(&[
        "perturb", "--table", t.to_str().unwrap(), "--words", words.to_str().unwrap(), "--count", "50",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("result: PASSED"));
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(bounce(&[]).status.code(), Some(2));
    assert_eq!(bounce(&["sturmian", "--p", "x", "--q", "2"]).status.code(), Some(2));
    // domain errors
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(bounce(&["trace", "--table", missing.to_str().unwrap(), "--point", "0.5,0.5", "--angle", "1", "--bounces", "3"]).status.code(), Some(1));
    let t = save(dir.path(), "sq.json", &square());
    let o = bounce(&["develop", "--table", t.to_str().unwrap(), "--word", "A,A"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(bounce(&["sturmian", "--p", "2", "--q", "4"]).status.code(), Some(1));
    assert_eq!(bounce(&["--help"]).status.code(), Some(0));
}

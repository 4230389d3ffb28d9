use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lea_core::decide::VerdictJson;
use lea_core::kripke::model_from_json;
use tempfile::TempDir;

fn lea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lea")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path: PathBuf = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

struct Fixture {
    _dir: TempDir,
    m: String,
    n: String,
    bad: String,
}

fn fixture() -> Fixture {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.json", r#"{"worlds":["s"],"rel":[["s","s"]],"val":{"p":["s"]}}"#);
    let n = write(dir.path(), "n.json", r#"{"worlds":["t"],"rel":[],"val":{"p":["t"]}}"#);
    let bad = write(dir.path(), "bad.json", "{");
    Fixture { _dir: dir, m, n, bad }
}

#[test]
fn check_exits_zero_when_true() {
    let fx = fixture();
    assert_eq!(code(&lea(&["check", &fx.m, "s", "o p"])), 0);
    assert_eq!(code(&lea(&["check", &fx.m, "s", "~p"])), 1);
}

#[test]
fn bisim_flavours() {
    let fx = fixture();
    assert_eq!(code(&lea(&["bisim", &fx.m, "s", &fx.n, "t", "--circ"])), 0);
    assert_eq!(code(&lea(&["bisim", &fx.m, "s", &fx.n, "t", "--box"])), 1);
}

#[test]
fn define_symmetric() {
    let out = lea(&["define", "symmetric", "p -> o(o ~p -> p)", "--max-n", "4"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("Confirmed up to n=4"));
}

#[test]
fn usage_errors_exit_two() {
    let fx = fixture();
    assert_eq!(code(&lea(&["check", &fx.bad, "s", "p"])), 2);
    assert_eq!(code(&lea(&["check", &fx.m, "s", "p &"])), 2);
    assert_eq!(code(&lea(&["check", &fx.m, "nowhere", "p"])), 2);
    assert_eq!(code(&lea(&["--frob"])), 2);
    assert_eq!(code(&lea(&["valid", "p"])), 2);
}

#[test]
fn formula_from_file() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "f.txt", "o p\n");
    assert_eq!(code(&lea(&["check", &fx.m, "s", &format!("@{path}")])), 0);
}

#[test]
fn unknown_verdict_exits_one() {
    let out = lea(&["valid", "o T", "--class", "TB"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("unknown"));
}

#[test]
fn generated_proof_checks() {
    let dir = TempDir::new().unwrap();
    let out = lea(&["gen-proof", "4"]);
    assert_eq!(code(&out), 0);
    let path = write(dir.path(), "proof.txt", &stdout(&out));
    assert_eq!(code(&lea(&["prove", "K", &path])), 0);
    let broken = stdout(&out).replacen("o p", "o ~p", 1);
    let path = write(dir.path(), "broken.txt", &broken);
    assert_eq!(code(&lea(&["prove", "K", &path])), 1);
}

#[test]
fn scan_and_translate() {
    assert_eq!(code(&lea(&["scan", "KB", "KB", "--max-n", "3"])), 0);
    assert_eq!(code(&lea(&["scan", "KB", "K", "--max-n", "2"])), 1);
    let out = lea(&["translate", "to-ml", "o p"]);
    assert_eq!(stdout(&out).trim(), "p -> []p");
    let out = lea(&["translate", "to-lea", "[] p"]);
    assert_eq!(stdout(&out).trim(), "o p & p");
}

#[test]
fn output_is_deterministic() {
    let fx = fixture();
    let runs: [&[&str]; 4] = [
        &["--json", "sat", "A p & o q", "--class", "S4"],
        &["crosscheck", "--count", "20"],
        &["--json", "contract", &fx.m],
        &["valid", "p -> o (o ~p -> p)", "--class", "K"],
    ];
    for args in runs {
        let a = lea(args);
        let b = lea(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(code(&a), code(&b));
    }
}

#[test]
fn json_round_trips() {
    let out = lea(&["--json", "valid", "p -> o (o ~p -> p)", "--class", "K"]);
    assert_eq!(code(&out), 1);
    let v: VerdictJson = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v.answer, Some(false));
    let witness = serde_json::to_string(v.witness.as_ref().unwrap()).unwrap();
    let (m, point) = model_from_json(&witness).unwrap();
    assert_eq!(m.len(), 2);
    assert!(point.is_some());
    let reparsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(serde_json::to_value(&v).unwrap(), reparsed);

    let fx = fixture();
    let out = lea(&["--json", "check", &fx.m, "s", "o p"]);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["answer"], true);
}

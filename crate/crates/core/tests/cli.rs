mod common;

use std::process::Command;

use ltlground::cli;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = cli::run(std::iter::once("ltlground").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ltlground");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["parse", "& F a G b", "--to", "infix"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "F(a) & G(b)");
    let bad = status(&["parse", "& F a"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(bad.stdout.is_empty());
    assert!(String::from_utf8_lossy(&bad.stderr).contains('{'), "errors are logged as JSON");
    assert_eq!(status(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(status(&["--help"]).status.code(), Some(0));
}

#[test]
fn parse_and_equivalence() {
    assert_eq!(run(&["parse", "--infix", "a U b W c"]), (0, "U a W b c\n".into()));
    let (code, out) = run(&["parse", "F a", "--to", "json"]);
    assert_eq!(code, 0);
    assert!(serde_json::from_str::<Value>(&out).is_ok());
    assert_eq!(run(&["check-equiv", "F a", "! G ! a"]), (0, "EQUIVALENT\n".into()));
    let (code, out) = run(&["check-equiv", "--infix", "F a", "G a"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("NOT EQUIVALENT"));
    let trace: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(trace["cycle"].is_array());
}

#[test]
fn templates_and_corpus_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    let (code, out) = run(&["--out-dir", d, "templates", "--check"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("pairwise inequivalent"));
    let templates: Vec<Value> = serde_json::from_str(&std::fs::read_to_string(dir.path().join("templates.json")).unwrap()).unwrap();
    assert_eq!(templates.len(), 47);

    let (code, out) = run(&["--out-dir", d, "gen-dataset", "--scope", "within-sample", "--cap", "3"]);
    assert_eq!(code, 0, "{out}");
    let lifted = dir.path().join("lifted.jsonl");
    assert!(lifted.exists());

    let (code, out) = run(&["--out-dir", d, "split", "--input", path(&lifted), "--regime", "formula", "--folds", "3"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("fold ")).count(), 3);
    assert!(dir.path().join("fold_0_test.jsonl").exists());

    let (code, out) = run(&["stats", "--seeds-only"]);
    assert_eq!(code, 0);
    let stats: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(stats["distinct_skeletons"], 47);

    assert_eq!(run(&["split", "--input", path(&lifted), "--regime", "sideways"]).0, 2);
}

#[test]
fn plan_prints_walks_and_unsat() {
    let map = common::data_dir().join("maps/env1.json");
    let (code, out) = run(&["plan", "--map", path(&map), "--ltl", "& F kitchen_counter G ! kitchen_counter"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("UNSAT: "), "{out}");
    let (code, out) = run(&["plan", "--map", path(&map), "--ltl", "F kitchen_counter", "--json"]);
    assert_eq!(code, 0);
    assert!(serde_json::from_str::<Value>(&out).is_ok());
    assert_eq!(run(&["plan", "--map", path(&map), "--ltl", "F spaceship"]).0, 1);
}

#[test]
fn eval_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("gold.jsonl");
    let pred = dir.path().join("pred.jsonl");
    std::fs::write(
        &gold,
        "{\"utterance\":\"go to A\",\"ltl_prefix\":\"F A\",\"template_id\":\"visit_1\",\"props\":[\"A\"],\"origin\":\"seed\"}\n\
         {\"utterance\":\"avoid B\",\"ltl_prefix\":\"G ! B\",\"template_id\":\"global_avoidance_1\",\"props\":[\"B\"],\"origin\":\"seed\"}\n",
    )
    .unwrap();
    std::fs::write(&pred, "{\"prediction\":\"! G ! A\"}\n{\"prediction\":\"F B\"}\n").unwrap();
    let d = path(dir.path());
    let (code, out) = run(&["--out-dir", d, "eval", "--gold", path(&gold), "--pred", path(&pred)]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("accuracy 0.5000 (1/2)"), "{out}");
    assert!(dir.path().join("errors.csv").exists());
    let (code, out) = run(&["--out-dir", d, "eval", "--gold", path(&gold), "--pred", path(&pred), "--mode", "exact"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("accuracy 0.0000"), "{out}");
    std::fs::write(&pred, "{\"prediction\":\"F A\"}\n").unwrap();
    assert_eq!(run(&["eval", "--gold", path(&gold), "--pred", path(&pred)]).0, 1);
}

#[test]
fn decode_random_is_seeded() {
    let (code, a) = run(&["--seed", "7", "decode", "--random", "20", "--props", "a,b,c"]);
    assert_eq!(code, 0);
    assert_eq!(a.lines().count(), 20);
    assert!(!a.contains("INVALID"));
    assert_eq!(run(&["--seed", "7", "decode", "--random", "20", "--props", "a,b,c"]).1, a);
    assert_eq!(run(&["decode"]).0, 2);
}

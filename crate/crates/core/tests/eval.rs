use std::collections::BTreeMap;

use ltlground::dataset::{Origin, Sample};
use ltlground::eval::{rer_reg_scores, score, score_one, ErrorCategory, EvalMode, ReRecord};
use ltlground::ltl::{parse_prefix, Prop};
use ltlground::patterns::PatternTemplate;

fn sample(u: &str, f: &str, t: &str) -> Sample {
    Sample::new(u, parse_prefix(f).unwrap(), PatternTemplate::from_id(t), Origin::Seed).unwrap()
}

#[test]
fn modes_differ_on_rewrites() {
    let gold = parse_prefix("& F a F b").unwrap();
    let s = score_one(&gold, "& F b F a", EvalMode::SemanticEquivalence);
    assert!(s.correct && s.category.is_none());
    let s = score_one(&gold, "& F b F a", EvalMode::ExactMatch);
    assert!(!s.correct);
    assert_eq!(s.category, Some(ErrorCategory::IncorrectPermutation));
    assert!(score_one(&gold, "  &  F a   F b ", EvalMode::ExactMatch).correct);
    assert_eq!(score_one(&gold, "& F a", EvalMode::SemanticEquivalence).category, Some(ErrorCategory::SyntaxError));
}

#[test]
fn report_breakdowns_and_files() {
    let pairs = vec![
        (sample("go to A", "F A", "visit_1"), "F A".to_string()),
        (sample("go to A and B", "& F A F B", "visit_2"), "& F B F A".to_string()),
        (sample("go to B and A", "& F B F A", "visit_2"), "F B".to_string()),
        (sample("A then B", "F & A F B", "sequence_visit_2"), "F & B F A".to_string()),
        (sample("avoid A", "G ! A", "global_avoidance_1"), "G !".to_string()),
    ];
    let report = score(&pairs, EvalMode::SemanticEquivalence);
    assert_eq!((report.overall.correct, report.overall.total), (2, 5));
    assert_eq!(report.per_template["visit_2"].correct, 1);
    assert_eq!(report.per_prop_count[&2].total, 3);
    assert_eq!(report.errors[&ErrorCategory::SyntaxError], 1);
    assert_eq!(report.errors[&ErrorCategory::MisclassifiedType], 1);
    assert_eq!(report.errors[&ErrorCategory::IncorrectPermutation], 1);
    assert_eq!(report.errors.len(), 5);

    let dir = tempfile::tempdir().unwrap();
    report.write_outputs(dir.path()).unwrap();
    for f in ["report.json", "per_template.csv", "per_prop_count.csv", "errors.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("per_template.csv")).unwrap();
    assert!(csv.starts_with("template,correct,total,accuracy\n"));
    assert!(csv.contains("visit_2,1,2,0.500000\n"));
    assert!(!dir.path().join("reg_by_length.csv").exists());
}

#[test]
fn recognition_and_grounding_rates() {
    let key = |s: &str| Prop::new(s).unwrap();
    let records = vec![
        ReRecord {
            gold_res: vec!["the bank".into(), "the store on Main Street".into()],
            predicted_res: vec!["the store on Main Street".into(), "the bank".into()],
            gold_keys: BTreeMap::from([("the bank".into(), key("chase")), ("the store on Main Street".into(), key("walmart"))]),
            predicted_keys: BTreeMap::from([("the bank".into(), key("chase")), ("the store on Main Street".into(), key("cvs"))]),
        },
        ReRecord {
            gold_res: vec!["the park".into()],
            predicted_res: vec!["park".into()],
            gold_keys: BTreeMap::from([("the park".into(), key("boston_common"))]),
            predicted_keys: BTreeMap::new(),
        },
    ];
    let r = rer_reg_scores(&records);
    assert_eq!((r.rer.correct, r.rer.total), (1, 2));
    assert_eq!(r.rer_by_count[&2].correct, 1);
    assert_eq!((r.reg.correct, r.reg.total), (1, 3));
    // "the bank" and "the park" are 8 characters, the street one 24
    assert_eq!(r.reg_by_length[&0].total, 2);
    assert_eq!(r.reg_by_length[&20].correct, 0);
}

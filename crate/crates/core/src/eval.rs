//! Accuracy metrics, per-template and per-proposition-count breakdowns, the
//! five-way error taxonomy, and recognition/grounding scores.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton;
use crate::dataset::Sample;
use crate::ltl::{parse_prefix, Formula, LtlError, Prop};
use crate::patterns::{classify, Classification};

/// Width, in characters, of the referring-expression length buckets.
pub const RE_LENGTH_BUCKET: usize = 10;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{gold} gold samples but {predicted} predictions")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Prefix token sequences must be identical.
    ExactMatch,
    /// Prediction and gold must accept the same language.
    SemanticEquivalence,
}

impl EvalMode {
    pub fn from_name(s: &str) -> Option<EvalMode> {
        match s {
            "exact" | "exact_match" => Some(EvalMode::ExactMatch),
            "semantic" | "semantic_equivalence" => Some(EvalMode::SemanticEquivalence),
            _ => None,
        }
    }
}

/// Why a prediction is wrong. When several apply, the first in declaration
/// order wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorCategory {
    /// Not a valid prefix formula.
    SyntaxError,
    /// A recognizable template, but not the gold one.
    MisclassifiedType,
    /// The number of distinct propositions differs from the gold formula.
    IncorrectPropositions,
    /// The gold template and proposition count, with propositions in the wrong places.
    IncorrectPermutation,
    /// Matches no catalog template.
    UnknownTemplate,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 5] = [
        ErrorCategory::SyntaxError,
        ErrorCategory::MisclassifiedType,
        ErrorCategory::IncorrectPropositions,
        ErrorCategory::IncorrectPermutation,
        ErrorCategory::UnknownTemplate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorCategory::SyntaxError => "SyntaxError",
            ErrorCategory::MisclassifiedType => "MisclassifiedType",
            ErrorCategory::IncorrectPropositions => "IncorrectPropositions",
            ErrorCategory::IncorrectPermutation => "IncorrectPermutation",
            ErrorCategory::UnknownTemplate => "UnknownTemplate",
        }
    }
}

// classification failures (automaton budget) count as unknown
fn classify_or_unknown(f: &Formula) -> Classification {
    classify(f).unwrap_or(Classification::Unknown)
}

/// Category of an incorrect prediction. The caller decides incorrectness;
/// this only applies the cascade syntax > type > propositions > permutation > unknown.
pub fn categorize_error(gold: &Formula, pred: &Result<Formula, LtlError>) -> ErrorCategory {
    let pred = match pred {
        Err(_) => return ErrorCategory::SyntaxError,
        Ok(p) => p,
    };
    let gold_class = classify_or_unknown(gold);
    let pred_class = classify_or_unknown(pred);
    if let Classification::Known(t) = pred_class {
        if gold_class != Classification::Known(t) {
            return ErrorCategory::MisclassifiedType;
        }
    }
    if pred.props().len() != gold.props().len() {
        return ErrorCategory::IncorrectPropositions;
    }
    match pred_class {
        Classification::Known(_) => ErrorCategory::IncorrectPermutation,
        Classification::Unknown => ErrorCategory::UnknownTemplate,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl Accuracy {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += ok as usize;
        self.accuracy = self.correct as f64 / self.total as f64;
    }
}

/// Outcome for one prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scored {
    pub correct: bool,
    pub category: Option<ErrorCategory>,
}

pub fn score_one(gold: &Formula, predicted: &str, mode: EvalMode) -> Scored {
    let parsed = parse_prefix(predicted);
    let correct = match (&parsed, mode) {
        (Err(_), _) => false,
        (Ok(_), EvalMode::ExactMatch) => {
            predicted.split_whitespace().eq(crate::ltl::print_prefix(gold).split(' '))
        }
        // too large to decide counts as wrong
        (Ok(p), EvalMode::SemanticEquivalence) => automaton::equivalent(gold, p).unwrap_or(false),
    };
    let category = (!correct).then(|| categorize_error(gold, &parsed));
    Scored { correct, category }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub overall: Accuracy,
    pub per_template: BTreeMap<String, Accuracy>,
    pub per_prop_count: BTreeMap<usize, Accuracy>,
    /// Counts over incorrect predictions; every category is present.
    pub errors: BTreeMap<ErrorCategory, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<ReReport>,
}

/// Scores `(gold, predicted prefix text)` pairs. Malformed predictions are
/// scored as syntax errors, never rejected.
pub fn score(predictions: &[(Sample, String)], mode: EvalMode) -> EvalReport {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(predictions.len().max(1));
    let chunk = predictions.len().div_ceil(threads).max(1);
    let scored: Vec<Scored> = std::thread::scope(|s| {
        let handles: Vec<_> = predictions
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|(g, p)| score_one(&g.formula, p, mode)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("scoring thread panicked")).collect()
    });

    let mut report = EvalReport {
        mode,
        overall: Accuracy::default(),
        per_template: BTreeMap::new(),
        per_prop_count: BTreeMap::new(),
        errors: ErrorCategory::ALL.iter().map(|&c| (c, 0)).collect(),
        re: None,
    };
    for ((gold, _), s) in predictions.iter().zip(&scored) {
        report.overall.add(s.correct);
        report.per_template.entry(gold.template_id.clone()).or_default().add(s.correct);
        report.per_prop_count.entry(gold.prop_count()).or_default().add(s.correct);
        if let Some(c) = s.category {
            *report.errors.get_mut(&c).expect("all categories present") += 1;
        }
    }
    report
}

/// Gold and predicted referring expressions and groundings for one command.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReRecord {
    pub gold_res: Vec<String>,
    pub predicted_res: Vec<String>,
    pub gold_keys: BTreeMap<String, Prop>,
    #[serde(default)]
    pub predicted_keys: BTreeMap<String, Prop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReReport {
    /// Whole-command set match of recognized expressions.
    pub rer: Accuracy,
    pub rer_by_count: BTreeMap<usize, Accuracy>,
    /// Per gold expression: grounded to the gold key.
    pub reg: Accuracy,
    /// Keyed by the bucket's lower bound in characters.
    pub reg_by_length: BTreeMap<usize, Accuracy>,
}

pub fn rer_reg_scores(records: &[ReRecord]) -> ReReport {
    let mut out = ReReport {
        rer: Accuracy::default(),
        rer_by_count: BTreeMap::new(),
        reg: Accuracy::default(),
        reg_by_length: BTreeMap::new(),
    };
    for r in records {
        let gold: BTreeSet<&str> = r.gold_res.iter().map(String::as_str).collect();
        let pred: BTreeSet<&str> = r.predicted_res.iter().map(String::as_str).collect();
        out.rer.add(gold == pred);
        out.rer_by_count.entry(gold.len()).or_default().add(gold == pred);
        for (re, key) in &r.gold_keys {
            let ok = r.predicted_keys.get(re) == Some(key);
            out.reg.add(ok);
            let bucket = re.chars().count() / RE_LENGTH_BUCKET * RE_LENGTH_BUCKET;
            out.reg_by_length.entry(bucket).or_default().add(ok);
        }
    }
    out
}

fn write_table<K: ToString>(path: &Path, key: &str, rows: &BTreeMap<K, Accuracy>) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([key, "correct", "total", "accuracy"])?;
    for (k, a) in rows {
        w.write_record([k.to_string(), a.correct.to_string(), a.total.to_string(), format!("{:.6}", a.accuracy)])?;
    }
    w.flush()?;
    Ok(())
}

impl EvalReport {
    /// Writes `report.json` and one CSV per breakdown into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), EvalError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)? + "\n")?;
        write_table(&dir.join("per_template.csv"), "template", &self.per_template)?;
        write_table(&dir.join("per_prop_count.csv"), "props", &self.per_prop_count)?;
        let mut w = csv::Writer::from_path(dir.join("errors.csv"))?;
        w.write_record(["category", "count"])?;
        for (c, n) in &self.errors {
            w.write_record([c.name().to_string(), n.to_string()])?;
        }
        w.flush()?;
        if let Some(re) = &self.re {
            write_table(&dir.join("rer_by_count.csv"), "res", &re.rer_by_count)?;
            write_table(&dir.join("reg_by_length.csv"), "length_from", &re.reg_by_length)?;
        }
        Ok(())
    }
}

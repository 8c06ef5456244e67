//! Lifted and grounded corpora: JSON Lines I/O, permutation augmentation,
//! holdout splits, statistics and landmark substitution.

mod split;

pub use split::{make_split, skeleton_classes, train_test, Regime, SplitSpec};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{self, AutomatonError};
use crate::grounding::SemanticDB;
use crate::ltl::{prefix_serde, print_prefix, skeletonize, substitute, Formula, LtlError, Prop, Renaming, Skeleton};
use crate::patterns::{Family, PatternTemplate};

/// The shipped seed corpus of lifted commands over placeholders `A`..`E`.
pub const SEED_CORPUS: &str = include_str!("../../data/lifted_seed.jsonl");

const RAW_PREFIX: &str = "raw:";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("proposition `{prop}` of the formula does not occur in `{utterance}`")]
    PlaceholderMismatch { utterance: String, prop: String },
    #[error("{needed} propositions cannot be renamed injectively into a vocabulary of {available}")]
    VocabularyTooSmall { needed: usize, available: usize },
    #[error("{classes} classes cannot fill {folds} folds")]
    TooFewClasses { classes: usize, folds: usize },
    #[error("a split needs at least 2 folds, got {0}")]
    InvalidFolds(usize),
    #[error("referring-expression bank is empty")]
    EmptyReBank,
    #[error("landmark `{0}` has no referring expressions or no database entry")]
    MissingLandmark(String),
    #[error("sample needs {needed} landmarks, only {available} are usable")]
    NotEnoughLandmarks { needed: usize, available: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sample `{utterance}`: {message}")]
    Invalid { utterance: String, message: String },
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Seed,
    Permuted,
    Grounded,
}

/// One utterance–formula pair. On disk: `utterance`, `ltl_prefix`,
/// `template_id`, `props`, `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub utterance: String,
    #[serde(rename = "ltl_prefix", with = "prefix_serde")]
    pub formula: Formula,
    /// A catalog template id, or `raw:` followed by the skeleton's prefix text.
    pub template_id: String,
    /// Distinct propositions in first-occurrence order.
    pub props: Vec<Prop>,
    pub origin: Origin,
}

impl Sample {
    pub fn new(utterance: &str, formula: Formula, template: Option<PatternTemplate>, origin: Origin) -> Result<Self, DatasetError> {
        let template_id = match template {
            Some(t) => t.id(),
            None => format!("{RAW_PREFIX}{}", print_prefix(skeletonize(&formula)?.0.formula())),
        };
        let props = formula.props_in_order();
        Ok(Sample { utterance: utterance.to_string(), formula, template_id, props, origin })
    }

    pub fn prop_count(&self) -> usize {
        self.props.len()
    }

    pub fn skeleton(&self) -> Skeleton {
        skeletonize(&self.formula).expect("samples have at most 5 propositions").0
    }

    pub fn template(&self) -> Option<PatternTemplate> {
        PatternTemplate::from_id(&self.template_id)
    }

    pub fn family(&self) -> Option<Family> {
        self.template().map(|t| t.family)
    }

    pub fn prefix(&self) -> String {
        print_prefix(&self.formula)
    }

    /// Checks the stored fields against the formula: proposition list and
    /// count, and the template's language up to renaming.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |message: String| DatasetError::Invalid { utterance: self.utterance.clone(), message };
        if self.props != self.formula.props_in_order() {
            return Err(bad("props do not list the formula's propositions in order".into()));
        }
        if !(1..=5).contains(&self.props.len()) {
            return Err(bad(format!("{} propositions, expected 1 to 5", self.props.len())));
        }
        let skeleton = self.skeleton();
        let expected = match self.template() {
            Some(t) => {
                if t.prop_count() != self.props.len() {
                    return Err(bad(format!("template {} takes {} propositions", self.template_id, t.prop_count())));
                }
                t.skeleton()
            }
            None => {
                let raw = self
                    .template_id
                    .strip_prefix(RAW_PREFIX)
                    .ok_or_else(|| bad(format!("unknown template id `{}`", self.template_id)))?;
                skeletonize(&crate::ltl::parse_prefix(raw)?)?.0
            }
        };
        if skeleton != expected && !automaton::equivalent(skeleton.formula(), expected.formula())? {
            return Err(bad(format!("formula is not an instance of {}", self.template_id)));
        }
        Ok(())
    }
}

pub fn parse_jsonl(text: &str) -> Result<Vec<Sample>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() }))
        .collect()
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Sample>, DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| DatasetError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, samples: &[Sample]) -> Result<(), DatasetError> {
    let file = std::fs::File::create(path).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    for s in samples {
        serde_json::to_writer(&mut w, s).map_err(|e| DatasetError::Io(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| DatasetError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| DatasetError::Io(e.to_string()))
}

pub fn seed_corpus() -> Vec<Sample> {
    parse_jsonl(SEED_CORPUS).expect("shipped seed corpus parses")
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Whole-word occurrences of `word` in `text`.
pub fn contains_word(text: &str, word: &str) -> bool {
    text.split(|c: char| !is_word_char(c)).any(|w| w == word)
}

/// Simultaneous whole-word replacement.
pub fn replace_words(text: &str, map: &BTreeMap<&str, &str>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        out.push_str(map.get(word.as_str()).copied().unwrap_or(word));
        word.clear();
    };
    for c in text.chars() {
        if is_word_char(c) {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

fn check_placeholders(s: &Sample) -> Result<(), DatasetError> {
    for p in &s.props {
        if !contains_word(&s.utterance, p.as_str()) {
            return Err(DatasetError::PlaceholderMismatch { utterance: s.utterance.clone(), prop: p.to_string() });
        }
    }
    Ok(())
}

/// Renames propositions consistently in the utterance and the formula.
pub fn rename_sample(s: &Sample, map: &Renaming, origin: Origin) -> Result<Sample, DatasetError> {
    let words: BTreeMap<&str, &str> = map.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    let formula = substitute(&s.formula, map)?;
    Ok(Sample {
        utterance: replace_words(&s.utterance, &words),
        props: formula.props_in_order(),
        formula,
        template_id: s.template_id.clone(),
        origin,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermutationScope {
    /// Every injective renaming into this vocabulary.
    Vocabulary(Vec<Prop>),
    /// Only reorderings of the sample's own propositions (`k!` variants).
    WithinSample,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentOptions {
    pub scope: PermutationScope,
    /// Maximum samples emitted per input sample, the input included.
    pub cap: Option<usize>,
    /// Drop repeated `(utterance, prefix)` pairs.
    pub dedup: bool,
}

pub fn placeholder_vocabulary() -> Vec<Prop> {
    crate::grounding::PLACEHOLDERS.iter().map(|p| Prop::new(*p).expect("valid")).collect()
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions { scope: PermutationScope::Vocabulary(placeholder_vocabulary()), cap: None, dedup: true }
    }
}

/// Ordered `k`-tuples of distinct indices below `n`, lexicographically.
fn arrangements(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(n, k, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Each input sample followed by its consistent proposition renamings.
pub fn permute_augment(samples: &[Sample], opts: &AugmentOptions) -> Result<Vec<Sample>, DatasetError> {
    let mut out = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut emit = |s: Sample, out: &mut Vec<Sample>| {
        if !opts.dedup || seen.insert((s.utterance.clone(), s.prefix())) {
            out.push(s);
        }
    };
    for s in samples {
        check_placeholders(s)?;
        let targets: Vec<Prop> = match &opts.scope {
            PermutationScope::Vocabulary(v) => v.clone(),
            PermutationScope::WithinSample => s.props.clone(),
        };
        let k = s.props.len();
        if k > targets.len() {
            return Err(DatasetError::VocabularyTooSmall { needed: k, available: targets.len() });
        }
        let limit = opts.cap.unwrap_or(usize::MAX);
        let mut emitted = 1;
        emit(s.clone(), &mut out);
        for arr in arrangements(targets.len(), k) {
            if emitted >= limit {
                break;
            }
            let map: Renaming = s.props.iter().cloned().zip(arr.iter().map(|&j| targets[j].clone())).collect();
            if map.iter().all(|(a, b)| a == b) {
                continue;
            }
            emit(rename_sample(s, &map, Origin::Permuted)?, &mut out);
            emitted += 1;
        }
    }
    Ok(out)
}

/// True iff no grounded proposition occurs on both sides.
pub fn vocabulary_disjointness(train: &[Sample], test: &[Sample]) -> bool {
    let train_vocab: HashSet<&Prop> = train.iter().flat_map(|s| &s.props).collect();
    test.iter().flat_map(|s| &s.props).all(|p| !train_vocab.contains(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = usize>) -> Option<Summary> {
        let (mut min, mut max, mut sum, mut n) = (usize::MAX, 0, 0usize, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
        (n > 0).then(|| Summary { min, max, mean: sum as f64 / n as f64 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub count: usize,
    pub distinct_formulas: usize,
    pub distinct_skeletons: usize,
    pub props: Option<Summary>,
    /// Prefix token count.
    pub length: Option<Summary>,
    pub vocabulary_size: usize,
}

pub fn corpus_stats(samples: &[Sample]) -> CorpusStats {
    let prefixes: Vec<String> = samples.iter().map(Sample::prefix).collect();
    let distinct_formulas = prefixes.iter().collect::<HashSet<_>>().len();
    let distinct_skeletons = samples.iter().map(Sample::skeleton).collect::<HashSet<_>>().len();
    CorpusStats {
        count: samples.len(),
        distinct_formulas,
        distinct_skeletons,
        props: Summary::of(samples.iter().map(Sample::prop_count)),
        length: Summary::of(prefixes.iter().map(|p| p.split(' ').count())),
        vocabulary_size: samples.iter().flat_map(|s| &s.props).collect::<BTreeSet<_>>().len(),
    }
}

/// Landmark key to referring expressions for it.
pub type ReBank = BTreeMap<Prop, Vec<String>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    /// Ground only this many lifted samples, drawn without replacement.
    pub sample_size: Option<usize>,
    pub seed: u64,
}

/// Substitutes each sample's placeholders with distinct landmarks drawn from
/// the bank: the utterance gets one of the landmark's referring expressions,
/// the formula gets its key.
pub fn ground_corpus(lifted: &[Sample], bank: &ReBank, db: &SemanticDB, opts: GroundOptions) -> Result<Vec<Sample>, DatasetError> {
    if bank.values().all(Vec::is_empty) {
        return Err(DatasetError::EmptyReBank);
    }
    for (k, res) in bank {
        if res.is_empty() || !db.contains(k) {
            return Err(DatasetError::MissingLandmark(k.to_string()));
        }
    }
    let keys: Vec<&Prop> = bank.keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut chosen: Vec<&Sample> = lifted.iter().collect();
    if let Some(n) = opts.sample_size {
        chosen.shuffle(&mut rng);
        chosen.truncate(n);
    }
    chosen
        .into_iter()
        .map(|s| {
            check_placeholders(s)?;
            let k = s.props.len();
            if k > keys.len() {
                return Err(DatasetError::NotEnoughLandmarks { needed: k, available: keys.len() });
            }
            let picked: Vec<&Prop> = keys.choose_multiple(&mut rng, k).copied().collect();
            let res: Vec<&str> = picked.iter().map(|key| bank[*key][rng.gen_range(0..bank[*key].len())].as_str()).collect();
            let words: BTreeMap<&str, &str> = s.props.iter().map(Prop::as_str).zip(res).collect();
            let map: Renaming = s.props.iter().cloned().zip(picked.into_iter().cloned()).collect();
            let formula = substitute(&s.formula, &map)?;
            Ok(Sample {
                utterance: replace_words(&s.utterance, &words),
                props: formula.props_in_order(),
                formula,
                template_id: s.template_id.clone(),
                origin: Origin::Grounded,
            })
        })
        .collect()
}

//! Command grounding: recognize referring expressions, match them to database
//! keys by embedding similarity, lift them to placeholders `A`..`E`, translate
//! the lifted command and substitute the keys back.

mod backend;
mod db;

pub use backend::{
    request_hash, BackendConfig, CachedEmbedder, ChatBackend, Embedder, Fixture, HashingEmbedder, HttpBackend, MockBackend,
};
pub use db::{normalize_key, SemanticDB, SemanticEntry};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decode::{constrained_decode, DecodeError, Sampler, Vocabulary};
use crate::ltl::{parse_prefix, prefix_serde, substitute, Formula, LtlError, Prop, Renaming};

pub const PLACEHOLDERS: [&str; 5] = ["A", "B", "C", "D", "E"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Recognize,
    Ground,
    Lift,
    Translate,
    Substitute,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Recognize => "recognize",
            Stage::Ground => "ground",
            Stage::Lift => "lift",
            Stage::Translate => "translate",
            Stage::Substitute => "substitute",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroundingError {
    #[error("backend error: {0}")]
    Backend(String),
    #[error("no recorded {kind} response for request {hash}")]
    MockMiss { kind: String, hash: String },
    #[error("model output `{0}` is not a substring of the utterance")]
    NonSubstringOutput(String),
    #[error("zero-norm embedding for `{0}`")]
    ZeroVector(String),
    #[error("semantic database is empty")]
    EmptyDatabase,
    #[error("landmark name `{0}` does not normalize to a valid proposition key")]
    InvalidKey(String),
    #[error("duplicate landmark key `{0}`")]
    DuplicateKey(String),
    #[error("referring expressions overlap at byte {0}")]
    OverlappingSpans(usize),
    #[error("{0} distinct landmarks; at most 5 placeholders are available")]
    TooManyLandmarks(usize),
    #[error("lifted formula uses `{0}`, which is bound to no landmark")]
    UnboundSymbol(String),
    #[error("syntax error in model output `{output}`: {source}")]
    Syntax { output: String, source: LtlError },
    #[error("constrained decoding failed: {0}")]
    Decode(#[from] DecodeError),
    #[error("invalid format: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{stage} stage: {source}")]
    Stage { stage: Stage, source: Box<GroundingError> },
}

impl GroundingError {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            GroundingError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The error without its stage tag.
    pub fn root(&self) -> &GroundingError {
        match self {
            GroundingError::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

trait StageExt<T> {
    fn at(self, stage: Stage) -> Result<T, GroundingError>;
}

impl<T> StageExt<T> for Result<T, GroundingError> {
    fn at(self, stage: Stage) -> Result<T, GroundingError> {
        self.map_err(|e| GroundingError::Stage { stage, source: Box::new(e) })
    }
}

/// Byte range into the utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferringExpression {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReGrounding {
    pub re: String,
    pub key: Prop,
    pub similarity: f64,
    /// Other keys with exactly the same similarity; the smallest key wins.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<Prop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingResult {
    pub utterance: String,
    pub res: Vec<ReferringExpression>,
    pub re_to_key: Vec<ReGrounding>,
    /// Landmark key to placeholder symbol.
    pub key_to_symbol: BTreeMap<Prop, Prop>,
    pub lifted_utterance: String,
    #[serde(with = "prefix_serde")]
    pub lifted_formula: Formula,
    #[serde(with = "prefix_serde")]
    pub grounded_formula: Formula,
}

impl GroundingResult {
    pub fn ambiguous(&self) -> bool {
        self.re_to_key.iter().any(|g| !g.ties.is_empty())
    }
}

/// Prompt templates; `{input}` marks where the query goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompts {
    pub recognition: String,
    pub translation: String,
}

pub const RE_RECOGNITION_PROMPT: &str = include_str!("../../data/prompts/re_recognition.txt");
pub const LIFTED_TRANSLATION_PROMPT: &str = include_str!("../../data/prompts/lifted_translation.txt");
pub const GROUNDED_TRANSLATION_PROMPT: &str = include_str!("../../data/prompts/grounded_translation.txt");
pub const RE_GENERATION_PROMPT: &str = include_str!("../../data/prompts/re_generation.txt");

/// A shipped template by name, or the contents of the file at `name_or_path`.
pub fn prompt_template(name_or_path: &str) -> Result<String, GroundingError> {
    match name_or_path {
        "re_recognition" => Ok(RE_RECOGNITION_PROMPT.to_string()),
        "lifted_translation" => Ok(LIFTED_TRANSLATION_PROMPT.to_string()),
        "grounded_translation" => Ok(GROUNDED_TRANSLATION_PROMPT.to_string()),
        "re_generation" => Ok(RE_GENERATION_PROMPT.to_string()),
        path => std::fs::read_to_string(Path::new(path)).map_err(|e| GroundingError::Io(format!("{path}: {e}"))),
    }
}

impl Default for Prompts {
    fn default() -> Self {
        Prompts { recognition: RE_RECOGNITION_PROMPT.to_string(), translation: LIFTED_TRANSLATION_PROMPT.to_string() }
    }
}

pub fn render_prompt(template: &str, input: &str) -> String {
    template.replace("{input}", input)
}

/// Limits for constrained translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeLimits {
    pub max_height: usize,
    pub max_tokens: usize,
    /// Backend requests allowed per translation, counting the first.
    pub max_requests: usize,
}

impl Default for DecodeLimits {
    fn default() -> Self {
        DecodeLimits { max_height: 32, max_tokens: 160, max_requests: 4 }
    }
}

pub struct Backends<'a> {
    pub chat: &'a dyn ChatBackend,
    pub embedder: &'a dyn Embedder,
    pub prompts: Prompts,
    /// `Some` to translate with type-constrained decoding.
    pub constrained: Option<DecodeLimits>,
}

/// First non-empty line of a completion, without an echoed field label.
fn first_line<'a>(output: &'a str, label: &str) -> &'a str {
    let line = output.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    line.strip_prefix(label).map_or(line, str::trim)
}

pub fn recognize_res(utterance: &str, chat: &dyn ChatBackend, template: &str) -> Result<Vec<ReferringExpression>, GroundingError> {
    if utterance.trim().is_empty() {
        return Ok(Vec::new());
    }
    let output = chat.complete(&render_prompt(template, utterance))?;
    resolve_res(utterance, first_line(&output, "Propositions:"))
}

/// Locates `|`-separated model output in the utterance, each piece at its
/// leftmost occurrence not overlapping an earlier piece.
pub fn resolve_res(utterance: &str, output: &str) -> Result<Vec<ReferringExpression>, GroundingError> {
    let mut taken: Vec<Span> = Vec::new();
    for piece in output.split('|').map(str::trim).filter(|p| !p.is_empty()) {
        let span = utterance
            .match_indices(piece)
            .map(|(s, _)| Span { start: s, end: s + piece.len() })
            .find(|c| taken.iter().all(|t| c.end <= t.start || c.start >= t.end))
            .ok_or_else(|| GroundingError::NonSubstringOutput(piece.to_string()))?;
        taken.push(span);
    }
    taken.sort();
    Ok(taken.into_iter().map(|span| ReferringExpression { text: utterance[span.start..span.end].to_string(), span }).collect())
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let na: f64 = a.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn nonzero(v: &[f32]) -> bool {
    v.iter().any(|&x| x != 0.0)
}

/// Each expression goes to the key whose serialized entry is most similar.
pub fn ground_res(res: &[ReferringExpression], db: &SemanticDB, embedder: &dyn Embedder) -> Result<Vec<ReGrounding>, GroundingError> {
    if db.is_empty() {
        return Err(GroundingError::EmptyDatabase);
    }
    if res.is_empty() {
        return Ok(Vec::new());
    }
    let entries: Vec<&SemanticEntry> = db.entries().collect();
    let infos: Vec<String> = entries.iter().map(|e| e.serialize_info()).collect();
    let texts: Vec<String> = res.iter().map(|r| r.text.clone()).collect();
    let key_vecs = embedder.embed(&infos)?;
    let re_vecs = embedder.embed(&texts)?;
    for (t, v) in infos.iter().zip(&key_vecs).chain(texts.iter().zip(&re_vecs)) {
        if !nonzero(v) {
            return Err(GroundingError::ZeroVector(t.clone()));
        }
    }
    Ok(res
        .iter()
        .zip(&re_vecs)
        .map(|(re, rv)| {
            let sims: Vec<f64> = key_vecs.iter().map(|kv| cosine(rv, kv)).collect();
            let best = (0..sims.len()).fold(0, |b, i| if sims[i] > sims[b] { i } else { b });
            let ties = (0..sims.len()).filter(|&i| i != best && sims[i] == sims[best]).map(|i| entries[i].key.clone()).collect();
            ReGrounding { re: re.text.clone(), key: entries[best].key.clone(), similarity: sims[best], ties }
        })
        .collect())
}

/// Replaces expression spans by placeholders; expressions grounded to the same
/// key share one. Returns the lifted text and the key-to-symbol map.
pub fn lift(
    utterance: &str,
    res: &[ReferringExpression],
    keys: &[Prop],
) -> Result<(String, BTreeMap<Prop, Prop>), GroundingError> {
    assert_eq!(res.len(), keys.len(), "one key per referring expression");
    let mut order: Vec<usize> = (0..res.len()).collect();
    order.sort_by_key(|&i| res[i].span);
    for w in order.windows(2) {
        if res[w[1]].span.start < res[w[0]].span.end {
            return Err(GroundingError::OverlappingSpans(res[w[1]].span.start));
        }
    }
    let mut key_to_symbol: BTreeMap<Prop, Prop> = BTreeMap::new();
    let mut out = String::new();
    let mut at = 0;
    for &i in &order {
        let n = key_to_symbol.len();
        let sym = match key_to_symbol.get(&keys[i]) {
            Some(s) => s.clone(),
            None => {
                let name = PLACEHOLDERS.get(n).ok_or_else(|| {
                    GroundingError::TooManyLandmarks(keys.iter().collect::<BTreeSet<_>>().len())
                })?;
                let s = Prop::new(*name).expect("placeholders are valid props");
                key_to_symbol.insert(keys[i].clone(), s.clone());
                s
            }
        };
        out.push_str(&utterance[at..res[i].span.start]);
        out.push_str(sym.as_str());
        at = res[i].span.end;
    }
    out.push_str(&utterance[at..]);
    Ok((out, key_to_symbol))
}

pub fn translate_lifted(
    lifted_utterance: &str,
    chat: &dyn ChatBackend,
    template: &str,
    constrained: Option<DecodeLimits>,
) -> Result<Formula, GroundingError> {
    let prompt = render_prompt(template, lifted_utterance);
    let output = chat.complete(&prompt)?;
    let text = first_line(&output, "LTL:").to_string();
    match constrained {
        None => parse_prefix(&text).map_err(|source| GroundingError::Syntax { output: text, source }),
        Some(limits) => {
            let vocab = translation_vocabulary(lifted_utterance, &text);
            let mut sampler = BackendSampler::new(chat, prompt, &text, lifted_utterance, limits.max_requests);
            let f = constrained_decode(&mut sampler, &vocab, limits.max_height, limits.max_tokens)?;
            match sampler.error.take() {
                Some(e) => Err(e),
                None => Ok(f),
            }
        }
    }
}

fn is_placeholder(word: &str) -> bool {
    PLACEHOLDERS.contains(&word)
}

/// Placeholders of the utterance plus proposition-like tokens of the first
/// model output; the mask constrains syntax, not the model's choice of names.
fn translation_vocabulary(lifted_utterance: &str, output: &str) -> Vocabulary {
    let placeholders = lifted_utterance.split(|c: char| !c.is_ascii_alphanumeric() && c != '_').filter(|w| is_placeholder(w));
    let mut props: Vec<Prop> = placeholders.chain(output.split_whitespace()).filter_map(|w| Prop::new(w).ok()).collect();
    if props.is_empty() {
        props.push(Prop::new(PLACEHOLDERS[0]).expect("placeholders are valid props"));
    }
    // Vocabulary::new drops repeats
    Vocabulary::new(&props)
}

/// Adapts a chat backend to token scores: it proposes the tokens of the
/// current completion, and when the mask rejects one it asks the backend to
/// continue from the accepted prefix instead.
struct BackendSampler<'a> {
    chat: &'a dyn ChatBackend,
    prompt: String,
    proposal: Vec<String>,
    requests: usize,
    max_requests: usize,
    utterance_props: Vec<String>,
    error: Option<GroundingError>,
}

impl<'a> BackendSampler<'a> {
    fn new(chat: &'a dyn ChatBackend, prompt: String, first: &str, utterance: &str, max_requests: usize) -> Self {
        BackendSampler {
            chat,
            prompt,
            proposal: first.split_whitespace().map(str::to_string).collect(),
            requests: 1,
            max_requests,
            utterance_props: utterance
                .split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                .filter(|w| is_placeholder(w))
                .map(str::to_string)
                .collect(),
            error: None,
        }
    }

    fn prefix_matches(&self, emitted: &[usize], vocab: &Vocabulary) -> bool {
        emitted.len() <= self.proposal.len() && emitted.iter().zip(&self.proposal).all(|(&i, t)| vocab.text(i) == t)
    }
}

impl Sampler for BackendSampler<'_> {
    fn scores(&mut self, emitted: &[usize], vocab: &Vocabulary) -> Vec<f64> {
        if !self.prefix_matches(emitted, vocab) && self.requests < self.max_requests && self.error.is_none() {
            let prefix: Vec<&str> = emitted.iter().map(|&i| vocab.text(i)).collect();
            let prompt = format!("{} {}", self.prompt, prefix.join(" "));
            self.requests += 1;
            match self.chat.complete(&prompt) {
                Ok(out) => {
                    self.proposal = prefix.iter().map(|s| s.to_string()).chain(out.split_whitespace().map(str::to_string)).collect();
                }
                Err(e) => self.error = Some(e),
            }
        }
        let want = if self.prefix_matches(emitted, vocab) { self.proposal.get(emitted.len()).cloned() } else { None };
        (0..vocab.len())
            .map(|i| {
                let t = vocab.text(i);
                if want.as_deref() == Some(t) || (want.is_none() && self.prefix_matches(emitted, vocab) && i == vocab.end()) {
                    1.0
                } else if self.utterance_props.iter().any(|p| p == t) {
                    // fallback: close open slots with the command's own placeholders
                    0.5
                } else {
                    0.0
                }
            })
            .collect()
    }
}

pub fn ground_command(utterance: &str, db: &SemanticDB, backends: &Backends<'_>) -> Result<GroundingResult, GroundingError> {
    let res = recognize_res(utterance, backends.chat, &backends.prompts.recognition).at(Stage::Recognize)?;
    tracing::debug!(stage = "recognize", count = res.len());
    let re_to_key = ground_res(&res, db, backends.embedder).at(Stage::Ground)?;
    for g in re_to_key.iter().filter(|g| !g.ties.is_empty()) {
        tracing::warn!(stage = "ground", re = %g.re, key = %g.key, ties = g.ties.len(), "tied similarity");
    }
    let keys: Vec<Prop> = re_to_key.iter().map(|g| g.key.clone()).collect();
    let (lifted_utterance, key_to_symbol) = lift(utterance, &res, &keys).at(Stage::Lift)?;
    tracing::debug!(stage = "lift", lifted = %lifted_utterance);
    let lifted_formula =
        translate_lifted(&lifted_utterance, backends.chat, &backends.prompts.translation, backends.constrained).at(Stage::Translate)?;
    tracing::debug!(stage = "translate", formula = %crate::ltl::print_prefix(&lifted_formula));
    let symbol_to_key: Renaming = key_to_symbol.iter().map(|(k, s)| (s.clone(), k.clone())).collect();
    let grounded_formula = substitute(&lifted_formula, &symbol_to_key)
        .map_err(|e| match e {
            LtlError::MissingBinding(s) => GroundingError::UnboundSymbol(s),
            other => GroundingError::Format(other.to_string()),
        })
        .at(Stage::Substitute)?;
    Ok(GroundingResult { utterance: utterance.to_string(), res, re_to_key, key_to_symbol, lifted_utterance, lifted_formula, grounded_formula })
}

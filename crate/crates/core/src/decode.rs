//! Type-constrained decoding of prefix formulas.
//!
//! A [`DecodeSession`] tracks the open operand slots of a partial prefix
//! formula, each with its remaining height budget, and masks every token that
//! could not be completed into a formula within the height and token limits.
//! It never talks to a model: callers supply scores through [`Sampler`].

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{parse_prefix, Formula, LtlError, Op, Prop};

pub const END_TOKEN: &str = "<end>";

const OPERATORS: [Op; 11] = [
    Op::Not,
    Op::And,
    Op::Or,
    Op::Implies,
    Op::Equiv,
    Op::Next,
    Op::Finally,
    Op::Globally,
    Op::Until,
    Op::WeakUntil,
    Op::StrongRelease,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("session already emitted the end token")]
    SessionFinished,
    #[error("token `{token}` is not allowed at position {position}")]
    DisallowedToken { token: String, position: usize },
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("could not complete a formula within {0} tokens")]
    TokenBudgetExceeded(usize),
    #[error("invalid limits: {0}")]
    InvalidLimits(String),
    #[error("no admissible token has a finite score")]
    NoAdmissibleToken,
    #[error("syntax error: {0}")]
    Syntax(#[from] LtlError),
    #[error("sampler returned {got} scores for a vocabulary of {expected}")]
    ScoreLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Operator(Op),
    Prop(Prop),
    End,
}

impl TokenKind {
    pub fn text(&self) -> &str {
        match self {
            TokenKind::Operator(op) => op.prefix_token(),
            TokenKind::Prop(p) => p.as_str(),
            TokenKind::End => END_TOKEN,
        }
    }

    fn arity(&self) -> usize {
        match self {
            TokenKind::Operator(op) => op.arity(),
            _ => 0,
        }
    }
}

/// Operator tokens, then propositions in the given order, then the end token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<TokenKind>,
}

impl Vocabulary {
    pub fn new(props: &[Prop]) -> Self {
        let mut tokens: Vec<TokenKind> = OPERATORS.iter().map(|&op| TokenKind::Operator(op)).collect();
        for p in props {
            if !tokens.iter().any(|t| matches!(t, TokenKind::Prop(q) if q == p)) {
                tokens.push(TokenKind::Prop(p.clone()));
            }
        }
        tokens.push(TokenKind::End);
        Vocabulary { tokens }
    }

    pub fn with_prop_names(names: &[&str]) -> Result<Self, LtlError> {
        let props = names.iter().map(|n| Prop::new(*n)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(&props))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, i: usize) -> &TokenKind {
        &self.tokens[i]
    }

    pub fn text(&self, i: usize) -> &str {
        self.tokens[i].text()
    }

    pub fn index_of(&self, text: &str) -> Option<usize> {
        self.tokens.iter().position(|t| t.text() == text)
    }

    pub fn end(&self) -> usize {
        self.tokens.len() - 1
    }

    pub fn props(&self) -> impl Iterator<Item = &Prop> {
        self.tokens.iter().filter_map(|t| match t {
            TokenKind::Prop(p) => Some(p),
            _ => None,
        })
    }

    fn max_arity(&self) -> usize {
        self.tokens.iter().map(TokenKind::arity).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct DecodeSession {
    vocab: Vocabulary,
    max_height: usize,
    /// Bound on formula tokens (the end token is not counted).
    max_tokens: usize,
    emitted: Vec<usize>,
    /// Remaining height budget of each open slot; the last one is filled next.
    slots: Vec<usize>,
    finished: bool,
}

impl DecodeSession {
    /// A session without a token limit beyond what the height implies.
    pub fn new(vocab: Vocabulary, max_height: usize) -> Result<Self, DecodeError> {
        Self::with_limits(vocab, max_height, usize::MAX)
    }

    pub fn with_limits(vocab: Vocabulary, max_height: usize, max_tokens: usize) -> Result<Self, DecodeError> {
        if max_height == 0 {
            return Err(DecodeError::InvalidLimits("max_height must be at least 1".into()));
        }
        if max_tokens == 0 {
            return Err(DecodeError::InvalidLimits("max_tokens must be at least 1".into()));
        }
        if vocab.props().next().is_none() {
            return Err(DecodeError::InvalidLimits("vocabulary has no propositions".into()));
        }
        Ok(DecodeSession { vocab, max_height, max_tokens, emitted: Vec::new(), slots: vec![max_height], finished: false })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn max_height(&self) -> usize {
        self.max_height
    }

    /// Open operand slots.
    pub fn pending(&self) -> usize {
        self.slots.len()
    }

    pub fn emitted(&self) -> &[usize] {
        &self.emitted
    }

    pub fn emitted_text(&self) -> String {
        self.emitted.iter().map(|&i| self.vocab.text(i)).collect::<Vec<_>>().join(" ")
    }

    pub fn is_complete(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn admits(&self, i: usize) -> bool {
        let tok = self.vocab.token(i);
        let Some(&budget) = self.slots.last() else {
            return matches!(tok, TokenKind::End);
        };
        match tok {
            TokenKind::End => false,
            TokenKind::Prop(_) => true,
            TokenKind::Operator(op) => {
                let remaining = self.max_tokens - self.emitted.len();
                // after this token, every open slot still needs at least one token
                budget > 1 && self.slots.len() + op.arity() <= remaining
            }
        }
    }

    pub fn allowed_next(&self) -> Result<Vec<bool>, DecodeError> {
        if self.finished {
            return Err(DecodeError::SessionFinished);
        }
        Ok((0..self.vocab.len()).map(|i| self.admits(i)).collect())
    }

    pub fn feed(&mut self, token: usize) -> Result<(), DecodeError> {
        if self.finished {
            return Err(DecodeError::SessionFinished);
        }
        if token >= self.vocab.len() || !self.admits(token) {
            let text = if token < self.vocab.len() { self.vocab.text(token).to_string() } else { format!("#{token}") };
            return Err(DecodeError::DisallowedToken { token: text, position: self.emitted.len() });
        }
        match self.vocab.token(token) {
            TokenKind::End => self.finished = true,
            tok => {
                let budget = self.slots.pop().expect("admitted tokens fill a slot");
                for _ in 0..tok.arity() {
                    self.slots.push(budget - 1);
                }
                self.emitted.push(token);
            }
        }
        Ok(())
    }

    pub fn feed_text(&mut self, text: &str) -> Result<(), DecodeError> {
        let i = self.vocab.index_of(text).ok_or_else(|| DecodeError::UnknownToken(text.to_string()))?;
        self.feed(i)
    }

    /// The decoded formula, once complete.
    pub fn formula(&self) -> Result<Formula, DecodeError> {
        Ok(parse_prefix(&self.emitted_text())?)
    }
}

/// Supplies a score per vocabulary token at each step; higher is better.
/// Non-finite scores never win.
pub trait Sampler {
    fn scores(&mut self, emitted: &[usize], vocab: &Vocabulary) -> Vec<f64>;
}

impl<F: FnMut(&[usize], &Vocabulary) -> Vec<f64>> Sampler for F {
    fn scores(&mut self, emitted: &[usize], vocab: &Vocabulary) -> Vec<f64> {
        self(emitted, vocab)
    }
}

/// Independent uniform scores, so the masked argmax is uniform over admitted tokens.
pub struct RandomSampler<R> {
    pub rng: R,
}

impl<R: Rng> Sampler for RandomSampler<R> {
    fn scores(&mut self, _: &[usize], vocab: &Vocabulary) -> Vec<f64> {
        (0..vocab.len()).map(|_| self.rng.gen::<f64>()).collect()
    }
}

/// Prefers a recorded token sequence, one token per step.
pub struct ReplaySampler {
    tokens: Vec<String>,
}

impl ReplaySampler {
    pub fn new(text: &str) -> Self {
        ReplaySampler { tokens: text.split_whitespace().map(str::to_string).collect() }
    }
}

impl Sampler for ReplaySampler {
    fn scores(&mut self, emitted: &[usize], vocab: &Vocabulary) -> Vec<f64> {
        let want = self.tokens.get(emitted.len()).map_or(END_TOKEN, String::as_str);
        (0..vocab.len()).map(|i| if vocab.text(i) == want { 1.0 } else { 0.0 }).collect()
    }
}

/// Replays one recorded score vector per step; zeros once exhausted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreStream {
    pub steps: Vec<Vec<f64>>,
}

impl Sampler for ScoreStream {
    fn scores(&mut self, emitted: &[usize], vocab: &Vocabulary) -> Vec<f64> {
        self.steps.get(emitted.len()).cloned().unwrap_or_else(|| vec![0.0; vocab.len()])
    }
}

fn argmax(scores: &[f64], mask: Option<&[bool]>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if mask.is_some_and(|m| !m[i]) || !s.is_finite() {
            continue;
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

fn checked_scores(sampler: &mut dyn Sampler, emitted: &[usize], vocab: &Vocabulary) -> Result<Vec<f64>, DecodeError> {
    let s = sampler.scores(emitted, vocab);
    if s.len() != vocab.len() {
        return Err(DecodeError::ScoreLength { expected: vocab.len(), got: s.len() });
    }
    Ok(s)
}

/// Masked argmax decoding. Ties go to the lowest vocabulary index.
pub fn constrained_decode(
    sampler: &mut dyn Sampler,
    vocab: &Vocabulary,
    max_height: usize,
    max_tokens: usize,
) -> Result<Formula, DecodeError> {
    let mut session = DecodeSession::with_limits(vocab.clone(), max_height, max_tokens)?;
    while !session.is_finished() {
        let mask = session.allowed_next()?;
        let scores = checked_scores(sampler, session.emitted(), vocab)?;
        let pick = argmax(&scores, Some(&mask)).ok_or(DecodeError::NoAdmissibleToken)?;
        session.feed(pick)?;
    }
    session.formula()
}

/// Plain argmax decoding with no mask: stops at the end token or after
/// `max_tokens` formula tokens, then parses whatever was produced.
pub fn unconstrained_decode(sampler: &mut dyn Sampler, vocab: &Vocabulary, max_tokens: usize) -> Result<Formula, DecodeError> {
    let mut emitted = Vec::new();
    while emitted.len() < max_tokens {
        let scores = checked_scores(sampler, &emitted, vocab)?;
        let pick = argmax(&scores, None).ok_or(DecodeError::NoAdmissibleToken)?;
        if pick == vocab.end() {
            break;
        }
        emitted.push(pick);
    }
    let text = emitted.iter().map(|&i| vocab.text(i)).collect::<Vec<_>>().join(" ");
    Ok(parse_prefix(&text)?)
}

/// Smallest token budget that admits every formula of height `max_height` in `vocab`.
pub fn full_tree_tokens(vocab: &Vocabulary, max_height: usize) -> usize {
    let k = vocab.max_arity().max(1);
    (0..max_height).map(|d| k.saturating_pow(d as u32)).fold(0usize, usize::saturating_add)
}

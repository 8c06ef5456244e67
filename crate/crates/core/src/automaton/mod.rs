//! LTL to Büchi automata, emptiness, language equivalence and lasso semantics.

mod acceptor;
mod buchi;
mod emptiness;
mod lasso;
mod tableau;

pub use acceptor::{LassoAcceptor, StateSet};
pub use buchi::{BuchiAutomaton, BuchiState, Edge};
pub(crate) use buchi::tarjan;
pub use lasso::{eval_lasso, LassoEvaluator, LassoTrace, Valuation};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{Formula, Prop};

use buchi::LazyBuchi;

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("formula too large: tableau exceeded the budget of {budget} nodes")]
    FormulaTooLarge { budget: usize },
    #[error("alphabet of {0} propositions exceeds the supported 64")]
    AlphabetTooLarge(usize),
}

/// A conjunction of literals: bits in `pos` must be true, bits in `neg` false.
/// Bit `i` refers to the `i`-th proposition of the automaton alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Guard {
    pub pos: u64,
    pub neg: u64,
}

impl Guard {
    pub const TRUE: Guard = Guard { pos: 0, neg: 0 };

    pub fn matches(&self, letter: u64) -> bool {
        letter & self.pos == self.pos && letter & self.neg == 0
    }

    /// Whether every letter satisfying `other` satisfies `self`.
    pub fn implied_by(&self, other: &Guard) -> bool {
        self.pos & !other.pos == 0 && self.neg & !other.neg == 0
    }

    pub fn to_formula(&self, alphabet: &[Prop]) -> Formula {
        let lits = (0..alphabet.len()).filter_map(|i| {
            let p = Formula::Prop(alphabet[i].clone());
            if self.pos >> i & 1 == 1 {
                Some(p)
            } else if self.neg >> i & 1 == 1 {
                Some(Formula::not(p))
            } else {
                None
            }
        });
        Formula::conjunction(lits).unwrap_or(Formula::True)
    }

    /// The minimal valuation satisfying the guard.
    pub fn witness(&self, alphabet: &[Prop]) -> Valuation {
        (0..alphabet.len()).filter(|i| self.pos >> i & 1 == 1).map(|i| alphabet[i].clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Upper bound on tableau work (expanded nodes plus branching steps).
    pub node_budget: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { node_budget: DEFAULT_NODE_BUDGET }
    }
}

/// Result of an emptiness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    NonEmpty(LassoTrace),
}

impl Emptiness {
    pub fn is_empty(&self) -> bool {
        matches!(self, Emptiness::Empty)
    }

    pub fn witness(&self) -> Option<&LassoTrace> {
        match self {
            Emptiness::Empty => None,
            Emptiness::NonEmpty(t) => Some(t),
        }
    }
}

/// Explicit automaton for `f` over `props(f)`, without dead or unreachable states.
pub fn to_buchi(f: &Formula) -> Result<BuchiAutomaton, AutomatonError> {
    to_buchi_with(f, BuildOptions::default())
}

pub fn to_buchi_with(f: &Formula, opts: BuildOptions) -> Result<BuchiAutomaton, AutomatonError> {
    let alphabet: Vec<Prop> = f.props().into_iter().collect();
    to_buchi_over(f, &alphabet, opts)
}

/// Like [`to_buchi_with`] with an explicit alphabet, which must cover `props(f)`.
pub fn to_buchi_over(f: &Formula, alphabet: &[Prop], opts: BuildOptions) -> Result<BuchiAutomaton, AutomatonError> {
    let mut lazy = LazyBuchi::new(&[(f, true)], alphabet, opts)?;
    BuchiAutomaton::explore(&mut lazy)
}

pub fn is_empty(ba: &BuchiAutomaton) -> Emptiness {
    ba.emptiness()
}

/// A model of `f`, if there is one.
pub fn satisfiable(f: &Formula) -> Result<Emptiness, AutomatonError> {
    let alphabet: Vec<Prop> = f.props().into_iter().collect();
    let mut lazy = LazyBuchi::new(&[(f, true)], &alphabet, BuildOptions::default())?;
    lazy.emptiness()
}

/// Whether `trace` is accepted by `ba`. Propositions outside the automaton
/// alphabet are ignored.
pub fn accepts(ba: &BuchiAutomaton, trace: &LassoTrace) -> bool {
    ba.accepts(trace)
}

/// `L(f) = L(g)`.
pub fn equivalent(f: &Formula, g: &Formula) -> Result<bool, AutomatonError> {
    equivalent_with(f, g, BuildOptions::default()).map(|w| w.is_none())
}

/// `None` if `f` and `g` are equivalent, otherwise a trace satisfying exactly one of them.
pub fn check_equivalence(f: &Formula, g: &Formula) -> Result<Option<LassoTrace>, AutomatonError> {
    equivalent_with(f, g, BuildOptions::default())
}

pub fn equivalent_with(f: &Formula, g: &Formula, opts: BuildOptions) -> Result<Option<LassoTrace>, AutomatonError> {
    if f == g {
        return Ok(None);
    }
    let alphabet = union_alphabet(f, g);
    for (x, y) in [(f, g), (g, f)] {
        let mut lazy = LazyBuchi::new(&[(x, true), (y, false)], &alphabet, opts)?;
        if let Emptiness::NonEmpty(t) = lazy.emptiness()? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// `L(f) ⊆ L(g)`.
pub fn implies(f: &Formula, g: &Formula) -> Result<bool, AutomatonError> {
    let alphabet = union_alphabet(f, g);
    let mut lazy = LazyBuchi::new(&[(f, true), (g, false)], &alphabet, BuildOptions::default())?;
    Ok(lazy.emptiness()?.is_empty())
}

fn union_alphabet(f: &Formula, g: &Formula) -> Vec<Prop> {
    let mut s: BTreeSet<Prop> = f.props();
    s.extend(g.props());
    s.into_iter().collect()
}

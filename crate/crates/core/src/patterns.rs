//! Specification-pattern families and the lifted template catalog.

use std::collections::HashMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{self, AutomatonError, LassoEvaluator};
use crate::ltl::{canonical_prop, print_prefix, skeletonize, substitute, Formula, Prop, Renaming, Skeleton};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Visit,
    SequenceVisit,
    OrderedVisit,
    StrictlyOrderedVisit,
    Patrolling,
    BoundDelay,
    DelayedReaction,
    PromptReaction,
    Wait,
    PastAvoidance,
    FutureAvoidance,
    GlobalAvoidance,
    UpperRestrictedAvoidance,
    LowerRestrictedAvoidance,
    ExactRestrictedAvoidance,
}

impl Family {
    pub const ALL: [Family; 15] = [
        Family::Visit,
        Family::SequenceVisit,
        Family::OrderedVisit,
        Family::StrictlyOrderedVisit,
        Family::Patrolling,
        Family::BoundDelay,
        Family::DelayedReaction,
        Family::PromptReaction,
        Family::Wait,
        Family::PastAvoidance,
        Family::FutureAvoidance,
        Family::GlobalAvoidance,
        Family::UpperRestrictedAvoidance,
        Family::LowerRestrictedAvoidance,
        Family::ExactRestrictedAvoidance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Visit => "visit",
            Family::SequenceVisit => "sequence_visit",
            Family::OrderedVisit => "ordered_visit",
            Family::StrictlyOrderedVisit => "strictly_ordered_visit",
            Family::Patrolling => "patrolling",
            Family::BoundDelay => "bound_delay",
            Family::DelayedReaction => "delayed_reaction",
            Family::PromptReaction => "prompt_reaction",
            Family::Wait => "wait",
            Family::PastAvoidance => "past_avoidance",
            Family::FutureAvoidance => "future_avoidance",
            Family::GlobalAvoidance => "global_avoidance",
            Family::UpperRestrictedAvoidance => "upper_restricted_avoidance",
            Family::LowerRestrictedAvoidance => "lower_restricted_avoidance",
            Family::ExactRestrictedAvoidance => "exact_restricted_avoidance",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Two-proposition patterns with no size parameter.
    pub fn is_fixed_pair(self) -> bool {
        matches!(
            self,
            Family::BoundDelay
                | Family::DelayedReaction
                | Family::PromptReaction
                | Family::Wait
                | Family::PastAvoidance
                | Family::FutureAvoidance
        )
    }

    /// Restricted-avoidance patterns count visits to a single proposition.
    pub fn is_visit_count(self) -> bool {
        matches!(
            self,
            Family::UpperRestrictedAvoidance | Family::LowerRestrictedAvoidance | Family::ExactRestrictedAvoidance
        )
    }

    /// Values of `n` for which the family is defined.
    pub fn legal_range(self) -> RangeInclusive<usize> {
        match self {
            f if f.is_fixed_pair() => 2..=2,
            Family::Visit | Family::Patrolling | Family::GlobalAvoidance => 1..=26,
            Family::SequenceVisit | Family::OrderedVisit | Family::StrictlyOrderedVisit => 2..=26,
            _ => 1..=usize::MAX,
        }
    }

    /// Catalog range: `n` from 1 to 5 where the pattern allows it. Lower
    /// restricted avoidance starts at 2 since `n = 1` coincides with Visit.
    pub fn default_range(self) -> RangeInclusive<usize> {
        match self {
            f if f.is_fixed_pair() => 2..=2,
            Family::Visit | Family::Patrolling | Family::GlobalAvoidance => 1..=5,
            Family::UpperRestrictedAvoidance | Family::ExactRestrictedAvoidance => 1..=5,
            _ => 2..=5,
        }
    }

    /// Number of propositions of an instance with parameter `n`.
    pub fn prop_count(self, n: usize) -> usize {
        if self.is_visit_count() {
            1
        } else {
            n
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternTemplate {
    pub family: Family,
    /// Waypoint count, or visit count for restricted avoidance.
    pub n: usize,
}

impl PatternTemplate {
    pub fn new(family: Family, n: usize) -> Result<Self, PatternError> {
        if !family.legal_range().contains(&n) {
            return Err(PatternError::IllegalParameter { family, n });
        }
        Ok(PatternTemplate { family, n })
    }

    pub fn prop_count(&self) -> usize {
        self.family.prop_count(self.n)
    }

    /// `visit_3`, `wait`, `exact_restricted_avoidance_2`, ...
    pub fn id(&self) -> String {
        if self.family.is_fixed_pair() {
            self.family.name().to_string()
        } else {
            format!("{}_{}", self.family.name(), self.n)
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        if let Some(f) = Family::from_name(id) {
            return f.is_fixed_pair().then_some(PatternTemplate { family: f, n: 2 });
        }
        let (name, n) = id.rsplit_once('_')?;
        let family = Family::from_name(name)?;
        let n: usize = n.parse().ok()?;
        if family.is_fixed_pair() {
            return None;
        }
        PatternTemplate::new(family, n).ok()
    }

    /// Instance over canonical propositions `a, b, ...`.
    pub fn skeleton(&self) -> Skeleton {
        let props: Vec<Prop> = (0..self.prop_count()).map(canonical_prop).collect();
        let f = instantiate(*self, &props).expect("canonical props fit the arity");
        skeletonize(&f).expect("few props").0
    }
}

impl fmt::Display for PatternTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("{family} expects {expected} proposition(s), got {got}")]
    ArityMismatch { family: Family, expected: usize, got: usize },
    #[error("propositions must be distinct")]
    DuplicateProps,
    #[error("{family} is not defined for n = {n}")]
    IllegalParameter { family: Family, n: usize },
    #[error("catalog has {0} templates, expected 47")]
    CatalogSize(usize),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

fn p(x: &Prop) -> Formula {
    Formula::Prop(x.clone())
}

/// Right-nested conjunction.
fn all(items: Vec<Formula>) -> Formula {
    let mut it = items.into_iter().rev();
    let last = it.next().expect("non-empty conjunction");
    it.fold(last, |acc, f| Formula::and(f, acc))
}

/// At least `k` separate visits to `a`.
fn visits_at_least(a: &Formula, k: usize) -> Formula {
    let mut f = Formula::finally(a.clone());
    for _ in 1..k {
        let na = Formula::not(a.clone());
        f = Formula::finally(Formula::and(
            a.clone(),
            Formula::until(a.clone(), Formula::and(na.clone(), Formula::until(na, f))),
        ));
    }
    f
}

/// Alternating chain `l0 ∧ F(l1 ∧ F(l2 ∧ ...))` with `len` literals starting at `a`.
fn alternating_visits(a: &Formula, len: usize) -> Formula {
    let lit = |i: usize| if i % 2 == 0 { a.clone() } else { Formula::not(a.clone()) };
    let mut f = lit(len - 1);
    for i in (0..len - 1).rev() {
        f = Formula::and(lit(i), Formula::finally(f));
    }
    f
}

/// Alternating chain `¬a ∨ G(a ∨ G(¬a ∨ ...))` with `len` literals starting at `¬a`.
fn alternating_stays(a: &Formula, len: usize) -> Formula {
    let lit = |i: usize| if i % 2 == 0 { Formula::not(a.clone()) } else { a.clone() };
    let mut f = Formula::globally(lit(len - 1));
    for i in (1..len - 1).rev() {
        f = Formula::globally(Formula::or(lit(i), f));
    }
    Formula::or(lit(0), f)
}

/// The pattern formula over the given propositions (in the table's `p1..pn`
/// or `a, b` order).
pub fn instantiate(t: PatternTemplate, props: &[Prop]) -> Result<Formula, PatternError> {
    PatternTemplate::new(t.family, t.n)?;
    if props.len() != t.prop_count() {
        return Err(PatternError::ArityMismatch { family: t.family, expected: t.prop_count(), got: props.len() });
    }
    for (i, x) in props.iter().enumerate() {
        if props[..i].contains(x) {
            return Err(PatternError::DuplicateProps);
        }
    }
    let n = t.n;
    let ps: Vec<Formula> = props.iter().map(p).collect();
    let not = |f: &Formula| Formula::not(f.clone());
    let ordered = |ps: &[Formula]| -> Vec<Formula> {
        (0..n - 1).map(|i| Formula::until(not(&ps[i + 1]), ps[i].clone())).collect()
    };
    Ok(match t.family {
        Family::Visit => all(ps.iter().map(|x| Formula::finally(x.clone())).collect()),
        Family::SequenceVisit => {
            let mut f = Formula::finally(ps[n - 1].clone());
            for x in ps[..n - 1].iter().rev() {
                f = Formula::finally(Formula::and(x.clone(), f));
            }
            f
        }
        Family::OrderedVisit => {
            let mut items = vec![Formula::finally(ps[n - 1].clone())];
            items.extend(ordered(&ps));
            all(items)
        }
        Family::StrictlyOrderedVisit => {
            let mut items = vec![Formula::finally(ps[n - 1].clone())];
            items.extend(ordered(&ps));
            items.extend((0..n - 1).map(|i| {
                Formula::until(
                    not(&ps[i]),
                    Formula::until(ps[i].clone(), Formula::until(not(&ps[i]), ps[i + 1].clone())),
                )
            }));
            all(items)
        }
        Family::Patrolling => all(ps.iter().map(|x| Formula::globally(Formula::finally(x.clone()))).collect()),
        Family::BoundDelay => Formula::globally(Formula::equiv(ps[0].clone(), Formula::next(ps[1].clone()))),
        Family::DelayedReaction => Formula::globally(Formula::implies(ps[0].clone(), Formula::finally(ps[1].clone()))),
        Family::PromptReaction => Formula::globally(Formula::implies(ps[0].clone(), Formula::next(ps[1].clone()))),
        Family::Wait => Formula::weak_until(ps[0].clone(), ps[1].clone()),
        Family::PastAvoidance => Formula::weak_until(not(&ps[0]), ps[1].clone()),
        Family::FutureAvoidance => Formula::globally(Formula::implies(
            ps[0].clone(),
            Formula::next(Formula::globally(not(&ps[1]))),
        )),
        Family::GlobalAvoidance => all(ps.iter().map(|x| Formula::globally(not(x))).collect()),
        Family::UpperRestrictedAvoidance => Formula::not(visits_at_least(&ps[0], n + 1)),
        // n = 1 is F a; the catalog leaves it out as it duplicates Visit
        Family::LowerRestrictedAvoidance => visits_at_least(&ps[0], n),
        Family::ExactRestrictedAvoidance => {
            Formula::strong_release(alternating_visits(&ps[0], 2 * n - 1), alternating_stays(&ps[0], 2 * n + 1))
        }
    })
}

/// Which parameter values each family contributes to a catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogConfig {
    pub ranges: Vec<(Family, RangeInclusive<usize>)>,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        CatalogConfig { ranges: Family::ALL.iter().map(|f| (*f, f.default_range())).collect() }
    }
}

impl CatalogConfig {
    pub fn templates(&self) -> Result<Vec<PatternTemplate>, PatternError> {
        let mut out = Vec::new();
        for (family, range) in &self.ranges {
            for n in range.clone() {
                out.push(PatternTemplate::new(*family, n)?);
            }
        }
        Ok(out)
    }
}

pub const CATALOG_SIZE: usize = 47;

/// One catalog row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateEntry {
    pub id: String,
    pub family: Family,
    pub n: usize,
    pub props: usize,
    pub skeleton: String,
}

/// The default 47-template catalog, as `(template, skeleton)` pairs.
pub fn all_templates() -> &'static [(PatternTemplate, Skeleton)] {
    static CATALOG: OnceLock<Vec<(PatternTemplate, Skeleton)>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let ts = CatalogConfig::default().templates().expect("default ranges are legal");
        assert_eq!(ts.len(), CATALOG_SIZE, "default catalog must have {CATALOG_SIZE} templates");
        ts.into_iter().map(|t| (t, t.skeleton())).collect()
    })
}

pub fn template_entries() -> Vec<TemplateEntry> {
    all_templates()
        .iter()
        .map(|(t, s)| TemplateEntry {
            id: t.id(),
            family: t.family,
            n: t.n,
            props: t.prop_count(),
            skeleton: print_prefix(s.formula()),
        })
        .collect()
}

/// Index pairs of semantically equivalent skeletons. Fingerprints rule out
/// most pairs; the rest go to the automaton.
pub fn equivalent_pairs(skeletons: &[&Formula]) -> Result<Vec<(usize, usize)>, AutomatonError> {
    let prints: Vec<Fingerprint> = skeletons.iter().map(|f| fingerprint(f)).collect();
    let mut out = Vec::new();
    for i in 0..skeletons.len() {
        for j in i + 1..skeletons.len() {
            if prints[i] == prints[j] && automaton::equivalent(skeletons[i], skeletons[j])? {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Result of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "template")]
pub enum Classification {
    Known(PatternTemplate),
    Unknown,
}

impl Classification {
    pub fn template(&self) -> Option<PatternTemplate> {
        match self {
            Classification::Known(t) => Some(*t),
            Classification::Unknown => None,
        }
    }
}

/// Truth values on a fixed batch of random lassos over the canonical
/// alphabet. Equivalent formulas over the same propositions always share a
/// fingerprint, so it is a cheap prefilter before automaton checks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint([u64; 2]);

struct Probes {
    alphabet: Vec<Prop>,
    traces: Vec<(Vec<u64>, Vec<u64>)>,
}

fn probes() -> &'static Probes {
    static PROBES: OnceLock<Probes> = OnceLock::new();
    PROBES.get_or_init(|| {
        let alphabet: Vec<Prop> = (0..5).map(canonical_prop).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let word = |len: usize, rng: &mut ChaCha8Rng| -> Vec<u64> {
            // biased towards sparse letters so visit-counting patterns differ
            (0..len).map(|_| (0..5).fold(0, |m, i| if rng.gen_bool(0.3) { m | 1 << i } else { m })).collect()
        };
        let traces = (0..128)
            .map(|_| {
                let pl = rng.gen_range(0..=8);
                let cl = rng.gen_range(1..=4);
                (word(pl, &mut rng), word(cl, &mut rng))
            })
            .collect();
        Probes { alphabet, traces }
    })
}

/// Fingerprint of a formula over the canonical props `a, b, c, d, f`; other
/// propositions read as false.
pub fn fingerprint(f: &Formula) -> Fingerprint {
    let pr = probes();
    let ev = LassoEvaluator::compile(f, &pr.alphabet);
    let mut bits = [0u64; 2];
    for (i, (prefix, cycle)) in pr.traces.iter().enumerate() {
        if ev.eval_bits(prefix, cycle) {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    Fingerprint(bits)
}

fn catalog_index() -> &'static HashMap<(usize, Fingerprint), Vec<usize>> {
    static INDEX: OnceLock<HashMap<(usize, Fingerprint), Vec<usize>>> = OnceLock::new();
    INDEX.get_or_init(|| {
        let mut m: HashMap<(usize, Fingerprint), Vec<usize>> = HashMap::new();
        for (i, (t, s)) in all_templates().iter().enumerate() {
            m.entry((t.prop_count(), fingerprint(s.formula()))).or_default().push(i);
        }
        m
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn go(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            go(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    go(0, &mut cur, &mut out);
    out
}

/// The catalog template equivalent to `f` under some renaming of its
/// propositions, or `Unknown`. Only formulas with at most five distinct
/// propositions can match.
pub fn classify(f: &Formula) -> Result<Classification, PatternError> {
    let props = f.props_in_order();
    let k = props.len();
    if k == 0 || k > 5 {
        return Ok(Classification::Unknown);
    }
    let index = catalog_index();
    let templates = all_templates();
    // first-occurrence order first: it is the match for instantiated templates
    for perm in permutations(k) {
        let renaming: Renaming = perm.iter().enumerate().map(|(i, &j)| (props[i].clone(), canonical_prop(j))).collect();
        let g = substitute(f, &renaming).expect("all props bound");
        let Some(cands) = index.get(&(k, fingerprint(&g))) else { continue };
        for &c in cands {
            if automaton::equivalent(&g, templates[c].1.formula())? {
                return Ok(Classification::Known(templates[c].0));
            }
        }
    }
    Ok(Classification::Unknown)
}

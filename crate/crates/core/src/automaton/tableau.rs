//! Negation normal form and the on-the-fly tableau expansion.
//!
//! A tableau node is a set of NNF formulas that must hold from the current
//! position. Expanding it yields terms: a conjunction of literals to read now,
//! the obligations for the next position, and the set of `Until` formulas
//! whose eventuality was not postponed by this step (transition acceptance).

use std::collections::HashMap;
use std::rc::Rc;

use crate::ltl::{Formula, Node, Op, Prop};

use super::{AutomatonError, Guard};

pub(crate) type Id = u32;

const WORK_PER_NODE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Nnf {
    True,
    False,
    Lit(u8, bool),
    And(Id, Id),
    Or(Id, Id),
    Next(Id),
    Until(Id, Id),
    Release(Id, Id),
}

/// Hash-consed NNF nodes.
#[derive(Debug, Default)]
pub(crate) struct Arena {
    nodes: Vec<Nnf>,
    index: HashMap<Nnf, Id>,
}

impl Arena {
    pub fn get(&self, id: Id) -> Nnf {
        self.nodes[id as usize]
    }

    fn intern(&mut self, n: Nnf) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n);
        self.index.insert(n, id);
        id
    }

    fn t(&mut self) -> Id {
        self.intern(Nnf::True)
    }

    fn f(&mut self) -> Id {
        self.intern(Nnf::False)
    }

    fn and(&mut self, a: Id, b: Id) -> Id {
        match (self.get(a), self.get(b)) {
            (Nnf::False, _) | (_, Nnf::False) => self.f(),
            (Nnf::True, _) => b,
            (_, Nnf::True) => a,
            _ if a == b => a,
            _ => self.intern(Nnf::And(a.min(b), a.max(b))),
        }
    }

    fn or(&mut self, a: Id, b: Id) -> Id {
        match (self.get(a), self.get(b)) {
            (Nnf::True, _) | (_, Nnf::True) => self.t(),
            (Nnf::False, _) => b,
            (_, Nnf::False) => a,
            _ if a == b => a,
            _ => self.intern(Nnf::Or(a.min(b), a.max(b))),
        }
    }

    fn next(&mut self, a: Id) -> Id {
        match self.get(a) {
            Nnf::True | Nnf::False => a,
            _ => self.intern(Nnf::Next(a)),
        }
    }

    fn until(&mut self, a: Id, b: Id) -> Id {
        match (self.get(a), self.get(b)) {
            (_, Nnf::True) | (_, Nnf::False) => b,
            (Nnf::False, _) => b,
            _ if a == b => b,
            // x U F y = F y
            (_, Nnf::Until(t, _)) if self.get(t) == Nnf::True => b,
            _ => self.intern(Nnf::Until(a, b)),
        }
    }

    fn release(&mut self, a: Id, b: Id) -> Id {
        match (self.get(a), self.get(b)) {
            (_, Nnf::True) | (_, Nnf::False) => b,
            (Nnf::True, _) => b,
            _ if a == b => b,
            // x R G y = G y
            (_, Nnf::Release(f, _)) if self.get(f) == Nnf::False => b,
            _ => self.intern(Nnf::Release(a, b)),
        }
    }

    /// NNF of `f` (or of its negation when `positive` is false).
    pub fn nnf(&mut self, f: &Formula, positive: bool, alphabet: &HashMap<Prop, u8>) -> Id {
        let mut memo = HashMap::new();
        self.nnf_memo(f, positive, alphabet, &mut memo)
    }

    fn nnf_memo(
        &mut self,
        f: &Formula,
        positive: bool,
        alphabet: &HashMap<Prop, u8>,
        memo: &mut HashMap<(*const Formula, bool), Id>,
    ) -> Id {
        let key = (f as *const Formula, positive);
        if let Some(&id) = memo.get(&key) {
            return id;
        }
        let mut go = |this: &mut Self, g: &Formula, pos: bool| this.nnf_memo(g, pos, alphabet, memo);
        let id = match f.node() {
            Node::Const(b) => {
                if b == positive {
                    self.t()
                } else {
                    self.f()
                }
            }
            Node::Prop(p) => self.intern(Nnf::Lit(alphabet[p], positive)),
            Node::Unary(op, a) => match op {
                Op::Not => go(self, a, !positive),
                Op::Next => {
                    let a = go(self, a, positive);
                    self.next(a)
                }
                Op::Finally | Op::Globally => {
                    let a = go(self, a, positive);
                    if (op == Op::Finally) == positive {
                        let t = self.t();
                        self.until(t, a)
                    } else {
                        let f = self.f();
                        self.release(f, a)
                    }
                }
                _ => unreachable!(),
            },
            Node::Binary(op, a, b) => match (op, positive) {
                (Op::And, _) | (Op::Or, _) => {
                    let (x, y) = (go(self, a, positive), go(self, b, positive));
                    if (op == Op::And) == positive {
                        self.and(x, y)
                    } else {
                        self.or(x, y)
                    }
                }
                (Op::Implies, true) => {
                    let (x, y) = (go(self, a, false), go(self, b, true));
                    self.or(x, y)
                }
                (Op::Implies, false) => {
                    let (x, y) = (go(self, a, true), go(self, b, false));
                    self.and(x, y)
                }
                (Op::Equiv, pos) => {
                    let (pa, na) = (go(self, a, true), go(self, a, false));
                    let (pb, nb) = (go(self, b, true), go(self, b, false));
                    let (x, y) = if pos { (self.and(pa, pb), self.and(na, nb)) } else { (self.and(pa, nb), self.and(na, pb)) };
                    self.or(x, y)
                }
                (Op::Until, pos) => {
                    let (x, y) = (go(self, a, pos), go(self, b, pos));
                    if pos {
                        self.until(x, y)
                    } else {
                        self.release(x, y)
                    }
                }
                // a W b = b R (a | b)
                (Op::WeakUntil, true) => {
                    let (x, y) = (go(self, a, true), go(self, b, true));
                    let r = self.or(x, y);
                    self.release(y, r)
                }
                (Op::WeakUntil, false) => {
                    let (x, y) = (go(self, a, false), go(self, b, false));
                    let r = self.and(x, y);
                    self.until(y, r)
                }
                // a M b = b U (a & b)
                (Op::StrongRelease, true) => {
                    let (x, y) = (go(self, a, true), go(self, b, true));
                    let r = self.and(x, y);
                    self.until(y, r)
                }
                (Op::StrongRelease, false) => {
                    let (x, y) = (go(self, a, false), go(self, b, false));
                    let r = self.or(x, y);
                    self.release(y, r)
                }
                _ => unreachable!(),
            },
        };
        memo.insert(key, id);
        id
    }
}

/// One outgoing option of a tableau node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Term {
    pub guard: Guard,
    pub next: Vec<Id>,
    /// Bit `k` set: the k-th `Until` was not postponed on this step.
    pub acc: u64,
}

pub(crate) struct Expander {
    pub arena: Arena,
    /// Acceptance index of each `Until` node.
    until_index: HashMap<Id, u32>,
    pub until_count: u32,
    pub work: usize,
    pub budget: usize,
    memo: HashMap<Id, Rc<Vec<Partial>>>,
}

/// A term under construction; `postponed` marks untils deferred to the next step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Partial {
    guard: Guard,
    next: Vec<Id>,
    postponed: u64,
}

impl Partial {
    fn dominates(&self, other: &Partial) -> bool {
        self.guard.implied_by(&other.guard)
            && self.postponed & !other.postponed == 0
            && is_subset(&self.next, &other.next)
    }

    fn conjoin(&self, other: &Partial) -> Option<Partial> {
        let pos = self.guard.pos | other.guard.pos;
        let neg = self.guard.neg | other.guard.neg;
        if pos & neg != 0 {
            return None;
        }
        Some(Partial { guard: Guard { pos, neg }, next: merge(&self.next, &other.next), postponed: self.postponed | other.postponed })
    }
}

impl Expander {
    pub fn new(arena: Arena, roots: &[Id], budget: usize) -> Result<Self, AutomatonError> {
        let mut untils = Vec::new();
        let mut stack = roots.to_vec();
        let mut seen = std::collections::HashSet::new();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            match arena.get(id) {
                Nnf::True | Nnf::False | Nnf::Lit(..) => {}
                Nnf::Next(a) => stack.push(a),
                Nnf::Until(a, b) => {
                    untils.push(id);
                    stack.extend([a, b]);
                }
                Nnf::And(a, b) | Nnf::Or(a, b) | Nnf::Release(a, b) => stack.extend([a, b]),
            }
        }
        if untils.len() > 63 {
            return Err(AutomatonError::FormulaTooLarge { budget });
        }
        // stable numbering independent of traversal order
        untils.sort_unstable();
        let until_count = untils.len() as u32;
        let until_index = untils.into_iter().enumerate().map(|(k, id)| (id, k as u32)).collect();
        Ok(Expander { arena, until_index, until_count, work: 0, budget, memo: HashMap::new() })
    }

    pub fn all_acc(&self) -> u64 {
        if self.until_count == 0 {
            0
        } else {
            (1u64 << self.until_count) - 1
        }
    }

    fn charge(&mut self, n: usize) -> Result<(), AutomatonError> {
        self.work += n;
        // expansion work is exponential only in pathological inputs; the cap
        // keeps it proportional to the node budget
        if self.work > self.budget.saturating_mul(WORK_PER_NODE) {
            return Err(AutomatonError::FormulaTooLarge { budget: self.budget });
        }
        Ok(())
    }

    /// All terms of the conjunction `set`, with dominated terms removed.
    pub fn expand(&mut self, set: &[Id]) -> Result<Vec<Term>, AutomatonError> {
        let mut acc = vec![Partial { guard: Guard::TRUE, next: Vec::new(), postponed: 0 }];
        for &id in set {
            let ts = self.terms(id)?;
            acc = self.product(&acc, &ts)?;
        }
        let all = self.all_acc();
        Ok(acc.into_iter().map(|p| Term { guard: p.guard, next: p.next, acc: all & !p.postponed }).collect())
    }

    fn terms(&mut self, id: Id) -> Result<Rc<Vec<Partial>>, AutomatonError> {
        if let Some(t) = self.memo.get(&id) {
            return Ok(t.clone());
        }
        let unit = |guard: Guard, next: Vec<Id>, postponed: u64| vec![Partial { guard, next, postponed }];
        let out = match self.arena.get(id) {
            Nnf::True => unit(Guard::TRUE, vec![], 0),
            Nnf::False => vec![],
            Nnf::Lit(i, pos) => {
                let bit = 1u64 << i;
                let g = if pos { Guard { pos: bit, neg: 0 } } else { Guard { pos: 0, neg: bit } };
                unit(g, vec![], 0)
            }
            Nnf::Next(a) => unit(Guard::TRUE, vec![a], 0),
            Nnf::And(a, b) => {
                let (x, y) = (self.terms(a)?, self.terms(b)?);
                self.product(&x, &y)?
            }
            Nnf::Or(a, b) => {
                let (x, y) = (self.terms(a)?, self.terms(b)?);
                self.union(&x, &y)?
            }
            Nnf::Until(a, b) => {
                let bit = 1u64 << self.until_index[&id];
                let (x, y) = (self.terms(a)?, self.terms(b)?);
                let later = self.product(&x, &unit(Guard::TRUE, vec![id], bit))?;
                self.union(&y, &later)?
            }
            Nnf::Release(a, b) => {
                let (x, y) = (self.terms(a)?, self.terms(b)?);
                let now = self.product(&x, &y)?;
                let later = self.product(&y, &unit(Guard::TRUE, vec![id], 0))?;
                self.union(&now, &later)?
            }
        };
        let out = Rc::new(out);
        self.memo.insert(id, out.clone());
        Ok(out)
    }

    fn product(&mut self, x: &[Partial], y: &[Partial]) -> Result<Vec<Partial>, AutomatonError> {
        self.charge(x.len() * y.len())?;
        let mut out = Vec::with_capacity(x.len() * y.len());
        for p in x {
            for q in y {
                if let Some(r) = p.conjoin(q) {
                    out.push(r);
                }
            }
        }
        Ok(prune(out))
    }

    fn union(&mut self, x: &[Partial], y: &[Partial]) -> Result<Vec<Partial>, AutomatonError> {
        self.charge(x.len() + y.len())?;
        Ok(prune(x.iter().chain(y).cloned().collect()))
    }
}

/// Removes duplicate and dominated terms; the result is sorted.
fn prune(mut terms: Vec<Partial>) -> Vec<Partial> {
    terms.sort_by(|a, b| {
        (a.next.len(), a.guard.pos.count_ones() + a.guard.neg.count_ones(), a.postponed.count_ones())
            .cmp(&(b.next.len(), b.guard.pos.count_ones() + b.guard.neg.count_ones(), b.postponed.count_ones()))
            .then_with(|| a.cmp(b))
    });
    terms.dedup();
    let mut kept: Vec<Partial> = Vec::with_capacity(terms.len());
    // a dominating term is never larger in any component, so it sorts first
    for t in terms {
        if !kept.iter().any(|k| k.dominates(&t)) {
            kept.push(t);
        }
    }
    kept.sort();
    kept
}

fn merge(a: &[Id], b: &[Id]) -> Vec<Id> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn is_subset(a: &[Id], b: &[Id]) -> bool {
    // both sorted
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

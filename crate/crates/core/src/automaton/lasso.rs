//! Ultimately periodic traces and direct LTL evaluation over them.
//!
//! The evaluator works on the formula syntax as written (every operator has
//! its own clause) and shares no code with the automaton construction, so it
//! can serve as an oracle for it.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::ltl::{Formula, Node, Op, Prop};

/// Propositions true at one instant.
pub type Valuation = BTreeSet<Prop>;

/// The infinite word `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoTrace {
    pub prefix: Vec<Valuation>,
    pub cycle: Vec<Valuation>,
}

impl LassoTrace {
    pub fn new(prefix: Vec<Valuation>, cycle: Vec<Valuation>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        LassoTrace { prefix, cycle }
    }

    /// Valuation at absolute position `i` of the infinite word.
    pub fn at(&self, i: usize) -> &Valuation {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = &Valuation> {
        self.prefix.iter().chain(self.cycle.iter())
    }
}

/// Whether `trace` satisfies `f` at position 0. Propositions missing from a
/// valuation are false.
pub fn eval_lasso(f: &Formula, trace: &LassoTrace) -> bool {
    let alphabet: Vec<Prop> = f.props().into_iter().collect();
    let eval = LassoEvaluator::compile(f, &alphabet);
    let encode = |v: &Valuation| -> u64 {
        alphabet.iter().enumerate().filter(|(_, p)| v.contains(*p)).fold(0, |m, (i, _)| m | (1 << i))
    };
    let prefix: Vec<u64> = trace.prefix.iter().map(encode).collect();
    let cycle: Vec<u64> = trace.cycle.iter().map(encode).collect();
    eval.eval_bits(&prefix, &cycle)
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Const(bool),
    Prop(usize),
    Unary(Op, usize),
    Binary(Op, usize, usize),
}

/// A formula compiled to a post-order node table over a fixed alphabet.
/// Letters are bitmasks over alphabet indices.
#[derive(Debug, Clone)]
pub struct LassoEvaluator {
    nodes: Vec<Kind>,
}

impl LassoEvaluator {
    /// Propositions of `f` absent from `alphabet` are treated as always false.
    pub fn compile(f: &Formula, alphabet: &[Prop]) -> Self {
        assert!(alphabet.len() <= 64, "alphabet larger than 64 propositions");
        let index: HashMap<&Prop, usize> = alphabet.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut nodes = Vec::with_capacity(f.size());
        fn go(f: &Formula, index: &HashMap<&Prop, usize>, nodes: &mut Vec<Kind>) -> usize {
            let kind = match f.node() {
                Node::Const(b) => Kind::Const(b),
                Node::Prop(p) => match index.get(p) {
                    Some(&i) => Kind::Prop(i),
                    None => Kind::Const(false),
                },
                Node::Unary(op, a) => Kind::Unary(op, go(a, index, nodes)),
                Node::Binary(op, a, b) => {
                    let l = go(a, index, nodes);
                    let r = go(b, index, nodes);
                    Kind::Binary(op, l, r)
                }
            };
            nodes.push(kind);
            nodes.len() - 1
        }
        go(f, &index, &mut nodes);
        LassoEvaluator { nodes }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Truth of node `j` at a position, from the letter, the truth of its
    /// children at the same position and its own truth at the successor.
    fn local(&self, j: usize, letter: u64, cur: &dyn Fn(usize) -> bool, nxt: &dyn Fn(usize) -> bool) -> bool {
        match self.nodes[j] {
            Kind::Const(b) => b,
            Kind::Prop(i) => letter >> i & 1 == 1,
            Kind::Unary(op, a) => match op {
                Op::Not => !cur(a),
                Op::Next => nxt(a),
                Op::Finally => cur(a) || nxt(j),
                Op::Globally => cur(a) && nxt(j),
                _ => unreachable!("binary operator in unary node"),
            },
            Kind::Binary(op, a, b) => match op {
                Op::And => cur(a) && cur(b),
                Op::Or => cur(a) || cur(b),
                Op::Implies => !cur(a) || cur(b),
                Op::Equiv => cur(a) == cur(b),
                Op::Until | Op::WeakUntil => cur(b) || (cur(a) && nxt(j)),
                Op::StrongRelease => cur(b) && (cur(a) || nxt(j)),
                _ => unreachable!("unary operator in binary node"),
            },
        }
    }

    /// Least-fixpoint operators start from false on the cycle, greatest from true.
    fn greatest(&self, j: usize) -> bool {
        matches!(self.nodes[j], Kind::Unary(Op::Globally, _) | Kind::Binary(Op::WeakUntil, ..))
    }

    /// Truth rows (one `Vec<bool>` per node) for every cycle position.
    fn cycle_rows(&self, cycle: &[u64]) -> Vec<Vec<bool>> {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        let c = cycle.len();
        let mut rows = vec![vec![false; c]; self.nodes.len()];
        for j in 0..self.nodes.len() {
            let mut val = vec![self.greatest(j); c];
            loop {
                let mut changed = false;
                for i in (0..c).rev() {
                    let n = (i + 1) % c;
                    let v = {
                        let rows = &rows;
                        let val = &val;
                        self.local(j, cycle[i], &|k| rows[k][i], &|k| if k == j { val[n] } else { rows[k][n] })
                    };
                    if v != val[i] {
                        val[i] = v;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            rows[j] = val;
        }
        rows
    }

    /// Evaluates on `prefix · cycle^ω` (letters as bitmasks).
    pub fn eval_bits(&self, prefix: &[u64], cycle: &[u64]) -> bool {
        let rows = self.cycle_rows(cycle);
        let mut next: Vec<bool> = rows.iter().map(|r| r[0]).collect();
        for &letter in prefix.iter().rev() {
            next = self.step_back_vec(letter, &next);
        }
        next[self.root()]
    }

    fn step_back_vec(&self, letter: u64, next: &[bool]) -> Vec<bool> {
        let mut cur = vec![false; self.nodes.len()];
        for j in 0..self.nodes.len() {
            let v = {
                let c = &cur;
                self.local(j, letter, &|k| c[k], &|k| next[k])
            };
            cur[j] = v;
        }
        cur
    }

    // Packed variants for formulas with at most 64 nodes; used by bulk checks.

    /// Truth vector (bit per node) at the first cycle position.
    pub fn cycle_entry_bits(&self, cycle: &[u64]) -> u64 {
        assert!(self.nodes.len() <= 64);
        self.cycle_rows(cycle).iter().enumerate().fold(0, |m, (j, r)| m | ((r[0] as u64) << j))
    }

    /// Truth vector at a position reading `letter` whose successor has truth vector `next`.
    pub fn step_back_bits(&self, letter: u64, next: u64) -> u64 {
        assert!(self.nodes.len() <= 64);
        let mut cur = 0u64;
        for j in 0..self.nodes.len() {
            let v = {
                let c = cur;
                self.local(j, letter, &|k| c >> k & 1 == 1, &|k| next >> k & 1 == 1)
            };
            cur |= (v as u64) << j;
        }
        cur
    }

    pub fn root_holds(&self, bits: u64) -> bool {
        bits >> self.root() & 1 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_prefix;

    fn v(props: &[&str]) -> Valuation {
        props.iter().map(|p| Prop::new(*p).unwrap()).collect()
    }

    fn holds(f: &str, prefix: &[&[&str]], cycle: &[&[&str]]) -> bool {
        let t = LassoTrace::new(prefix.iter().map(|p| v(p)).collect(), cycle.iter().map(|p| v(p)).collect());
        eval_lasso(&parse_prefix(f).unwrap(), &t)
    }

    #[test]
    fn examples() {
        assert!(holds("F a", &[&[]], &[&["a"]]));
        assert!(!holds("G a", &[&["a"]], &[&[]]));
        assert!(holds("U a b", &[&["a"], &["a", "b"]], &[&[]]));
    }

    #[test]
    fn operators() {
        assert!(holds("G F a", &[], &[&[], &["a"]]));
        assert!(!holds("F G a", &[], &[&[], &["a"]]));
        assert!(holds("F G a", &[&[]], &[&["a"]]));
        assert!(holds("X a", &[&[], &["a"]], &[&[]]));
        assert!(!holds("U a b", &[], &[&["a"]]));
        assert!(holds("W a b", &[], &[&["a"]]));
        // a M b: b holds up to and including the first a
        assert!(holds("M a b", &[&["b"], &["a", "b"]], &[&[]]));
        assert!(!holds("M a b", &[], &[&["b"]]));
        assert!(holds("G e a X b", &[], &[&[]]));
        assert!(!holds("G e a X b", &[&["a"]], &[&["b"]]));
        assert!(holds("G i a X b", &[], &[&["a", "b"]]));
    }

    #[test]
    fn position_lookup() {
        let t = LassoTrace::new(vec![v(&["x"])], vec![v(&["y"]), v(&[])]);
        assert_eq!(t.at(0), &v(&["x"]));
        assert_eq!(t.at(1), &v(&["y"]));
        assert_eq!(t.at(4), &Valuation::new());
    }

    #[test]
    fn packed_matches_unpacked() {
        let f = parse_prefix("U & a ! b X | b G a").unwrap();
        let alphabet = vec![Prop::new("a").unwrap(), Prop::new("b").unwrap()];
        let e = LassoEvaluator::compile(&f, &alphabet);
        for cycle in [vec![1u64], vec![0, 2], vec![1, 3, 0]] {
            for prefix in [vec![], vec![1], vec![3, 1]] {
                let mut bits = e.cycle_entry_bits(&cycle);
                for &l in prefix.iter().rev() {
                    bits = e.step_back_bits(l, bits);
                }
                assert_eq!(e.root_holds(bits), e.eval_bits(&prefix, &cycle));
            }
        }
    }
}

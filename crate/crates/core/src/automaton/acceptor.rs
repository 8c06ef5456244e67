//! Batched lasso membership for one automaton: per-letter successor sets,
//! forward reachability for prefixes and accepting-cycle sets for cycles, so
//! many `(prefix, cycle)` pairs can be checked without rebuilding products.

use crate::ltl::Prop;

use super::buchi::tarjan;
use super::BuchiAutomaton;

/// A set of automaton states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSet(Vec<u64>);

impl StateSet {
    fn empty(n: usize) -> Self {
        StateSet(vec![0; n.div_ceil(64).max(1)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b))
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

#[derive(Debug, Clone)]
pub struct LassoAcceptor {
    n: usize,
    initial: usize,
    accepting: Vec<bool>,
    /// `succ[letter][state]`, letters over the caller's alphabet.
    succ: Vec<Vec<Vec<u32>>>,
}

impl LassoAcceptor {
    /// `alphabet` fixes the bit order of letters passed to the other methods;
    /// automaton propositions missing from it read as false.
    pub fn new(ba: &BuchiAutomaton, alphabet: &[Prop]) -> Self {
        assert!(alphabet.len() <= 16, "letter enumeration limited to 16 propositions");
        let map: Vec<Option<usize>> = ba.alphabet().iter().map(|p| alphabet.iter().position(|q| q == p)).collect();
        let to_ba = |letter: u64| -> u64 {
            map.iter().enumerate().filter(|(_, j)| j.is_some_and(|j| letter >> j & 1 == 1)).fold(0, |m, (i, _)| m | 1 << i)
        };
        let succ = (0..1u64 << alphabet.len())
            .map(|letter| {
                let l = to_ba(letter);
                ba.states()
                    .iter()
                    .map(|s| s.edges.iter().filter(|e| e.guard.matches(l)).map(|e| e.target as u32).collect())
                    .collect()
            })
            .collect();
        LassoAcceptor {
            n: ba.states().len(),
            initial: ba.initial(),
            accepting: ba.states().iter().map(|s| s.accepting).collect(),
            succ,
        }
    }

    pub fn initial_set(&self) -> StateSet {
        let mut s = StateSet::empty(self.n);
        s.insert(self.initial);
        s
    }

    pub fn step(&self, from: &StateSet, letter: u64) -> StateSet {
        let mut out = StateSet::empty(self.n);
        for q in from.iter() {
            for &t in &self.succ[letter as usize][q] {
                out.insert(t as usize);
            }
        }
        out
    }

    /// States reachable from the initial state by reading `prefix`.
    pub fn reach(&self, prefix: &[u64]) -> StateSet {
        prefix.iter().fold(self.initial_set(), |s, &l| self.step(&s, l))
    }

    /// States from which `cycle^ω` has an accepting run.
    pub fn cycle_winners(&self, cycle: &[u64]) -> StateSet {
        assert!(!cycle.is_empty());
        let c = cycle.len();
        let id = |q: usize, i: usize| q * c + i;
        let total = self.n * c;
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); total];
        for q in 0..self.n {
            for (i, &l) in cycle.iter().enumerate() {
                adj[id(q, i)] = self.succ[l as usize][q].iter().map(|&t| id(t as usize, (i + 1) % c) as u32).collect();
            }
        }
        let roots: Vec<u32> = (0..total as u32).collect();
        let comp = tarjan(&adj, &roots);
        let ncomp = comp.iter().copied().max().map_or(0, |m| m as usize + 1);
        // components come out in reverse topological order: successors first
        let mut size = vec![0usize; ncomp];
        let mut has_acc = vec![false; ncomp];
        let mut self_loop = vec![false; ncomp];
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
        for v in 0..total {
            let k = comp[v] as usize;
            size[k] += 1;
            has_acc[k] |= self.accepting[v / c];
            self_loop[k] |= adj[v].contains(&(v as u32));
            members[k].push(v);
        }
        let mut good = vec![false; ncomp];
        for k in 0..ncomp {
            let mut g = has_acc[k] && (size[k] > 1 || self_loop[k]);
            if !g {
                g = members[k].iter().any(|&v| adj[v].iter().any(|&w| good[comp[w as usize] as usize]));
            }
            good[k] = g;
        }
        let mut out = StateSet::empty(self.n);
        for q in 0..self.n {
            if good[comp[id(q, 0)] as usize] {
                out.insert(q);
            }
        }
        out
    }

    pub fn accepts(&self, prefix: &[u64], cycle: &[u64]) -> bool {
        self.reach(prefix).intersects(&self.cycle_winners(cycle))
    }

    pub fn state_count(&self) -> usize {
        self.n
    }

    pub fn contains(&self, set: &StateSet, q: usize) -> bool {
        set.contains(q)
    }
}

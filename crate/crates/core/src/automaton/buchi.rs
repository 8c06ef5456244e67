use std::collections::HashMap;
use std::fmt::Write as _;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::ltl::{print_infix, print_prefix, Formula, Prop};

use super::emptiness::{nested_dfs, ExplicitGraph, OmegaGraph};
use super::tableau::{Arena, Expander, Id};
use super::{AutomatonError, BuildOptions, Emptiness, Guard, LassoTrace, Valuation};

/// Degeneralized tableau automaton, expanded on demand.
///
/// States are pairs (tableau node, level). With `k` until-eventualities,
/// levels run `0..=k`; a state is accepting at level `k`.
pub(crate) struct LazyBuchi {
    alphabet: Vec<Prop>,
    exp: Expander,
    nodes: Vec<Vec<Id>>,
    node_index: HashMap<Vec<Id>, u32>,
    node_terms: Vec<Option<Rc<[(Guard, u32, u64)]>>>,
    states: Vec<(u32, u32)>,
    state_index: HashMap<(u32, u32), u32>,
    succ: Vec<Option<Rc<[(Guard, u32)]>>>,
    initial: u32,
}

impl LazyBuchi {
    /// Automaton for the conjunction of the given formulas, each taken
    /// positively or negated.
    pub fn new(parts: &[(&Formula, bool)], alphabet: &[Prop], opts: BuildOptions) -> Result<Self, AutomatonError> {
        if alphabet.len() > 64 {
            return Err(AutomatonError::AlphabetTooLarge(alphabet.len()));
        }
        let index: HashMap<Prop, u8> = alphabet.iter().enumerate().map(|(i, p)| (p.clone(), i as u8)).collect();
        for (f, _) in parts {
            if let Some(p) = f.props().into_iter().find(|p| !index.contains_key(p)) {
                panic!("proposition `{p}` missing from the automaton alphabet");
            }
        }
        let mut arena = Arena::default();
        let mut roots: Vec<Id> = parts.iter().map(|(f, pos)| arena.nnf(f, *pos, &index)).collect();
        roots.sort_unstable();
        roots.dedup();
        let exp = Expander::new(arena, &roots, opts.node_budget)?;
        let mut lazy = LazyBuchi {
            alphabet: alphabet.to_vec(),
            exp,
            nodes: Vec::new(),
            node_index: HashMap::new(),
            node_terms: Vec::new(),
            states: Vec::new(),
            state_index: HashMap::new(),
            succ: Vec::new(),
            initial: 0,
        };
        let n = lazy.intern_node(roots)?;
        lazy.initial = lazy.intern_state(n, 0);
        Ok(lazy)
    }

    pub fn alphabet(&self) -> &[Prop] {
        &self.alphabet
    }

    fn levels(&self) -> u32 {
        self.exp.until_count
    }

    fn intern_node(&mut self, set: Vec<Id>) -> Result<u32, AutomatonError> {
        if let Some(&n) = self.node_index.get(&set) {
            return Ok(n);
        }
        if self.nodes.len() >= self.exp.budget {
            return Err(AutomatonError::FormulaTooLarge { budget: self.exp.budget });
        }
        let n = self.nodes.len() as u32;
        self.nodes.push(set.clone());
        self.node_index.insert(set, n);
        self.node_terms.push(None);
        Ok(n)
    }

    fn intern_state(&mut self, node: u32, level: u32) -> u32 {
        *self.state_index.entry((node, level)).or_insert_with(|| {
            self.states.push((node, level));
            self.succ.push(None);
            (self.states.len() - 1) as u32
        })
    }

    fn terms(&mut self, node: u32) -> Result<Rc<[(Guard, u32, u64)]>, AutomatonError> {
        if let Some(t) = &self.node_terms[node as usize] {
            return Ok(t.clone());
        }
        let set = self.nodes[node as usize].clone();
        let terms = self.exp.expand(&set)?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let target = self.intern_node(t.next)?;
            out.push((t.guard, target, t.acc));
        }
        let out: Rc<[(Guard, u32, u64)]> = out.into();
        self.node_terms[node as usize] = Some(out.clone());
        Ok(out)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn emptiness(&mut self) -> Result<Emptiness, AutomatonError> {
        let alphabet = self.alphabet.clone();
        Ok(match nested_dfs(self)? {
            None => Emptiness::Empty,
            Some((prefix, cycle)) => Emptiness::NonEmpty(LassoTrace::new(
                prefix.iter().map(|g| g.witness(&alphabet)).collect(),
                cycle.iter().map(|g| g.witness(&alphabet)).collect(),
            )),
        })
    }
}

impl OmegaGraph for LazyBuchi {
    type Label = Guard;

    fn initial(&mut self) -> Result<u32, AutomatonError> {
        Ok(self.initial)
    }

    fn successors(&mut self, s: u32) -> Result<Rc<[(Guard, u32)]>, AutomatonError> {
        if let Some(v) = &self.succ[s as usize] {
            return Ok(v.clone());
        }
        let (node, level) = self.states[s as usize];
        let k = self.levels();
        let terms = self.terms(node)?;
        let mut out = Vec::with_capacity(terms.len());
        for &(guard, target, acc) in terms.iter() {
            let mut l = if level == k { 0 } else { level };
            while l < k && acc >> l & 1 == 1 {
                l += 1;
            }
            out.push((guard, self.intern_state(target, l)));
        }
        let out: Rc<[(Guard, u32)]> = out.into();
        self.succ[s as usize] = Some(out.clone());
        Ok(out)
    }

    fn accepting(&self, s: u32) -> bool {
        self.states[s as usize].1 == self.levels()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub guard: Guard,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuchiState {
    pub accepting: bool,
    pub edges: Vec<Edge>,
}

/// State-based Büchi automaton with one initial state. Edge guards are
/// conjunctions of literals over `alphabet`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    alphabet: Vec<Prop>,
    states: Vec<BuchiState>,
    initial: usize,
}

impl BuchiAutomaton {
    pub fn alphabet(&self) -> &[Prop] {
        &self.alphabet
    }

    pub fn states(&self) -> &[BuchiState] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Fully expands `lazy`, then keeps only reachable states from which an
    /// accepting cycle is reachable. An empty language leaves a single
    /// rejecting initial state.
    pub(crate) fn explore(lazy: &mut LazyBuchi) -> Result<Self, AutomatonError> {
        let init = lazy.initial()?;
        let mut order = vec![init];
        let mut explored: Vec<Rc<[(Guard, u32)]>> = Vec::new();
        let mut seen = std::collections::HashSet::from([init]);
        while explored.len() < order.len() {
            let succ = lazy.successors(order[explored.len()])?;
            for &(_, t) in succ.iter() {
                if seen.insert(t) {
                    order.push(t);
                }
            }
            explored.push(succ);
        }
        let n = lazy.state_count();
        let mut adj: Vec<Rc<[(Guard, u32)]>> = vec![Rc::from(Vec::new()); n];
        for (&s, succ) in order.iter().zip(explored) {
            adj[s as usize] = succ;
        }
        let succ: Vec<Vec<u32>> = adj.iter().map(|v| v.iter().map(|&(_, t)| t).collect()).collect();
        let accepting: Vec<bool> = (0..n as u32).map(|s| lazy.accepting(s)).collect();
        let live = live_states(&succ, &accepting, &order);

        let alphabet = lazy.alphabet().to_vec();
        if !live[init as usize] {
            return Ok(BuchiAutomaton { alphabet, states: vec![BuchiState { accepting: false, edges: vec![] }], initial: 0 });
        }
        let mut renumber = vec![usize::MAX; n];
        let kept: Vec<u32> = order.iter().copied().filter(|&s| live[s as usize]).collect();
        for (new, &old) in kept.iter().enumerate() {
            renumber[old as usize] = new;
        }
        let states = kept
            .iter()
            .map(|&s| {
                let mut edges: Vec<Edge> = adj[s as usize]
                    .iter()
                    .filter(|(_, t)| live[*t as usize])
                    .map(|&(guard, t)| Edge { guard, target: renumber[t as usize] })
                    .collect();
                edges.sort_by_key(|e| (e.target, e.guard));
                edges.dedup();
                BuchiState { accepting: accepting[s as usize], edges }
            })
            .collect();
        Ok(BuchiAutomaton { alphabet, states, initial: 0 })
    }

    fn graph(&self) -> ExplicitGraph<Guard> {
        ExplicitGraph {
            initial: self.initial as u32,
            succ: self.states.iter().map(|s| s.edges.iter().map(|e| (e.guard, e.target as u32)).collect::<Vec<_>>().into()).collect(),
            accepting: self.states.iter().map(|s| s.accepting).collect(),
        }
    }

    pub fn emptiness(&self) -> Emptiness {
        match nested_dfs(&mut self.graph()).expect("explicit graphs do not fail") {
            None => Emptiness::Empty,
            Some((prefix, cycle)) => Emptiness::NonEmpty(LassoTrace::new(
                prefix.iter().map(|g| g.witness(&self.alphabet)).collect(),
                cycle.iter().map(|g| g.witness(&self.alphabet)).collect(),
            )),
        }
    }

    pub fn encode(&self, v: &Valuation) -> u64 {
        self.alphabet.iter().enumerate().filter(|(_, p)| v.contains(*p)).fold(0, |m, (i, _)| m | 1 << i)
    }

    /// Membership of a lasso word, by nested DFS on the product with the
    /// word's position automaton.
    pub fn accepts(&self, trace: &LassoTrace) -> bool {
        let word: Vec<u64> = trace.letters().map(|v| self.encode(v)).collect();
        let p = trace.prefix.len();
        let len = word.len();
        let n = self.states.len();
        let id = |q: usize, i: usize| (q * len + i) as u32;
        let mut succ = Vec::with_capacity(n * len);
        let mut accepting = Vec::with_capacity(n * len);
        for s in &self.states {
            for (i, &letter) in word.iter().enumerate() {
                let j = if i + 1 < len { i + 1 } else { p };
                let out: Vec<((), u32)> =
                    s.edges.iter().filter(|e| e.guard.matches(letter)).map(|e| ((), id(e.target, j))).collect();
                succ.push(out.into());
                accepting.push(s.accepting);
            }
        }
        let mut g = ExplicitGraph { initial: id(self.initial, 0), succ, accepting };
        nested_dfs(&mut g).expect("explicit graphs do not fail").is_some()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                serde_json::json!({
                    "id": i,
                    "accepting": s.accepting,
                    "edges": s.edges.iter().map(|e| serde_json::json!({
                        "target": e.target,
                        "guard": self.guard_prefix(&e.guard),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "alphabet": self.alphabet,
            "initial": self.initial,
            "states": states,
        })
    }

    fn guard_prefix(&self, g: &Guard) -> String {
        print_prefix(&g.to_formula(&self.alphabet))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph buchi {\n  rankdir=LR;\n  init [shape=point];\n");
        for (i, s) in self.states.iter().enumerate() {
            let shape = if s.accepting { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  s{i} [shape={shape}];");
        }
        let _ = writeln!(out, "  init -> s{};", self.initial);
        for (i, s) in self.states.iter().enumerate() {
            for e in &s.edges {
                let label = print_infix(&e.guard.to_formula(&self.alphabet)).replace('"', "\\\"");
                let _ = writeln!(out, "  s{i} -> s{} [label=\"{label}\"];", e.target);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// States (among `order`) from which an accepting state on a cycle is reachable.
fn live_states(succ: &[Vec<u32>], accepting: &[bool], order: &[u32]) -> Vec<bool> {
    let n = succ.len();
    let comp = tarjan(succ, order);
    let mut comp_size: HashMap<u32, usize> = HashMap::new();
    for &s in order {
        *comp_size.entry(comp[s as usize]).or_default() += 1;
    }
    let mut live = vec![false; n];
    let mut stack = Vec::new();
    for &s in order {
        let c = comp[s as usize];
        let cyclic = comp_size[&c] > 1 || succ[s as usize].contains(&s);
        if accepting[s as usize] && cyclic {
            live[s as usize] = true;
            stack.push(s);
        }
    }
    let mut pred: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &s in order {
        for &t in &succ[s as usize] {
            pred[t as usize].push(s);
        }
    }
    while let Some(t) = stack.pop() {
        for &s in &pred[t as usize] {
            if !live[s as usize] {
                live[s as usize] = true;
                stack.push(s);
            }
        }
    }
    live
}

/// Strongly connected components (iterative Tarjan). Returns a component id
/// per state; ids are assigned in reverse topological order.
pub(crate) fn tarjan(succ: &[Vec<u32>], roots: &[u32]) -> Vec<u32> {
    const UNSEEN: u32 = u32::MAX;
    let n = succ.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![UNSEEN; n];
    let mut on = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0u32;
    let mut ncomp = 0u32;
    for &r in roots {
        if index[r as usize] != UNSEEN {
            continue;
        }
        let mut call: Vec<(u32, usize)> = vec![(r, 0)];
        index[r as usize] = counter;
        low[r as usize] = counter;
        counter += 1;
        stack.push(r);
        on[r as usize] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v as usize].len() {
                let w = succ[v as usize][*i];
                *i += 1;
                if index[w as usize] == UNSEEN {
                    index[w as usize] = counter;
                    low[w as usize] = counter;
                    counter += 1;
                    stack.push(w);
                    on[w as usize] = true;
                    call.push((w, 0));
                } else if on[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u as usize] = low[u as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().unwrap();
                    on[w as usize] = false;
                    comp[w as usize] = ncomp;
                    if w == v {
                        break;
                    }
                }
                ncomp += 1;
            }
        }
    }
    comp
}

//! Graph planning against an LTL task: the product of a labeled map with the
//! task's Büchi automaton, searched for an accepting lasso.
//!
//! The robot may always stay where it is, so every node carries an implicit
//! self-loop and a finite walk extends to a lasso by stuttering its last node.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{self, tarjan, AutomatonError, LassoTrace, Valuation};
use crate::grounding::SemanticDB;
use crate::ltl::{Formula, Prop};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("proposition `{0}` does not label any map node")]
    UnknownProposition(Prop),
    #[error("unknown map node `{0}`")]
    UnknownNode(String),
    #[error("duplicate map node `{0}`")]
    DuplicateNode(String),
    #[error("label `{0}` is not a key of the semantic database")]
    UnknownLabel(Prop),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("map file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapNode {
    pub name: String,
    #[serde(default)]
    pub labels: Vec<Prop>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawMap {
    nodes: Vec<MapNode>,
    edges: Vec<(String, String)>,
    #[serde(default)]
    undirected: bool,
    initial: String,
}

/// Labeled navigation graph. Edges are directed moves unless the map is
/// marked `undirected`; staying put is always allowed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct SemanticMap {
    raw: RawMap,
    initial: usize,
    moves: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

impl TryFrom<RawMap> for SemanticMap {
    type Error = PlanError;

    fn try_from(raw: RawMap) -> Result<Self, PlanError> {
        let mut index = HashMap::new();
        for (i, n) in raw.nodes.iter().enumerate() {
            if index.insert(n.name.clone(), i).is_some() {
                return Err(PlanError::DuplicateNode(n.name.clone()));
            }
        }
        let find = |name: &str| index.get(name).copied().ok_or_else(|| PlanError::UnknownNode(name.to_string()));
        let mut moves: Vec<Vec<usize>> = (0..raw.nodes.len()).map(|i| vec![i]).collect();
        for (a, b) in &raw.edges {
            let (a, b) = (find(a)?, find(b)?);
            moves[a].push(b);
            if raw.undirected {
                moves[b].push(a);
            }
        }
        for m in &mut moves {
            m.sort_unstable();
            m.dedup();
        }
        let initial = find(&raw.initial)?;
        Ok(SemanticMap { raw, initial, moves, index })
    }
}

impl From<SemanticMap> for RawMap {
    fn from(m: SemanticMap) -> RawMap {
        m.raw
    }
}

impl SemanticMap {
    pub fn new(
        nodes: Vec<MapNode>,
        edges: Vec<(String, String)>,
        undirected: bool,
        initial: &str,
    ) -> Result<Self, PlanError> {
        SemanticMap::try_from(RawMap { nodes, edges, undirected, initial: initial.to_string() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PlanError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn nodes(&self) -> &[MapNode] {
        &self.raw.nodes
    }

    pub fn initial(&self) -> &str {
        &self.raw.initial
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Nodes reachable in one step from `node`, including `node` itself.
    pub fn moves(&self, node: usize) -> &[usize] {
        &self.moves[node]
    }

    pub fn can_move(&self, from: &str, to: &str) -> bool {
        match (self.node_index(from), self.node_index(to)) {
            (Some(a), Some(b)) => self.moves[a].binary_search(&b).is_ok(),
            _ => false,
        }
    }

    pub fn label_alphabet(&self) -> BTreeSet<Prop> {
        self.raw.nodes.iter().flat_map(|n| n.labels.iter().cloned()).collect()
    }

    pub fn valuation(&self, node: usize) -> Valuation {
        self.raw.nodes[node].labels.iter().cloned().collect()
    }

    /// Every label must name a database entry.
    pub fn check_labels(&self, db: &SemanticDB) -> Result<(), PlanError> {
        match self.label_alphabet().into_iter().find(|p| !db.contains(p)) {
            Some(p) => Err(PlanError::UnknownLabel(p)),
            None => Ok(()),
        }
    }
}

/// A walk `prefix · cycle^ω` of node names starting at the initial node (the
/// first prefix node, or the first cycle node when the prefix is empty). An
/// empty cycle means the robot stays at the last prefix node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub prefix: Vec<String>,
    pub cycle: Vec<String>,
}

impl Plan {
    /// The plan with an empty cycle replaced by a stutter of the last node.
    fn closed(&self) -> Option<(Vec<&str>, Vec<&str>)> {
        let prefix: Vec<&str> = self.prefix.iter().map(String::as_str).collect();
        let cycle: Vec<&str> = if self.cycle.is_empty() {
            vec![*prefix.last()?]
        } else {
            self.cycle.iter().map(String::as_str).collect()
        };
        Some((prefix, cycle))
    }

    /// The valuation trace the walk induces on `map`, if all nodes exist.
    pub fn trace(&self, map: &SemanticMap) -> Option<LassoTrace> {
        let (prefix, cycle) = self.closed()?;
        let val = |names: &[&str]| -> Option<Vec<Valuation>> {
            names.iter().map(|n| map.node_index(n).map(|i| map.valuation(i))).collect()
        };
        Some(LassoTrace::new(val(&prefix)?, val(&cycle)?))
    }

    /// Whether the plan is a walk on `map`: it starts at the initial node,
    /// every step is a move and the cycle closes.
    pub fn is_walk_on(&self, map: &SemanticMap) -> bool {
        let Some((prefix, cycle)) = self.closed() else { return false };
        let walk: Vec<&str> = prefix.iter().chain(cycle.iter()).copied().collect();
        walk[0] == map.initial()
            && walk.windows(2).all(|w| map.can_move(w[0], w[1]))
            && map.can_move(cycle[cycle.len() - 1], cycle[0])
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prefix: {}", self.prefix.join(" -> "))?;
        if self.cycle.is_empty() {
            write!(f, "\ncycle: (stay)")
        } else {
            write!(f, "\ncycle: {}", self.cycle.join(" -> "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnsatReason {
    /// The formula has no model at all.
    FormulaUnsatisfiable,
    /// The formula has models, but no walk on this map produces one.
    NoRunInMap,
}

impl fmt::Display for UnsatReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnsatReason::FormulaUnsatisfiable => "the automaton accepts no trace",
            UnsatReason::NoRunInMap => "no accepting run of the automaton is realizable on the map",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanOutcome {
    Plan(Plan),
    Unsatisfiable { reason: UnsatReason },
}

impl PlanOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            PlanOutcome::Plan(p) => Some(p),
            PlanOutcome::Unsatisfiable { .. } => None,
        }
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, PlanOutcome::Unsatisfiable { .. })
    }
}

/// Shortest-prefix accepting lasso in the product of `map` and the automaton
/// of `f`. A product state `(n, q)` is "at node n, about to read its labels".
pub fn plan(map: &SemanticMap, f: &Formula) -> Result<PlanOutcome, PlanError> {
    let labels = map.label_alphabet();
    if let Some(p) = f.props().into_iter().find(|p| !labels.contains(p)) {
        return Err(PlanError::UnknownProposition(p));
    }
    let ba = automaton::to_buchi(f)?;
    if ba.emptiness().is_empty() {
        return Ok(PlanOutcome::Unsatisfiable { reason: UnsatReason::FormulaUnsatisfiable });
    }
    let nq = ba.states().len();
    let letters: Vec<u64> = (0..map.nodes().len()).map(|n| ba.encode(&map.valuation(n))).collect();
    let total = map.nodes().len() * nq;

    let mut succ: Vec<Vec<u32>> = vec![Vec::new(); total];
    let mut parent = vec![u32::MAX; total];
    let start = (map.initial * nq + ba.initial()) as u32;
    let mut order = vec![start];
    parent[start as usize] = start;
    let mut head = 0;
    while head < order.len() {
        let s = order[head] as usize;
        head += 1;
        let (n, q) = (s / nq, s % nq);
        let mut out = Vec::new();
        for e in ba.states()[q].edges.iter().filter(|e| e.guard.matches(letters[n])) {
            for &m in map.moves(n) {
                out.push((m * nq + e.target) as u32);
            }
        }
        out.sort_unstable();
        out.dedup();
        for &t in &out {
            if parent[t as usize] == u32::MAX {
                parent[t as usize] = s as u32;
                order.push(t);
            }
        }
        succ[s] = out;
    }

    let comp = tarjan(&succ, &order);
    let mut comp_size: HashMap<u32, usize> = HashMap::new();
    for &s in &order {
        *comp_size.entry(comp[s as usize]).or_default() += 1;
    }
    let target = order.iter().copied().find(|&s| {
        let s = s as usize;
        ba.states()[s % nq].accepting && (comp_size[&comp[s]] > 1 || succ[s].contains(&(s as u32)))
    });
    let Some(target) = target else {
        return Ok(PlanOutcome::Unsatisfiable { reason: UnsatReason::NoRunInMap });
    };

    let name = |s: u32| map.nodes()[s as usize / nq].name.clone();
    let mut prefix = Vec::new();
    let mut s = target;
    while s != start {
        s = parent[s as usize];
        prefix.push(name(s));
    }
    prefix.reverse();
    let cycle = shortest_cycle(&succ, target).into_iter().map(name).collect();
    Ok(PlanOutcome::Plan(Plan { prefix, cycle }))
}

/// States of a shortest cycle through `s`, starting with `s`.
fn shortest_cycle(succ: &[Vec<u32>], s: u32) -> Vec<u32> {
    let mut parent: HashMap<u32, u32> = HashMap::new();
    let mut queue = VecDeque::new();
    for &t in &succ[s as usize] {
        if t == s {
            return vec![s];
        }
        if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(t) {
            v.insert(s);
            queue.push_back(t);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &t in &succ[u as usize] {
            if t == s {
                let mut path = vec![u];
                let mut v = u;
                while parent[&v] != s {
                    v = parent[&v];
                    path.push(v);
                }
                path.push(s);
                path.reverse();
                return path;
            }
            if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(t) {
                v.insert(u);
                queue.push_back(t);
            }
        }
    }
    unreachable!("state lies on a cycle of its component")
}

/// Independent check of a plan: a walk on the map whose label trace satisfies
/// `f` under direct lasso evaluation. Malformed plans are rejected.
pub fn verify(map: &SemanticMap, f: &Formula, plan: &Plan) -> bool {
    if !plan.is_walk_on(map) {
        return false;
    }
    plan.trace(map).is_some_and(|t| automaton::eval_lasso(f, &t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_prefix;

    fn node(name: &str, labels: &[&str]) -> MapNode {
        MapNode { name: name.into(), labels: labels.iter().map(|l| Prop::new(*l).unwrap()).collect() }
    }

    fn line(names: &[(&str, &[&str])]) -> SemanticMap {
        let nodes = names.iter().map(|(n, l)| node(n, l)).collect();
        let edges = names.windows(2).map(|w| (w[0].0.to_string(), w[1].0.to_string())).collect();
        SemanticMap::new(nodes, edges, true, names[0].0).unwrap()
    }

    #[test]
    fn reaches_the_desk() {
        let map = line(&[("start", &[]), ("desk", &["desk"])]);
        let f = parse_prefix("F desk").unwrap();
        let out = plan(&map, &f).unwrap();
        let p = out.plan().unwrap();
        assert_eq!(p.prefix[..2], ["start", "desk"]);
        assert!(verify(&map, &f, p));
    }

    #[test]
    fn unsatisfiable_specs() {
        let map = line(&[("start", &[]), ("counter", &["counter"]), ("desk", &["desk"]), ("shelf", &["shelf"])]);
        let f = parse_prefix("& F counter G ! counter").unwrap();
        assert_eq!(plan(&map, &f).unwrap(), PlanOutcome::Unsatisfiable { reason: UnsatReason::FormulaUnsatisfiable });
        let f = parse_prefix("& U ! desk shelf U ! shelf desk").unwrap();
        assert!(plan(&map, &f).unwrap().is_unsat());
        // the shelf is only reachable through the desk
        let f = parse_prefix("& F shelf G ! desk").unwrap();
        assert_eq!(plan(&map, &f).unwrap(), PlanOutcome::Unsatisfiable { reason: UnsatReason::NoRunInMap });
    }

    #[test]
    fn ordered_visit_rejects_swapped_plan() {
        let map = line(&[("a", &["a"]), ("s", &[]), ("b", &["b"])]);
        let map = SemanticMap::new(map.nodes().to_vec(), vec![("s".into(), "a".into()), ("s".into(), "b".into())], true, "s")
            .unwrap();
        let f = parse_prefix("& F b U ! b a").unwrap();
        let good = Plan { prefix: vec!["s".into(), "a".into(), "s".into()], cycle: vec!["b".into()] };
        let bad = Plan { prefix: vec!["s".into(), "b".into(), "s".into()], cycle: vec!["a".into()] };
        assert!(verify(&map, &f, &good));
        assert!(!verify(&map, &f, &bad));
        assert!(verify(&map, &f, plan(&map, &f).unwrap().plan().unwrap()));
    }

    #[test]
    fn empty_cycle_stutters() {
        let map = line(&[("start", &[]), ("desk", &["desk"])]);
        let f = parse_prefix("F G desk").unwrap();
        let p = Plan { prefix: vec!["start".into(), "desk".into()], cycle: vec![] };
        assert!(verify(&map, &f, &p));
        let p = Plan { prefix: vec!["start".into()], cycle: vec![] };
        assert!(!verify(&map, &f, &p));
    }

    #[test]
    fn malformed_plans_fail() {
        let map = line(&[("start", &[]), ("mid", &[]), ("desk", &["desk"])]);
        let f = parse_prefix("F desk").unwrap();
        let jump = Plan { prefix: vec!["start".into()], cycle: vec!["desk".into()] };
        assert!(!verify(&map, &f, &jump));
        let wrong_start = Plan { prefix: vec!["desk".into()], cycle: vec!["desk".into()] };
        assert!(!verify(&map, &f, &wrong_start));
    }

    #[test]
    fn unknown_proposition() {
        let map = line(&[("start", &[]), ("desk", &["desk"])]);
        let f = parse_prefix("F couch").unwrap();
        assert!(matches!(plan(&map, &f), Err(PlanError::UnknownProposition(p)) if p.as_str() == "couch"));
    }

    #[test]
    fn directed_edges() {
        let nodes = vec![node("s", &[]), node("a", &["a"])];
        let map = SemanticMap::new(nodes, vec![("s".into(), "a".into())], false, "s").unwrap();
        assert!(plan(&map, &parse_prefix("F a").unwrap()).unwrap().plan().is_some());
        assert!(plan(&map, &parse_prefix("G F & ! a F a").unwrap()).unwrap().is_unsat());
    }
}

#![allow(dead_code)]

pub mod semantics;

use std::collections::HashSet;
use std::path::PathBuf;

use ltlground::ltl::{Formula, Prop};
use ltlground::planner::{MapNode, SemanticMap};
use rand::Rng;

use semantics::Semantics;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Random map with 2..=max_nodes nodes; every prop labels at least one node.
pub fn random_map<R: Rng>(rng: &mut R, max_nodes: usize, props: &[Prop]) -> SemanticMap {
    let n = rng.gen_range(2..=max_nodes);
    let mut labels: Vec<Vec<Prop>> = (0..n)
        .map(|_| props.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect())
        .collect();
    for p in props {
        if !labels.iter().any(|l| l.contains(p)) {
            labels[rng.gen_range(0..n)].push(p.clone());
        }
    }
    let nodes = labels.into_iter().enumerate().map(|(i, labels)| MapNode { name: format!("n{i}"), labels }).collect();
    let undirected = rng.gen_bool(0.5);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(0.35) {
                edges.push((format!("n{a}"), format!("n{b}")));
            }
        }
    }
    SemanticMap::new(nodes, edges, undirected, "n0").unwrap()
}

/// Brute force: is there a walk `prefix · cycle^ω` on `map` from its initial
/// node, with |prefix| <= max_prefix and 1 <= |cycle| <= max_cycle, whose
/// label trace satisfies `f`? Cycles are enumerated explicitly; prefixes are
/// walked backwards from each cycle entry with direct lasso evaluation.
pub fn bounded_lasso_exists(map: &SemanticMap, f: &Formula, max_prefix: usize, max_cycle: usize) -> bool {
    let alphabet: Vec<Prop> = f.props().into_iter().collect();
    let ev = Semantics::compile(f, &alphabet);
    let n = map.nodes().len();
    let letter: Vec<u64> = (0..n)
        .map(|i| {
            let v = map.valuation(i);
            alphabet.iter().enumerate().filter(|(_, p)| v.contains(*p)).fold(0, |m, (j, _)| m | 1 << j)
        })
        .collect();
    let initial = map.node_index(map.initial()).unwrap();
    let pred: Vec<Vec<usize>> = (0..n).map(|t| (0..n).filter(|&s| map.moves(s).contains(&t)).collect()).collect();

    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for c0 in 0..n {
        let mut stack = vec![vec![c0]];
        while let Some(walk) = stack.pop() {
            let last = *walk.last().unwrap();
            if map.moves(last).contains(&c0) {
                cycles.push(walk.clone());
            }
            if walk.len() < max_cycle {
                for &m in map.moves(last) {
                    let mut w = walk.clone();
                    w.push(m);
                    stack.push(w);
                }
            }
        }
    }
    let mut tried: HashSet<(usize, semantics::Bits)> = HashSet::new();
    for c in cycles {
        let word: Vec<u64> = c.iter().map(|&i| letter[i]).collect();
        let entry = ev.cycle_entry(&word);
        if !tried.insert((c[0], entry)) {
            continue;
        }
        // (node at this position, truth vector at this position)
        let mut layer: HashSet<(usize, semantics::Bits)> = HashSet::from([(c[0], entry)]);
        for depth in 0..=max_prefix {
            if layer.iter().any(|&(node, bits)| node == initial && ev.root(bits)) {
                return true;
            }
            if depth == max_prefix {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|&(node, bits)| pred[node].iter().map(move |&u| (u, bits)))
                .map(|(u, bits)| (u, ev.step_back(letter[u], bits)))
                .collect();
        }
    }
    false
}

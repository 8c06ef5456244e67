//! Nested depth-first search for accepting lassos on on-demand graphs.

use std::rc::Rc;

use super::AutomatonError;

/// A Büchi graph whose states are dense `u32` ids handed out on demand.
pub(crate) trait OmegaGraph {
    type Label: Clone;

    fn initial(&mut self) -> Result<u32, AutomatonError>;
    fn successors(&mut self, s: u32) -> Result<Rc<[(Self::Label, u32)]>, AutomatonError>;
    fn accepting(&self, s: u32) -> bool;
}

#[derive(Default)]
struct Flags(Vec<u8>);

impl Flags {
    const OUTER: u8 = 1;
    const INNER: u8 = 2;
    const ON_STACK: u8 = 4;

    fn get(&self, s: u32, f: u8) -> bool {
        self.0.get(s as usize).is_some_and(|x| x & f != 0)
    }

    fn set(&mut self, s: u32, f: u8, on: bool) {
        let i = s as usize;
        if i >= self.0.len() {
            self.0.resize(i + 1, 0);
        }
        if on {
            self.0[i] |= f;
        } else {
            self.0[i] &= !f;
        }
    }
}

struct Frame<L> {
    state: u32,
    succ: Rc<[(L, u32)]>,
    next: usize,
    label_in: Option<L>,
}

/// Edge labels of an accepting lasso `(prefix, cycle)`, or `None` if the
/// language is empty. The cycle is never empty.
pub(crate) fn nested_dfs<G: OmegaGraph>(g: &mut G) -> Result<Option<(Vec<G::Label>, Vec<G::Label>)>, AutomatonError> {
    let mut flags = Flags::default();
    let init = g.initial()?;
    let mut outer: Vec<Frame<G::Label>> = vec![Frame { state: init, succ: g.successors(init)?, next: 0, label_in: None }];
    flags.set(init, Flags::OUTER | Flags::ON_STACK, true);

    while let Some(top) = outer.last_mut() {
        if top.next < top.succ.len() {
            let (label, t) = top.succ[top.next].clone();
            top.next += 1;
            if !flags.get(t, Flags::OUTER) {
                flags.set(t, Flags::OUTER | Flags::ON_STACK, true);
                let succ = g.successors(t)?;
                outer.push(Frame { state: t, succ, next: 0, label_in: Some(label) });
            }
            continue;
        }
        let s = top.state;
        if g.accepting(s) {
            if let Some((hit, path)) = inner(g, s, &mut flags)? {
                let j = outer.iter().position(|f| f.state == hit).expect("hit state is on the outer stack");
                let prefix = outer[1..=j].iter().map(|f| f.label_in.clone().unwrap()).collect();
                let mut cycle: Vec<G::Label> = outer[j + 1..].iter().map(|f| f.label_in.clone().unwrap()).collect();
                cycle.extend(path);
                return Ok(Some((prefix, cycle)));
            }
        }
        flags.set(s, Flags::ON_STACK, false);
        outer.pop();
    }
    Ok(None)
}

/// Searches from `seed` for an edge into a state on the outer stack.
fn inner<G: OmegaGraph>(g: &mut G, seed: u32, flags: &mut Flags) -> Result<Option<(u32, Vec<G::Label>)>, AutomatonError> {
    flags.set(seed, Flags::INNER, true);
    let mut stack: Vec<Frame<G::Label>> = vec![Frame { state: seed, succ: g.successors(seed)?, next: 0, label_in: None }];
    while let Some(top) = stack.last_mut() {
        if top.next == top.succ.len() {
            stack.pop();
            continue;
        }
        let (label, t) = top.succ[top.next].clone();
        top.next += 1;
        if flags.get(t, Flags::ON_STACK) {
            let mut path: Vec<G::Label> = stack[1..].iter().map(|f| f.label_in.clone().unwrap()).collect();
            path.push(label);
            return Ok(Some((t, path)));
        }
        if !flags.get(t, Flags::INNER) {
            flags.set(t, Flags::INNER, true);
            let succ = g.successors(t)?;
            stack.push(Frame { state: t, succ, next: 0, label_in: Some(label) });
        }
    }
    Ok(None)
}

/// Finite graph given by adjacency lists; handy for explicit products.
pub(crate) struct ExplicitGraph<L> {
    pub initial: u32,
    pub succ: Vec<Rc<[(L, u32)]>>,
    pub accepting: Vec<bool>,
}

impl<L: Clone> OmegaGraph for ExplicitGraph<L> {
    type Label = L;

    fn initial(&mut self) -> Result<u32, AutomatonError> {
        Ok(self.initial)
    }

    fn successors(&mut self, s: u32) -> Result<Rc<[(L, u32)]>, AutomatonError> {
        Ok(self.succ[s as usize].clone())
    }

    fn accepting(&self, s: u32) -> bool {
        self.accepting[s as usize]
    }
}

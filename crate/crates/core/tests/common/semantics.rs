//! Direct lasso semantics, written against the textbook fixpoint
//! characterisations and nothing in the library. Letters are bitmasks over an
//! alphabet; truth values of all subformulas at one position are packed in a `Bits`.

use ltlground::ltl::{Formula, Node, Op, Prop};

pub type Bits = u128;

#[derive(Clone, Copy)]
enum Kind {
    Const(bool),
    Letter(u32),
    Un(Op, usize),
    Bin(Op, usize, usize),
}

pub struct Semantics {
    nodes: Vec<Kind>,
}

impl Semantics {
    pub fn compile(f: &Formula, alphabet: &[Prop]) -> Self {
        fn go(f: &Formula, alphabet: &[Prop], nodes: &mut Vec<Kind>) -> usize {
            let k = match f.node() {
                Node::Const(b) => Kind::Const(b),
                Node::Prop(p) => Kind::Letter(alphabet.iter().position(|x| x == p).expect("prop in alphabet") as u32),
                Node::Unary(op, a) => Kind::Un(op, go(a, alphabet, nodes)),
                Node::Binary(op, a, b) => {
                    let a = go(a, alphabet, nodes);
                    Kind::Bin(op, a, go(b, alphabet, nodes))
                }
            };
            nodes.push(k);
            nodes.len() - 1
        }
        let mut nodes = Vec::new();
        go(f, alphabet, &mut nodes);
        assert!(nodes.len() <= Bits::BITS as usize);
        Semantics { nodes }
    }

    /// Value of node `i` given the letter, the values of earlier nodes at this
    /// position (`here`) and all values at the successor position (`next`).
    fn node_value(&self, i: usize, letter: u64, here: Bits, next: Bits) -> bool {
        let h = |j: usize| here >> j & 1 == 1;
        let n = |j: usize| next >> j & 1 == 1;
        match self.nodes[i] {
            Kind::Const(b) => b,
            Kind::Letter(k) => letter >> k & 1 == 1,
            Kind::Un(Op::Not, a) => !h(a),
            Kind::Un(Op::Next, a) => n(a),
            Kind::Un(Op::Finally, a) => h(a) || n(i),
            Kind::Un(Op::Globally, a) => h(a) && n(i),
            Kind::Bin(Op::And, a, b) => h(a) && h(b),
            Kind::Bin(Op::Or, a, b) => h(a) || h(b),
            Kind::Bin(Op::Implies, a, b) => !h(a) || h(b),
            Kind::Bin(Op::Equiv, a, b) => h(a) == h(b),
            Kind::Bin(Op::Until, a, b) | Kind::Bin(Op::WeakUntil, a, b) => h(b) || (h(a) && n(i)),
            Kind::Bin(Op::StrongRelease, a, b) => h(b) && (h(a) || n(i)),
            Kind::Un(..) | Kind::Bin(..) => unreachable!(),
        }
    }

    fn greatest(&self, i: usize) -> bool {
        matches!(self.nodes[i], Kind::Un(Op::Globally, _) | Kind::Bin(Op::WeakUntil, ..))
    }

    /// Values at a position before one whose values are `next`.
    pub fn step_back(&self, letter: u64, next: Bits) -> Bits {
        let mut here: Bits = 0;
        for i in 0..self.nodes.len() {
            if self.node_value(i, letter, here, next) {
                here |= 1 << i;
            }
        }
        here
    }

    /// Values at the first cycle position. Nodes are solved bottom-up; each
    /// temporal node is a least or greatest fixpoint around the cycle, found
    /// by Kleene iteration from false or true.
    pub fn cycle_entry(&self, cycle: &[u64]) -> Bits {
        let c = cycle.len();
        let mut vals: Vec<Bits> = vec![0; c];
        for i in 0..self.nodes.len() {
            let init = self.greatest(i);
            for v in vals.iter_mut() {
                if init {
                    *v |= 1 << i;
                }
            }
            loop {
                let mut changed = false;
                for j in (0..c).rev() {
                    let next = vals[(j + 1) % c];
                    let b = self.node_value(i, cycle[j], vals[j], next);
                    if (vals[j] >> i & 1 == 1) != b {
                        vals[j] ^= 1 << i;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        vals[0]
    }

    pub fn root(&self, bits: Bits) -> bool {
        bits >> (self.nodes.len() - 1) & 1 == 1
    }

    pub fn holds(&self, prefix: &[u64], cycle: &[u64]) -> bool {
        let mut bits = self.cycle_entry(cycle);
        for &l in prefix.iter().rev() {
            bits = self.step_back(l, bits);
        }
        self.root(bits)
    }
}

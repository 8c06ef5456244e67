use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LtlError;

/// Tokens that mean an operator in prefix text and therefore cannot name a proposition.
pub const RESERVED_TOKENS: [&str; 11] = ["!", "&", "|", "i", "e", "X", "F", "G", "U", "W", "M"];

/// An atomic proposition name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prop(String);

impl Prop {
    pub fn new(name: impl Into<String>) -> Result<Self, LtlError> {
        let name = name.into();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(LtlError::InvalidProp(name));
        }
        if RESERVED_TOKENS.contains(&name.as_str()) {
            return Err(LtlError::ReservedProp(name));
        }
        Ok(Prop(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for Prop {
    type Err = LtlError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Prop::new(s)
    }
}

impl Serialize for Prop {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Prop {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Prop::new(s).map_err(serde::de::Error::custom)
    }
}

/// LTL abstract syntax. `True`/`False` exist for internal rewriting; the prefix
/// printer never emits them as tokens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Prop(Prop),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Finally(Box<Formula>),
    Globally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    WeakUntil(Box<Formula>, Box<Formula>),
    StrongRelease(Box<Formula>, Box<Formula>),
}

/// Operator kinds, shared by the parsers, the printers and the decoder vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Not,
    And,
    Or,
    Implies,
    Equiv,
    Next,
    Finally,
    Globally,
    Until,
    WeakUntil,
    StrongRelease,
}

impl Op {
    pub const ALL: [Op; 11] = [
        Op::Not,
        Op::And,
        Op::Or,
        Op::Implies,
        Op::Equiv,
        Op::Next,
        Op::Finally,
        Op::Globally,
        Op::Until,
        Op::WeakUntil,
        Op::StrongRelease,
    ];

    pub fn arity(self) -> usize {
        match self {
            Op::Not | Op::Next | Op::Finally | Op::Globally => 1,
            _ => 2,
        }
    }

    pub fn prefix_token(self) -> &'static str {
        match self {
            Op::Not => "!",
            Op::And => "&",
            Op::Or => "|",
            Op::Implies => "i",
            Op::Equiv => "e",
            Op::Next => "X",
            Op::Finally => "F",
            Op::Globally => "G",
            Op::Until => "U",
            Op::WeakUntil => "W",
            Op::StrongRelease => "M",
        }
    }

    pub fn from_prefix_token(tok: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.prefix_token() == tok)
    }

    pub fn json_name(self) -> &'static str {
        match self {
            Op::Not => "not",
            Op::And => "and",
            Op::Or => "or",
            Op::Implies => "implies",
            Op::Equiv => "equiv",
            Op::Next => "next",
            Op::Finally => "finally",
            Op::Globally => "globally",
            Op::Until => "until",
            Op::WeakUntil => "weak_until",
            Op::StrongRelease => "strong_release",
        }
    }

    pub fn build(self, mut args: Vec<Formula>) -> Formula {
        debug_assert_eq!(args.len(), self.arity());
        if self.arity() == 1 {
            let a = Box::new(args.pop().unwrap());
            return match self {
                Op::Not => Formula::Not(a),
                Op::Next => Formula::Next(a),
                Op::Finally => Formula::Finally(a),
                _ => Formula::Globally(a),
            };
        }
        let r = Box::new(args.pop().unwrap());
        let l = Box::new(args.pop().unwrap());
        match self {
            Op::And => Formula::And(l, r),
            Op::Or => Formula::Or(l, r),
            Op::Implies => Formula::Implies(l, r),
            Op::Equiv => Formula::Equiv(l, r),
            Op::Until => Formula::Until(l, r),
            Op::WeakUntil => Formula::WeakUntil(l, r),
            _ => Formula::StrongRelease(l, r),
        }
    }
}

/// Borrowed view of a node: its operator (if any) and children.
pub enum Node<'a> {
    Const(bool),
    Prop(&'a Prop),
    Unary(Op, &'a Formula),
    Binary(Op, &'a Formula, &'a Formula),
}

impl Formula {
    pub fn prop(name: &str) -> Result<Formula, LtlError> {
        Ok(Formula::Prop(Prop::new(name)?))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn equiv(a: Formula, b: Formula) -> Formula {
        Formula::Equiv(Box::new(a), Box::new(b))
    }
    pub fn next(a: Formula) -> Formula {
        Formula::Next(Box::new(a))
    }
    pub fn finally(a: Formula) -> Formula {
        Formula::Finally(Box::new(a))
    }
    pub fn globally(a: Formula) -> Formula {
        Formula::Globally(Box::new(a))
    }
    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }
    pub fn weak_until(a: Formula, b: Formula) -> Formula {
        Formula::WeakUntil(Box::new(a), Box::new(b))
    }
    pub fn strong_release(a: Formula, b: Formula) -> Formula {
        Formula::StrongRelease(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction of `items`; `None` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    pub fn node(&self) -> Node<'_> {
        use Formula::*;
        match self {
            True => Node::Const(true),
            False => Node::Const(false),
            Prop(p) => Node::Prop(p),
            Not(a) => Node::Unary(Op::Not, a),
            Next(a) => Node::Unary(Op::Next, a),
            Finally(a) => Node::Unary(Op::Finally, a),
            Globally(a) => Node::Unary(Op::Globally, a),
            And(a, b) => Node::Binary(Op::And, a, b),
            Or(a, b) => Node::Binary(Op::Or, a, b),
            Implies(a, b) => Node::Binary(Op::Implies, a, b),
            Equiv(a, b) => Node::Binary(Op::Equiv, a, b),
            Until(a, b) => Node::Binary(Op::Until, a, b),
            WeakUntil(a, b) => Node::Binary(Op::WeakUntil, a, b),
            StrongRelease(a, b) => Node::Binary(Op::StrongRelease, a, b),
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self.node() {
            Node::Const(_) | Node::Prop(_) => vec![],
            Node::Unary(_, a) => vec![a],
            Node::Binary(_, a, b) => vec![a, b],
        }
    }

    /// Rebuilds the node with its children mapped through `f`.
    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        match self.node() {
            Node::Const(_) | Node::Prop(_) => self.clone(),
            Node::Unary(op, a) => op.build(vec![f(a)]),
            Node::Binary(op, a, b) => {
                let l = f(a);
                let r = f(b);
                op.build(vec![l, r])
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Tree height; a lone proposition has height 1.
    pub fn height(&self) -> usize {
        1 + self.children().into_iter().map(Formula::height).max().unwrap_or(0)
    }

    /// Distinct propositions in pre-order first-occurrence order.
    pub fn props_in_order(&self) -> Vec<Prop> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit_preorder(&mut |f| {
            if let Formula::Prop(p) = f {
                if seen.insert(p.clone()) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    pub fn props(&self) -> BTreeSet<Prop> {
        self.props_in_order().into_iter().collect()
    }

    pub fn visit_preorder(&self, visit: &mut impl FnMut(&Formula)) {
        visit(self);
        for c in self.children() {
            c.visit_preorder(visit);
        }
    }

    pub fn contains_constants(&self) -> bool {
        let mut found = false;
        self.visit_preorder(&mut |f| found |= matches!(f, Formula::True | Formula::False));
        found
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print_infix(self))
    }
}

// JSON: {"prop": "a"} or {"op": "until", "args": [..]}; constants are {"op": "true"}.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonFormula {
    Prop { prop: Prop },
    Op {
        op: String,
        #[serde(default)]
        args: Vec<JsonFormula>,
    },
}

impl From<&Formula> for JsonFormula {
    fn from(f: &Formula) -> Self {
        match f.node() {
            Node::Const(b) => JsonFormula::Op { op: if b { "true" } else { "false" }.into(), args: vec![] },
            Node::Prop(p) => JsonFormula::Prop { prop: p.clone() },
            Node::Unary(op, a) => JsonFormula::Op { op: op.json_name().into(), args: vec![a.into()] },
            Node::Binary(op, a, b) => {
                JsonFormula::Op { op: op.json_name().into(), args: vec![a.into(), b.into()] }
            }
        }
    }
}

impl TryFrom<JsonFormula> for Formula {
    type Error = String;
    fn try_from(j: JsonFormula) -> Result<Self, String> {
        match j {
            JsonFormula::Prop { prop } => Ok(Formula::Prop(prop)),
            JsonFormula::Op { op, args } => {
                match op.as_str() {
                    "true" if args.is_empty() => return Ok(Formula::True),
                    "false" if args.is_empty() => return Ok(Formula::False),
                    _ => {}
                }
                let kind = Op::ALL
                    .into_iter()
                    .find(|o| o.json_name() == op)
                    .ok_or_else(|| format!("unknown operator `{op}`"))?;
                if args.len() != kind.arity() {
                    return Err(format!("`{op}` takes {} argument(s), got {}", kind.arity(), args.len()));
                }
                let args = args.into_iter().map(Formula::try_from).collect::<Result<Vec<_>, _>>()?;
                Ok(kind.build(args))
            }
        }
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        JsonFormula::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = JsonFormula::deserialize(d)?;
        Formula::try_from(j).map_err(serde::de::Error::custom)
    }
}

//! Space-separated prefix (Polish) notation, e.g. `& F b F h`.

use super::formula::{Formula, Node, Op, Prop};
use super::{canonical_prop, LtlError};

pub fn parse_prefix(text: &str) -> Result<Formula, LtlError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(LtlError::EmptyInput);
    }
    let mut pos = 0;
    let f = parse_at(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(LtlError::TrailingTokens { position: pos, token: tokens[pos].to_string() });
    }
    Ok(f)
}

fn parse_at(tokens: &[&str], pos: &mut usize) -> Result<Formula, LtlError> {
    // Explicit stack: pathological inputs can be deeply nested.
    enum Frame {
        Pending(Op, Vec<Formula>),
    }
    let mut stack: Vec<Frame> = Vec::new();
    loop {
        let Some(tok) = tokens.get(*pos) else {
            return Err(LtlError::UnexpectedEndOfInput { position: *pos });
        };
        *pos += 1;
        let mut done = match Op::from_prefix_token(tok) {
            Some(op) => {
                stack.push(Frame::Pending(op, Vec::with_capacity(2)));
                continue;
            }
            None => Formula::Prop(Prop::new(*tok)?),
        };
        loop {
            match stack.last_mut() {
                None => return Ok(done),
                Some(Frame::Pending(op, args)) => {
                    args.push(done);
                    if args.len() < op.arity() {
                        break;
                    }
                    let Some(Frame::Pending(op, args)) = stack.pop() else { unreachable!() };
                    done = op.build(args);
                }
            }
        }
    }
}

/// Prefix rendering. Truth constants are written as a tautology or
/// contradiction over a proposition not otherwise used by `f`.
pub fn print_prefix(f: &Formula) -> String {
    let fresh = if f.contains_constants() {
        let used = f.props();
        (0..).map(canonical_prop).find(|p| !used.contains(p))
    } else {
        None
    };
    let mut out = Vec::with_capacity(f.size());
    emit(f, fresh.as_ref(), &mut out);
    out.join(" ")
}

/// Serde adapter storing a formula as its prefix text, for
/// `#[serde(with = "prefix_serde")]` fields.
pub mod prefix_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{parse_prefix, print_prefix};
    use crate::ltl::Formula;

    pub fn serialize<S: Serializer>(f: &Formula, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&print_prefix(f))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(d)?;
        parse_prefix(&text).map_err(serde::de::Error::custom)
    }
}

/// Token list of the prefix rendering.
pub fn prefix_tokens(f: &Formula) -> Vec<String> {
    print_prefix(f).split(' ').map(str::to_string).collect()
}

fn emit(f: &Formula, fresh: Option<&Prop>, out: &mut Vec<String>) {
    match f.node() {
        Node::Const(b) => {
            let p = fresh.expect("fresh prop computed for constants").to_string();
            let head = if b { "|" } else { "&" };
            out.extend([head.to_string(), p.clone(), "!".to_string(), p]);
        }
        Node::Prop(p) => out.push(p.to_string()),
        Node::Unary(op, a) => {
            out.push(op.prefix_token().to_string());
            emit(a, fresh, out);
        }
        Node::Binary(op, a, b) => {
            out.push(op.prefix_token().to_string());
            emit(a, fresh, out);
            emit(b, fresh, out);
        }
    }
}

//! Parenthesized ASCII infix syntax.
//!
//! Operators: `!` `X` `F` `G` (unary), `U` `W` `M` (right associative),
//! `&`, `|`, `->` (right associative), `<->`; listed from tightest to loosest.
//! `true` and `false` are constants.

use super::formula::{Formula, Node, Op, Prop};
use super::LtlError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Unary(Op),
    Binary(Op),
    LParen,
    RParen,
    True,
    False,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LtlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            '!' => out.push((start, Tok::Unary(Op::Not))),
            '&' => out.push((start, Tok::Binary(Op::And))),
            '|' => out.push((start, Tok::Binary(Op::Or))),
            '-' if text[i..].starts_with("->") => {
                out.push((start, Tok::Binary(Op::Implies)));
                i += 1;
            }
            '<' if text[i..].starts_with("<->") => {
                out.push((start, Tok::Binary(Op::Equiv)));
                i += 2;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "X" => Tok::Unary(Op::Next),
                    "F" => Tok::Unary(Op::Finally),
                    "G" => Tok::Unary(Op::Globally),
                    "U" => Tok::Binary(Op::Until),
                    "W" => Tok::Binary(Op::WeakUntil),
                    "M" => Tok::Binary(Op::StrongRelease),
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
                continue;
            }
            _ => {
                return Err(LtlError::Syntax { position: start, message: format!("unexpected character `{c}`") })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> LtlError {
        LtlError::Syntax { position: self.offset(), message: message.into() }
    }

    fn eat_binary(&mut self, ops: &[Op]) -> Option<Op> {
        match self.peek() {
            Some(Tok::Binary(op)) if ops.contains(op) => {
                let op = *op;
                self.pos += 1;
                Some(op)
            }
            _ => None,
        }
    }

    fn equiv(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.implies()?;
        while self.eat_binary(&[Op::Equiv]).is_some() {
            let rhs = self.implies()?;
            lhs = Formula::equiv(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.or()?;
        if self.eat_binary(&[Op::Implies]).is_some() {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.and()?;
        while self.eat_binary(&[Op::Or]).is_some() {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.temporal()?;
        while self.eat_binary(&[Op::And]).is_some() {
            let rhs = self.temporal()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn temporal(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        if let Some(op) = self.eat_binary(&[Op::Until, Op::WeakUntil, Op::StrongRelease]) {
            let rhs = self.temporal()?;
            return Ok(op.build(vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        if let Some(Tok::Unary(op)) = self.peek() {
            let op = *op;
            self.pos += 1;
            let a = self.unary()?;
            return Ok(op.build(vec![a]));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, LtlError> {
        let offset = self.offset();
        let tok = self.peek().cloned().ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::Ident(name) => Prop::new(name)
                .map(Formula::Prop)
                .map_err(|e| LtlError::Syntax { position: offset, message: e.to_string() }),
            Tok::LParen => {
                let inner = self.equiv()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(self.error("expected `)`")),
                }
            }
            other => {
                self.pos -= 1;
                Err(self.error(format!("unexpected token {other:?}")))
            }
        }
    }
}

pub fn parse_infix(text: &str) -> Result<Formula, LtlError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(LtlError::EmptyInput);
    }
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.equiv()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(f)
}

fn infix_symbol(op: Op) -> &'static str {
    match op {
        Op::Not => "!",
        Op::And => "&",
        Op::Or => "|",
        Op::Implies => "->",
        Op::Equiv => "<->",
        Op::Next => "X",
        Op::Finally => "F",
        Op::Globally => "G",
        Op::Until => "U",
        Op::WeakUntil => "W",
        Op::StrongRelease => "M",
    }
}

/// Unary operands are always parenthesized (`G(!(a))`); binary operands are
/// parenthesized whenever they are themselves binary.
pub fn print_infix(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

fn write(f: &Formula, out: &mut String) {
    match f.node() {
        Node::Const(b) => out.push_str(if b { "true" } else { "false" }),
        Node::Prop(p) => out.push_str(p.as_str()),
        Node::Unary(op, a) => {
            out.push_str(infix_symbol(op));
            out.push('(');
            write(a, out);
            out.push(')');
        }
        Node::Binary(op, a, b) => {
            operand(a, out);
            out.push(' ');
            out.push_str(infix_symbol(op));
            out.push(' ');
            operand(b, out);
        }
    }
}

fn operand(f: &Formula, out: &mut String) {
    if matches!(f.node(), Node::Binary(..)) {
        out.push('(');
        write(f, out);
        out.push(')');
    } else {
        write(f, out);
    }
}

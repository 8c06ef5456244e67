//! LTL syntax: formulas, prefix and infix text formats, and structural rewrites.

mod formula;
pub mod fuzz;
mod infix;
mod prefix;
mod transform;

pub use formula::{Formula, Node, Op, Prop, RESERVED_TOKENS};
pub use infix::{parse_infix, print_infix};
pub use prefix::{parse_prefix, prefix_serde, prefix_tokens, print_prefix};
pub use transform::{desugar, invert, skeletonize, substitute, Renaming, Skeleton, MAX_SKELETON_PROPS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlError {
    #[error("empty input")]
    EmptyInput,
    #[error("unexpected end of input after {position} token(s): an operator is missing operands")]
    UnexpectedEndOfInput { position: usize },
    #[error("trailing token `{token}` at position {position}")]
    TrailingTokens { position: usize, token: String },
    #[error("invalid proposition name `{0}`")]
    InvalidProp(String),
    #[error("`{0}` is an operator token and cannot name a proposition")]
    ReservedProp(String),
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("formula has {0} distinct propositions; skeletons support at most {MAX_SKELETON_PROPS}")]
    TooManyProps(usize),
    #[error("no substitution given for proposition `{0}`")]
    MissingBinding(String),
}

/// The `index`-th canonical skeleton proposition: `a, b, c, d, f, g, h, j, ...`.
/// `e` and `i` are skipped because they are prefix operator tokens.
pub fn canonical_prop(index: usize) -> Prop {
    const LETTERS: &[u8] = b"abcdfghjklmnopqrstuvwxyz";
    let name = match LETTERS.get(index) {
        Some(&c) => (c as char).to_string(),
        None => format!("p{index}"),
    };
    Prop::new(name).expect("canonical names are valid")
}

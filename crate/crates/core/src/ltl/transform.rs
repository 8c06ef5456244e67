use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::formula::{Formula, Node, Prop};
use super::{canonical_prop, LtlError};

pub const MAX_SKELETON_PROPS: usize = 26;

/// Proposition renaming, source name to target name.
pub type Renaming = BTreeMap<Prop, Prop>;

/// A formula whose propositions are the canonical sequence in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Skeleton(Formula);

impl Skeleton {
    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }
}

/// Rewrites into `Prop`, `Not`, `Or`, `And`, `Next`, `Until` and the truth constants.
pub fn desugar(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        True | False | Prop(_) => f.clone(),
        Not(a) => Formula::not(desugar(a)),
        And(a, b) => Formula::and(desugar(a), desugar(b)),
        Or(a, b) => Formula::or(desugar(a), desugar(b)),
        Next(a) => Formula::next(desugar(a)),
        Until(a, b) => Formula::until(desugar(a), desugar(b)),
        Implies(a, b) => Formula::or(Formula::not(desugar(a)), desugar(b)),
        Equiv(a, b) => {
            let (a, b) = (desugar(a), desugar(b));
            Formula::and(
                Formula::or(Formula::not(a.clone()), b.clone()),
                Formula::or(Formula::not(b), a),
            )
        }
        Finally(a) => Formula::until(True, desugar(a)),
        Globally(a) => Formula::not(Formula::until(True, Formula::not(desugar(a)))),
        // a W b = a U (b | G a)
        WeakUntil(a, b) => desugar(&Formula::until(
            (**a).clone(),
            Formula::or((**b).clone(), Formula::globally((**a).clone())),
        )),
        // a M b = b U (a & b)
        StrongRelease(a, b) => {
            desugar(&Formula::until((**b).clone(), Formula::and((**a).clone(), (**b).clone())))
        }
    }
}

/// Renames propositions to `a, b, c, ...` by first pre-order occurrence.
/// Returns the skeleton and the renaming from original to canonical names.
pub fn skeletonize(f: &Formula) -> Result<(Skeleton, Renaming), LtlError> {
    let props = f.props_in_order();
    if props.len() > MAX_SKELETON_PROPS {
        return Err(LtlError::TooManyProps(props.len()));
    }
    let renaming: Renaming =
        props.into_iter().enumerate().map(|(i, p)| (p, canonical_prop(i))).collect();
    let skeleton = substitute(f, &renaming)?;
    Ok((Skeleton(skeleton), renaming))
}

/// Simultaneous proposition replacement. Every proposition of `f` must be bound.
pub fn substitute(f: &Formula, map: &Renaming) -> Result<Formula, LtlError> {
    match f.node() {
        Node::Prop(p) => map
            .get(p)
            .map(|q| Formula::Prop(q.clone()))
            .ok_or_else(|| LtlError::MissingBinding(p.to_string())),
        Node::Const(_) => Ok(f.clone()),
        _ => {
            let mut err = None;
            let out = f.map_children(|c| match substitute(c, map) {
                Ok(g) => g,
                Err(e) => {
                    err.get_or_insert(e);
                    Formula::False
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok(out),
            }
        }
    }
}

/// Inverse of a bijective renaming; `None` if two sources share a target.
pub fn invert(map: &Renaming) -> Option<Renaming> {
    let inv: Renaming = map.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
    (inv.len() == map.len()).then_some(inv)
}

#[cfg(test)]
mod tests {
    use super::super::parse_prefix;
    use super::*;

    fn pp(s: &str) -> Formula {
        parse_prefix(s).unwrap()
    }

    fn prop(s: &str) -> Prop {
        Prop::new(s).unwrap()
    }

    fn only_base_ops(f: &Formula) -> bool {
        let mut ok = true;
        f.visit_preorder(&mut |g| {
            ok &= matches!(
                g,
                Formula::True
                    | Formula::False
                    | Formula::Prop(_)
                    | Formula::Not(_)
                    | Formula::And(..)
                    | Formula::Or(..)
                    | Formula::Next(_)
                    | Formula::Until(..)
            )
        });
        ok
    }

    #[test]
    fn desugar_examples() {
        assert_eq!(desugar(&pp("F a")), Formula::until(Formula::True, pp("a")));
        assert_eq!(
            desugar(&pp("W a b")),
            Formula::until(
                pp("a"),
                Formula::or(pp("b"), Formula::not(Formula::until(Formula::True, Formula::not(pp("a")))))
            )
        );
        assert_eq!(desugar(&pp("M a b")), pp("U b & a b"));
        for s in ["G e b X h", "G i a X G ! b", "W ! a b", "M & a F b | ! a G a"] {
            assert!(only_base_ops(&desugar(&pp(s))), "{s}");
        }
    }

    #[test]
    fn skeleton_examples() {
        let (s, m) = skeletonize(&pp("F chase")).unwrap();
        assert_eq!(s.formula(), &pp("F a"));
        assert_eq!(m.get(&prop("chase")), Some(&prop("a")));
        let (s2, _) = skeletonize(&pp("F walmart")).unwrap();
        assert_eq!(s, s2);

        let (s, m) = skeletonize(&pp("& F b F h")).unwrap();
        assert_eq!(s.formula(), &pp("& F a F b"));
        assert_eq!(m.get(&prop("b")), Some(&prop("a")));
        assert_eq!(m.get(&prop("h")), Some(&prop("b")));
    }

    #[test]
    fn skeleton_skips_operator_letters() {
        let (s, _) = skeletonize(&pp("& & & & F p1 F p2 F p3 F p4 F p5")).unwrap();
        assert_eq!(s.formula(), &pp("& & & & F a F b F c F d F f"));
    }

    #[test]
    fn skeleton_limit() {
        let text = format!("{}{}", "& ".repeat(26), (0..27).map(|i| format!("q{i} ")).collect::<String>());
        assert!(matches!(skeletonize(&pp(&text)), Err(LtlError::TooManyProps(27))));
    }

    #[test]
    fn substitute_examples() {
        let map: Renaming = [(prop("A"), prop("walmart"))].into_iter().collect();
        assert_eq!(substitute(&pp("F A"), &map).unwrap(), pp("F walmart"));

        let swap: Renaming = [(prop("A"), prop("B")), (prop("B"), prop("A"))].into_iter().collect();
        assert_eq!(substitute(&pp("& F A F B"), &swap).unwrap(), pp("& F B F A"));

        let f = pp("U ! x y");
        let id: Renaming = f.props().into_iter().map(|p| (p.clone(), p)).collect();
        assert_eq!(substitute(&f, &id).unwrap(), f);

        assert!(matches!(substitute(&pp("& a b"), &map), Err(LtlError::MissingBinding(_))));
    }

    #[test]
    fn invert_detects_non_bijection() {
        let m: Renaming = [(prop("a"), prop("x")), (prop("b"), prop("x"))].into_iter().collect();
        assert!(invert(&m).is_none());
    }
}

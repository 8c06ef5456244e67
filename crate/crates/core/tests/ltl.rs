use ltlground::ltl::fuzz::{random_formula, FuzzConfig};
use ltlground::ltl::{
    desugar, invert, parse_infix, parse_prefix, print_infix, print_prefix, prefix_tokens, skeletonize, substitute, Formula,
    LtlError, Prop,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formula(seed: u64) -> Formula {
    let cfg = FuzzConfig::new(20, 10, &["a", "b", "kitchen", "p_2", "Z"]);
    random_formula(&mut ChaCha8Rng::seed_from_u64(seed), &cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn prefix_round_trip(seed in any::<u64>()) {
        let f = formula(seed);
        let text = print_prefix(&f);
        prop_assert_eq!(parse_prefix(&text).unwrap(), f.clone());
        prop_assert_eq!(text.split(' ').count(), f.size());
        prop_assert_eq!(prefix_tokens(&f).join(" "), text);
    }

    #[test]
    fn infix_round_trip(seed in any::<u64>()) {
        let f = formula(seed);
        prop_assert_eq!(parse_infix(&print_infix(&f)).unwrap(), f);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let f = formula(seed);
        let back: Formula = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn skeleton_renaming_inverts(seed in any::<u64>()) {
        let f = formula(seed);
        let (sk, map) = skeletonize(&f).unwrap();
        prop_assert_eq!(substitute(sk.formula(), &invert(&map).unwrap()).unwrap(), f.clone());
        prop_assert_eq!(skeletonize(sk.formula()).unwrap().0, sk);
    }

    #[test]
    fn desugar_keeps_props(seed in any::<u64>()) {
        let f = formula(seed);
        prop_assert_eq!(desugar(&f).props(), f.props());
    }
}

#[test]
fn prefix_syntax_errors() {
    for bad in ["", "&", "& a", "a b", "U a", "F", "a )", "# a", "& a b c"] {
        assert!(parse_prefix(bad).is_err(), "{bad:?} parsed");
    }
}

#[test]
fn operator_letters_are_not_props() {
    for reserved in ["e", "i", "F", "X", "U"] {
        assert!(Prop::new(reserved).is_err(), "{reserved}");
    }
    assert!(parse_prefix("F e").is_err());
}

#[test]
fn infix_precedence() {
    let f = parse_infix("a & b | c -> d").unwrap();
    assert_eq!(print_prefix(&f), "i | & a b c d");
    assert_eq!(print_prefix(&parse_infix("a U b U c").unwrap()), "U a U b c");
    assert_eq!(print_prefix(&parse_infix("!F a <-> G b").unwrap()), "e ! F a G b");
    assert_eq!(parse_infix("F (a)").unwrap(), parse_prefix("F a").unwrap());
}

#[test]
fn skeleton_letters_follow_first_occurrence() {
    let f = parse_prefix("& F kitchen U ! office kitchen").unwrap();
    let (sk, _) = skeletonize(&f).unwrap();
    assert_eq!(print_prefix(sk.formula()), "& F a U ! b a");
    let many = Formula::conjunction((0..27).map(|i| Formula::prop(&format!("p{i}")).unwrap())).unwrap();
    assert!(matches!(skeletonize(&many), Err(LtlError::TooManyProps(27))));
}

//! Acceptance criteria, one verdict line each. Built without the libtest
//! harness so the lines are always printed; the process fails if any
//! criterion fails outside the documented known discrepancies.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ltlground::automaton::{self, to_buchi, LassoAcceptor, StateSet};
use ltlground::cli;
use ltlground::dataset::{
    corpus_stats, ground_corpus, make_split, permute_augment, rename_sample, seed_corpus, train_test,
    vocabulary_disjointness, AugmentOptions, GroundOptions, Origin, ReBank, Regime, Sample, SplitSpec,
};
use ltlground::decode::{constrained_decode, unconstrained_decode, RandomSampler, Vocabulary};
use ltlground::eval::{categorize_error, ErrorCategory};
use ltlground::grounding::{GroundingResult, SemanticDB};
use ltlground::ltl::fuzz::{random_formula, FuzzConfig};
use ltlground::ltl::{canonical_prop, parse_infix, parse_prefix, print_prefix, substitute, Formula, Prop, Renaming};
use ltlground::patterns::{
    all_templates, classify, equivalent_pairs, instantiate, CatalogConfig, Classification, Family, PatternTemplate,
};
use ltlground::planner::{plan, verify, PlanOutcome, SemanticMap};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use common::semantics::{Bits, Semantics};
use common::{bounded_lasso_exists, data_dir, random_map};

enum Verdict {
    Pass(String),
    Fail(String),
    /// Fails only on items recorded as known discrepancies.
    KnownFail(String),
}

fn prop(s: &str) -> Prop {
    Prop::new(s).unwrap()
}

fn props(names: &[&str]) -> Vec<Prop> {
    names.iter().map(|s| prop(s)).collect()
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

// ---------------------------------------------------------------- 1

fn catalog() -> Verdict {
    let t0 = Instant::now();
    let ts = CatalogConfig::default().templates().unwrap();
    let sks: Vec<Formula> = ts.iter().map(|t| t.skeleton().into_formula()).collect();
    let pairs = equivalent_pairs(&sks.iter().collect::<Vec<_>>()).unwrap();
    let elapsed = t0.elapsed();
    let ids: HashSet<String> = ts.iter().map(|t| t.id()).collect();
    let detail = format!("{} templates, {} distinct ids, {} equivalent pairs, {:.1?}", ts.len(), ids.len(), pairs.len(), elapsed);
    if ts.len() == 47 && ids.len() == 47 && pairs.is_empty() && elapsed < Duration::from_secs(60) {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------- 2

struct Printed {
    template: PatternTemplate,
    props: Vec<Prop>,
    formula: Formula,
    label: String,
}

fn printed(family: Family, n: usize, names: &[&str], infix: &str) -> Printed {
    Printed {
        template: PatternTemplate::new(family, n).unwrap(),
        props: props(names),
        formula: parse_infix(infix).unwrap_or_else(|e| panic!("{infix}: {e}")),
        label: format!("{}_{n}", family.name()),
    }
}

fn join(items: impl IntoIterator<Item = String>, op: &str) -> String {
    items.into_iter().collect::<Vec<_>>().join(&format!(" {op} "))
}

/// The pattern table as printed, general rows expanded for n = 1..5.
fn pattern_table() -> Vec<Printed> {
    let names = ["p1", "p2", "p3", "p4", "p5"];
    let mut rows = Vec::new();
    for n in 1..=5 {
        let p = &names[..n];
        rows.push(printed(Family::Visit, n, p, &join(p.iter().map(|x| format!("F {x}")), "&")));
        rows.push(printed(Family::Patrolling, n, p, &join(p.iter().map(|x| format!("G F {x}")), "&")));
        rows.push(printed(Family::GlobalAvoidance, n, p, &join(p.iter().map(|x| format!("G !{x}")), "&")));
        if n < 2 {
            continue;
        }
        let seq = p[..n - 1].iter().rev().fold(format!("F {}", p[n - 1]), |acc, x| format!("F({x} & {acc})"));
        rows.push(printed(Family::SequenceVisit, n, p, &seq));
        let ordered: Vec<String> = std::iter::once(format!("F {}", p[n - 1]))
            .chain((0..n - 1).map(|i| format!("(!{} U {})", p[i + 1], p[i])))
            .collect();
        rows.push(printed(Family::OrderedVisit, n, p, &join(ordered.clone(), "&")));
        let strict = ordered
            .into_iter()
            .chain((0..n - 1).map(|i| format!("(!{a} U ({a} U (!{a} U {b})))", a = p[i], b = p[i + 1])));
        rows.push(printed(Family::StrictlyOrderedVisit, n, p, &join(strict, "&")));
    }
    let ab = ["a", "b"];
    rows.push(printed(Family::BoundDelay, 2, &ab, "G(a <-> X b)"));
    rows.push(printed(Family::DelayedReaction, 2, &ab, "G(a -> F b)"));
    rows.push(printed(Family::PromptReaction, 2, &ab, "G(a -> X b)"));
    rows.push(printed(Family::Wait, 2, &ab, "a W b"));
    rows.push(printed(Family::PastAvoidance, 2, &ab, "!a W b"));
    rows.push(printed(Family::FutureAvoidance, 2, &ab, "G(a -> X G !b)"));
    let a = ["a"];
    rows.push(printed(Family::UpperRestrictedAvoidance, 1, &a, "!F(a & (a U (!a & (!a U F a))))"));
    rows.push(printed(
        Family::UpperRestrictedAvoidance,
        2,
        &a,
        "!F(a & (a U (a & (!a U F(a & (a U (!a & (!a U F a))))))))",
    ));
    rows.push(printed(Family::LowerRestrictedAvoidance, 2, &a, "F(a & (a U (!a & (!a U F a))))"));
    rows.push(printed(Family::ExactRestrictedAvoidance, 1, &a, "a M (!a | G(a | G !a))"));
    rows.push(printed(
        Family::ExactRestrictedAvoidance,
        2,
        &a,
        "(a & F(!a & F a)) M (!a | G(a | G(!a | G(a | G !a))))",
    ));
    rows.push(Printed {
        template: PatternTemplate::new(Family::ExactRestrictedAvoidance, 3).unwrap(),
        props: props(&["seybolt_park"]),
        formula: parse_prefix(
            "M & seybolt_park F & ! seybolt_park F & seybolt_park F & ! seybolt_park F seybolt_park \
             | ! seybolt_park G | seybolt_park G | ! seybolt_park G | seybolt_park G | ! seybolt_park G | seybolt_park G ! seybolt_park",
        )
        .unwrap(),
        label: "exact_restricted_avoidance_3 (grounded prompt instance)".into(),
    });
    rows
}

fn describe(trace: &automaton::LassoTrace) -> String {
    let show = |v: &[automaton::Valuation]| {
        v.iter()
            .map(|x| format!("{{{}}}", x.iter().map(Prop::as_str).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!("prefix [{}] cycle [{}]", show(&trace.prefix), show(&trace.cycle))
}

fn pattern_table_agreement() -> Verdict {
    let rows = pattern_table();
    let mut failed = Vec::new();
    for r in &rows {
        let ours = instantiate(r.template, &r.props).unwrap();
        if let Some(trace) = automaton::check_equivalence(&ours, &r.formula).unwrap() {
            failed.push((r, trace));
        }
    }
    // n = 1 of lower restricted avoidance is printed as ¬F a; it is taken to mean
    // "at least one visit", the only reading consistent with n = 2.
    let lower1 = instantiate(PatternTemplate::new(Family::LowerRestrictedAvoidance, 1).unwrap(), &props(&["a"])).unwrap();
    let lower1_ok = automaton::equivalent(&lower1, &parse_infix("F a").unwrap()).unwrap();
    let known = |r: &Printed| r.template.family == Family::UpperRestrictedAvoidance && r.template.n == 2;
    let mut lines: Vec<String> = failed
        .iter()
        .map(|(r, t)| {
            let tag = if known(r) { "known typo in the printed row" } else { "unexpected" };
            format!("{} differs ({tag}), witness {}", r.label, describe(t))
        })
        .collect();
    if !lower1_ok {
        lines.push("lower_restricted_avoidance_1 is not F a".into());
    }
    let detail = format!(
        "{}/{} printed rows equivalent; lower_restricted_avoidance_1 = F a (documented discrepancy with printed ¬F a){}",
        rows.len() - failed.len(),
        rows.len(),
        lines.iter().map(|l| format!("; {l}")).collect::<String>()
    );
    if failed.is_empty() && lower1_ok {
        Verdict::Pass(detail)
    } else if lower1_ok && failed.iter().all(|(r, _)| known(r)) {
        Verdict::KnownFail(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------- 3

/// All words of length 0..=3 over `letters`, in breadth-first order so that
/// word k's parent (itself minus the last letter) is word (k - 1) / letters.
fn short_words(letters: u64) -> Vec<Vec<u64>> {
    let mut words: Vec<Vec<u64>> = vec![vec![]];
    let mut i = 0;
    while i < words.len() {
        let w = words[i].clone();
        if w.len() < 3 {
            for l in 0..letters {
                let mut x = w.clone();
                x.push(l);
                words.push(x);
            }
        }
        i += 1;
    }
    words
}

/// Automaton membership against direct semantics on every lasso with
/// |prefix| <= 3 and 1 <= |cycle| <= 3. Cycles are grouped by (semantic
/// truth vector at entry, automaton states that can accept on the cycle):
/// both verdicts depend on the cycle only through that pair, so each group
/// stands for all of its cycles.
fn oracle_agreement() -> Verdict {
    const FORMULAS: usize = 10_000;
    let cfg = FuzzConfig::new(12, 12, &["a", "b", "c"]);
    let words = short_words(8);
    let cycles: Vec<&Vec<u64>> = words.iter().filter(|w| !w.is_empty()).collect();
    let t0 = Instant::now();
    let workers = threads();
    let results: Vec<(u64, Vec<String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (cfg, words, cycles) = (&cfg, &words, &cycles);
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(1000 + w as u64);
                    let (mut checked, mut bad) = (0u64, Vec::new());
                    for _ in (w..FORMULAS).step_by(workers) {
                        let f = random_formula(&mut rng, cfg);
                        let sem = Semantics::compile(&f, &cfg.props);
                        let acc = LassoAcceptor::new(&to_buchi(&f).unwrap(), &cfg.props);
                        let mut reach: Vec<StateSet> = Vec::with_capacity(words.len());
                        for (k, word) in words.iter().enumerate() {
                            let r = match word.last() {
                                None => acc.initial_set(),
                                Some(&l) => acc.step(&reach[(k - 1) / 8], l),
                            };
                            reach.push(r);
                        }
                        let mut groups: HashMap<(Bits, StateSet), u64> = HashMap::new();
                        for c in cycles {
                            *groups.entry((sem.cycle_entry(c), acc.cycle_winners(c))).or_default() += 1;
                        }
                        let mut memo: HashMap<(u64, Bits), Bits> = HashMap::new();
                        for ((entry, winners), count) in &groups {
                            for (k, word) in words.iter().enumerate() {
                                let mut bits = *entry;
                                for &l in word.iter().rev() {
                                    bits = *memo.entry((l, bits)).or_insert_with(|| sem.step_back(l, bits));
                                }
                                if sem.root(bits) != reach[k].intersects(winners) && bad.len() < 5 {
                                    bad.push(format!("{f} on prefix {word:?}"));
                                }
                                checked += count;
                            }
                        }
                    }
                    (checked, bad)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let checked: u64 = results.iter().map(|r| r.0).sum();
    let bad: Vec<&String> = results.iter().flat_map(|r| &r.1).collect();
    let detail = format!(
        "{FORMULAS} formulas (size <= 12, 3 props), {checked} lasso checks, {} disagreements, {:.1?}",
        bad.len(),
        t0.elapsed()
    );
    if bad.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; e.g. {}", bad[0]))
    }
}

// ---------------------------------------------------------------- 4

fn constrained_decoding() -> Verdict {
    const RUNS: usize = 10_000;
    let vocab = Vocabulary::with_prop_names(&["kitchen", "office", "lab", "lobby", "garage"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut invalid = 0;
    for _ in 0..RUNS {
        let ok = match constrained_decode(&mut RandomSampler { rng: &mut rng }, &vocab, 8, 80) {
            Ok(f) => {
                let text = print_prefix(&f);
                f.height() <= 8 && text.split(' ').count() <= 80 && parse_prefix(&text).as_ref() == Ok(&f)
            }
            Err(_) => false,
        };
        invalid += usize::from(!ok);
    }
    let baseline_invalid = (0..RUNS)
        .filter(|_| unconstrained_decode(&mut RandomSampler { rng: &mut rng }, &vocab, 80).is_err())
        .count();
    let detail = format!(
        "constrained: {invalid}/{RUNS} invalid; unconstrained baseline: {baseline_invalid}/{RUNS} invalid ({:.1}%)",
        100.0 * baseline_invalid as f64 / RUNS as f64
    );
    if invalid == 0 && baseline_invalid * 2 > RUNS {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------- 5

fn injective_maps(from: &[Prop], to: &[Prop]) -> Vec<Renaming> {
    if from.is_empty() {
        return vec![Renaming::new()];
    }
    let mut out = Vec::new();
    for rest in injective_maps(&from[1..], to) {
        for t in to {
            if !rest.values().any(|v| v == t) {
                let mut m = rest.clone();
                m.insert(from[0].clone(), t.clone());
                out.push(m);
            }
        }
    }
    out
}

fn keyed(samples: &[Sample]) -> BTreeSet<(String, String)> {
    samples.iter().map(|s| (s.utterance.clone(), s.prefix())).collect()
}

fn augmentation() -> Verdict {
    let aug = permute_augment(&seed_corpus(), &AugmentOptions::default()).unwrap();
    let stats = corpus_stats(&aug);

    let seed = |u: &str, f: &str, t: Option<&str>| {
        Sample::new(u, parse_prefix(f).unwrap(), t.and_then(PatternTemplate::from_id), Origin::Seed).unwrap()
    };
    let synthetic = vec![
        seed("go to A and then to B", "F & A F B", Some("sequence_visit_2")),
        seed("reach A but never enter C", "& G ! C F A", None),
        seed("visit D, A and B in any order", "& F D & F A F B", Some("visit_3")),
    ];
    let vocab = props(&["A", "B", "C", "D", "E"]);
    let out = permute_augment(&synthetic, &AugmentOptions::default()).unwrap();
    let expected: BTreeSet<(String, String)> = synthetic
        .iter()
        .flat_map(|s| injective_maps(&s.props, &vocab).into_iter().map(move |m| rename_sample(s, &m, Origin::Permuted).unwrap()))
        .map(|s| {
            let prefix = s.prefix();
            (s.utterance, prefix)
        })
        .collect();
    let closed = keyed(&out) == expected && out.len() == expected.len();
    let again = permute_augment(&out, &AugmentOptions::default()).unwrap();
    let idempotent = keyed(&again) == keyed(&out);

    let detail = format!(
        "{} utterances, {} distinct formulas; synthetic seed: {} samples, closed under renaming: {closed}, idempotent: {idempotent}",
        stats.count,
        stats.distinct_formulas,
        out.len()
    );
    if stats.count == 49_655 && stats.distinct_formulas == 2125 && closed && idempotent {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------- 6

/// Random lassos over `alphabet`; a distinguishing one proves inequivalence.
fn distinguishable(f: &Formula, g: &Formula, alphabet: &[Prop], rng: &mut ChaCha8Rng) -> bool {
    let (sf, sg) = (Semantics::compile(f, alphabet), Semantics::compile(g, alphabet));
    let letters = 1u64 << alphabet.len();
    (0..300).any(|_| {
        let prefix: Vec<u64> = (0..rng.gen_range(0..5)).map(|_| rng.gen_range(0..letters)).collect();
        let cycle: Vec<u64> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..letters)).collect();
        sf.holds(&prefix, &cycle) != sg.holds(&prefix, &cycle)
    })
}

fn holdouts() -> Verdict {
    let mut samples = permute_augment(&seed_corpus(), &AugmentOptions::default()).unwrap();
    // equivalent skeletons with different syntax
    for (u, f) in [("eventually get to A", "! G ! A"), ("stay away from B", "! F B"), ("go to C or C", "| F C F C")] {
        samples.push(Sample::new(u, parse_prefix(f).unwrap(), None, Origin::Seed).unwrap());
    }
    let mut problems = Vec::new();

    // formula holdout: exhaustive over pairs of distinct skeletons in different folds
    let folds = make_split(&samples, &SplitSpec::new(Regime::FormulaHoldout)).unwrap();
    let mut skeleton_folds: BTreeMap<String, (Formula, BTreeSet<usize>)> = BTreeMap::new();
    for (s, &k) in samples.iter().zip(&folds) {
        let sk = s.skeleton().into_formula();
        skeleton_folds.entry(print_prefix(&sk)).or_insert_with(|| (sk, BTreeSet::new())).1.insert(k);
    }
    let sks: Vec<&(Formula, BTreeSet<usize>)> = skeleton_folds.values().collect();
    if sks.iter().any(|(_, f)| f.len() > 1) {
        problems.push("a skeleton spans folds".to_string());
    }
    let alphabet: Vec<Prop> = (0..5).map(canonical_prop).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut cross_pairs, mut automaton_checks) = (0, 0);
    for i in 0..sks.len() {
        for j in i + 1..sks.len() {
            if sks[i].1 == sks[j].1 {
                continue;
            }
            cross_pairs += 1;
            let (f, g) = (&sks[i].0, &sks[j].0);
            if distinguishable(f, g, &alphabet, &mut rng) {
                continue;
            }
            automaton_checks += 1;
            if automaton::equivalent(f, g).unwrap() {
                problems.push(format!("cross-fold equivalent skeletons {f} and {g}"));
            }
        }
    }

    // type holdout: each family in exactly one fold
    let folds = make_split(&samples, &SplitSpec::new(Regime::TypeHoldout)).unwrap();
    let mut family_folds: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for (s, &k) in samples.iter().zip(&folds) {
        if let Some(f) = s.family() {
            family_folds.entry(f.name()).or_default().insert(k);
        }
    }
    if family_folds.values().any(|f| f.len() > 1) {
        problems.push("a family spans folds".to_string());
    }

    // vocabulary shift: disjoint landmark banks for train and test
    let db = SemanticDB::load(&data_dir().join("fixtures/grounding/db.json")).unwrap();
    let bank = |keep: &dyn Fn(usize) -> bool| -> ReBank {
        db.entries().enumerate().filter(|(i, _)| keep(*i)).map(|(_, e)| (e.key.clone(), vec![e.name.to_lowercase()])).collect()
    };
    let (bank_a, bank_b) = (bank(&|i| i % 2 == 0), bank(&|i| i % 2 == 1));
    let seeds = seed_corpus();
    let (train, test) = train_test(&make_split(&seeds, &SplitSpec::new(Regime::UtteranceHoldout)).unwrap(), 0);
    let pick = |idx: &[usize]| idx.iter().map(|&i| seeds[i].clone()).collect::<Vec<_>>();
    let opts = GroundOptions { sample_size: Some(300), seed: 6 };
    let train_g = ground_corpus(&pick(&train), &bank_a, &db, opts).unwrap();
    let test_g = ground_corpus(&pick(&test), &bank_b, &db, opts).unwrap();
    let test_same = ground_corpus(&pick(&test), &bank_a, &db, opts).unwrap();
    let disjoint = vocabulary_disjointness(&train_g, &test_g);
    if !disjoint || vocabulary_disjointness(&train_g, &test_same) {
        problems.push("vocabulary disjointness check".to_string());
    }

    let detail = format!(
        "formula holdout: {} skeletons, {cross_pairs} cross-fold pairs ({automaton_checks} by automaton), type holdout: {} families, vocabulary shift disjoint: {disjoint}",
        sks.len(),
        family_folds.len()
    );
    if problems.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; {}", problems.join("; ")))
    }
}

// ---------------------------------------------------------------- 7

const RUNNING_EXAMPLE: &str = "Go to the store on Main Street, but only after visiting the bank";

fn grounding_fixtures() -> Verdict {
    let dir = data_dir().join("fixtures/grounding");
    let arg = |f: &str| dir.join(f).to_str().unwrap().to_string();
    let args = ["ltlground", "ground", "--mock", &arg("mock.json"), "--db", &arg("db.json"), "--input", &arg("commands.txt")];
    let mut out = Vec::new();
    let code = cli::run(args, &mut out);
    let expected = std::fs::read(dir.join("expected.jsonl")).unwrap();
    let identical = code == 0 && out == expected;
    let running = String::from_utf8(out)
        .unwrap()
        .lines()
        .filter_map(|l| serde_json::from_str::<GroundingResult>(l).ok())
        .find(|r| r.utterance == RUNNING_EXAMPLE)
        .map(|r| print_prefix(&r.grounded_formula));
    let detail = format!(
        "{} commands, byte-identical: {identical}, running example -> {}",
        expected.iter().filter(|&&b| b == b'\n').count(),
        running.as_deref().unwrap_or("missing")
    );
    if identical && running.as_deref() == Some("& F walmart U ! walmart chase") {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------- 8

#[derive(Deserialize)]
struct DemoCommand {
    ltl: String,
    expected: String,
}

fn planning() -> Verdict {
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for env in ["env1", "env2"] {
        let dir = data_dir().join("maps");
        let map = SemanticMap::load(dir.join(format!("{env}.json"))).unwrap();
        let cmds: Vec<DemoCommand> =
            serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{env}_commands.json"))).unwrap()).unwrap();
        let mut unsat = 0;
        for c in &cmds {
            let f = parse_prefix(&c.ltl).unwrap();
            let outcome = plan(&map, &f).unwrap();
            let got = match &outcome {
                PlanOutcome::Plan(p) => {
                    if !verify(&map, &f, p) {
                        problems.push(format!("{env}: plan for {} does not verify", c.ltl));
                    }
                    "sat"
                }
                PlanOutcome::Unsatisfiable { .. } => {
                    unsat += 1;
                    "unsat"
                }
            };
            if got != c.expected {
                problems.push(format!("{env}: {} is {got}", c.ltl));
            }
        }
        if unsat != 6 {
            problems.push(format!("{env}: {unsat} unsat commands"));
        }
        summary.push(format!("{env} {}/{} planned, {unsat} unsat", cmds.len() - unsat, cmds.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let names = ["a", "b", "c"];
    let mut disagreements = 0;
    const CASES: usize = 400;
    for _ in 0..CASES {
        let cfg = FuzzConfig::new(8, 6, &names[..rng.gen_range(1..=3)]);
        let f = random_formula(&mut rng, &cfg);
        let map = random_map(&mut rng, 5, &f.props().into_iter().collect::<Vec<_>>());
        let outcome = plan(&map, &f).unwrap();
        let sound = match &outcome {
            PlanOutcome::Plan(p) => verify(&map, &f, p),
            PlanOutcome::Unsatisfiable { .. } => true,
        };
        if !sound || outcome.is_unsat() == bounded_lasso_exists(&map, &f, 6, 6) {
            disagreements += 1;
        }
    }
    if disagreements > 0 {
        problems.push(format!("{disagreements} disagreements with the bounded search"));
    }
    let detail = format!("{}; bounded-search oracle: {CASES} random maps, {disagreements} disagreements", summary.join(", "));
    if problems.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; {}", problems.join("; ")))
    }
}

// ---------------------------------------------------------------- 9

/// Template of `f` by brute force: every catalog skeleton with the right
/// proposition count, under every assignment of f's props to skeleton letters.
fn brute_classify(f: &Formula) -> Option<PatternTemplate> {
    let ps: Vec<Prop> = f.props().into_iter().collect();
    let letters: Vec<Prop> = (0..ps.len()).map(canonical_prop).collect();
    let maps = injective_maps(&ps, &letters);
    all_templates().iter().filter(|(t, _)| t.prop_count() == ps.len()).find_map(|(t, sk)| {
        maps.iter()
            .any(|m| automaton::equivalent(&substitute(f, m).unwrap(), sk.formula()).unwrap())
            .then_some(*t)
    })
}

/// Which category conditions hold, in cascade order.
fn conditions(gold: Option<PatternTemplate>, gold_props: usize, pred: &Result<Formula, impl Sized>) -> [bool; 5] {
    let Ok(p) = pred else { return [true, false, false, false, false] };
    let class = brute_classify(p);
    [
        false,
        class.is_some() && class != gold,
        p.props().len() != gold_props,
        class.is_some() && class == gold && p.props().len() == gold_props,
        class.is_none(),
    ]
}

fn error_taxonomy() -> Verdict {
    let f = |s: &str| parse_prefix(s).unwrap();
    let mut problems = Vec::new();
    let gold = f("& F a U ! a b");
    let hand = [
        ("& F a U ! a", ErrorCategory::SyntaxError),
        ("& F a F b", ErrorCategory::MisclassifiedType),
        ("& F a & U ! a b F c", ErrorCategory::IncorrectPropositions),
        ("& F b U ! b a", ErrorCategory::IncorrectPermutation),
        ("& F a U b a", ErrorCategory::UnknownTemplate),
    ];
    for (pred, want) in hand {
        let got = categorize_error(&gold, &parse_prefix(pred));
        if got != want {
            problems.push(format!("{pred}: {} instead of {}", got.name(), want.name()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pool = props(&["a", "b", "c"]);
    let small: Vec<PatternTemplate> = all_templates().iter().map(|(t, _)| *t).filter(|t| t.prop_count() <= 3).collect();
    let fuzz = FuzzConfig::new(8, 5, &["a", "b", "c", "d"]);
    let tokens = ["!", "&", "|", "F", "G", "U", "X", "a", "b", "c", "(", "W"];
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut n = 0;
    while n < 1000 {
        let t = *small.choose(&mut rng).unwrap();
        let mut ps = pool.clone();
        ps.shuffle(&mut rng);
        ps.truncate(t.prop_count());
        let gold = instantiate(t, &ps).unwrap();
        let pred: Result<Formula, _> = match rng.gen_range(0..4) {
            0 => parse_prefix(&(0..rng.gen_range(1..8)).map(|_| *tokens.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ")),
            1 => Ok(random_formula(&mut rng, &fuzz)),
            2 => {
                let other = *small.choose(&mut rng).unwrap();
                let mut qs = pool.clone();
                qs.shuffle(&mut rng);
                qs.truncate(other.prop_count());
                Ok(instantiate(other, &qs).unwrap())
            }
            _ => {
                let mut qs = ps.clone();
                qs.shuffle(&mut rng);
                Ok(instantiate(t, &qs).unwrap())
            }
        };
        if let Ok(p) = &pred {
            if automaton::equivalent(p, &gold).unwrap() {
                continue;
            }
        }
        n += 1;
        let got = categorize_error(&gold, &pred);
        let holds = conditions(Some(t), ps.len(), &pred);
        let first = holds.iter().position(|&b| b);
        *counts.entry(got.name()).or_default() += 1;
        if first.map(|i| ErrorCategory::ALL[i]) != Some(got) && problems.len() < 5 {
            problems.push(format!("{} vs gold {}: got {}, conditions {holds:?}", pred.as_ref().map_or("<syntax>".into(), print_prefix), print_prefix(&gold), got.name()));
        }
        if let Ok(p) = &pred {
            // the library classifier must agree with brute force
            if classify(p).unwrap() != brute_classify(p).map_or(Classification::Unknown, Classification::Known) && problems.len() < 5 {
                problems.push(format!("classification of {p}"));
            }
        }
    }
    let all_seen = ErrorCategory::ALL.iter().all(|c| counts.contains_key(c.name()));
    if !all_seen {
        problems.push("not every category occurs among fuzzed predictions".into());
    }
    let detail = format!(
        "5 hand-built instances; 1000 fuzzed incorrect predictions, each in exactly one category: {}",
        counts.iter().map(|(k, v)| format!("{k} {v}")).collect::<Vec<_>>().join(", ")
    );
    if problems.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; {}", problems.join("; ")))
    }
}

// ---------------------------------------------------------------- 10

fn corpus_statistics() -> Verdict {
    let stats = corpus_stats(&permute_augment(&seed_corpus(), &AugmentOptions::default()).unwrap());
    let (p, l) = (stats.props.unwrap(), stats.length.unwrap());
    let detail = format!(
        "props min {} max {} mean {:.4}; length min {} max {} mean {:.4}",
        p.min, p.max, p.mean, l.min, l.max, l.mean
    );
    let close = |x: f64, y: f64| (x - y).abs() <= 0.005;
    if (p.min, p.max, l.min, l.max) == (1, 5, 2, 67) && close(p.mean, 3.79) && close(l.mean, 18.89) {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("47 pairwise inequivalent templates in under 60 s", catalog),
        ("templates agree with the printed pattern table", pattern_table_agreement),
        ("automaton acceptance agrees with lasso semantics", oracle_agreement),
        ("constrained decoding emits only valid formulas", constrained_decoding),
        ("permutation augmentation counts, closure, idempotence", augmentation),
        ("holdout splits are leak-free", holdouts),
        ("grounding replays the stored fixtures byte for byte", grounding_fixtures),
        ("planner is sound and complete on the demo and random maps", planning),
        ("error taxonomy covers incorrect predictions exactly once", error_taxonomy),
        ("augmented corpus statistics", corpus_statistics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Verdict::Fail(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::KnownFail(d) => ("FAIL (known discrepancy, not asserted)", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}: {name} [{:.1?}] -- {detail}", i + 1, t0.elapsed());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

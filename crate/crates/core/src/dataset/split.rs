//! Cross-validation folds for the utterance, formula and type holdouts.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automaton;
use crate::ltl::{print_prefix, Skeleton};
use crate::patterns::fingerprint;

use super::{DatasetError, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Unseen paraphrases: samples are split individually.
    UtteranceHoldout,
    /// Unseen formulas: semantically equivalent skeletons share a fold.
    FormulaHoldout,
    /// Unseen pattern families: a family's samples share a fold.
    TypeHoldout,
}

impl Regime {
    pub fn from_name(s: &str) -> Option<Regime> {
        match s {
            "utterance" | "utterance_holdout" => Some(Regime::UtteranceHoldout),
            "formula" | "formula_holdout" => Some(Regime::FormulaHoldout),
            "type" | "type_holdout" => Some(Regime::TypeHoldout),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub regime: Regime,
    pub folds: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(regime: Regime) -> Self {
        SplitSpec { regime, folds: 5, seed: 0 }
    }
}

/// Union-find over semantic equivalence of the samples' skeletons; returns a
/// class index per sample. Only skeletons with equal fingerprints are
/// compared, and each only against class representatives.
pub fn skeleton_classes(samples: &[Sample]) -> Result<Vec<usize>, DatasetError> {
    let mut distinct: Vec<Skeleton> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let of_sample: Vec<usize> = samples
        .iter()
        .map(|s| {
            let sk = s.skeleton();
            *index.entry(print_prefix(sk.formula())).or_insert_with(|| {
                distinct.push(sk);
                distinct.len() - 1
            })
        })
        .collect();
    let mut buckets: HashMap<_, Vec<usize>> = HashMap::new();
    for (i, sk) in distinct.iter().enumerate() {
        buckets.entry(fingerprint(sk.formula())).or_default().push(i);
    }
    let mut class = vec![usize::MAX; distinct.len()];
    let mut next = 0;
    let mut keys: Vec<_> = buckets.keys().cloned().collect();
    keys.sort_by_key(|k| buckets[k][0]);
    for k in keys {
        let mut reps: Vec<usize> = Vec::new();
        for &i in &buckets[&k] {
            let mut found = None;
            for &r in &reps {
                if automaton::equivalent(distinct[i].formula(), distinct[r].formula())? {
                    found = Some(class[r]);
                    break;
                }
            }
            class[i] = found.unwrap_or_else(|| {
                reps.push(i);
                next += 1;
                next - 1
            });
        }
    }
    Ok(of_sample.into_iter().map(|d| class[d]).collect())
}

fn family_classes(samples: &[Sample]) -> Vec<usize> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    samples
        .iter()
        .map(|s| {
            let name = s.family().map_or("unknown", |f| f.name()).to_string();
            let n = ids.len();
            *ids.entry(name).or_insert(n)
        })
        .collect()
}

/// Greedy balancing: classes by decreasing size (seeded order among equal
/// sizes), each to the currently smallest fold.
fn assign_classes(class_of: &[usize], folds: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>, DatasetError> {
    let ncls = class_of.iter().copied().max().map_or(0, |m| m + 1);
    if ncls < folds {
        return Err(DatasetError::TooFewClasses { classes: ncls, folds });
    }
    let mut size = vec![0usize; ncls];
    for &c in class_of {
        size[c] += 1;
    }
    let tiebreak: Vec<u64> = (0..ncls).map(|_| rng.gen()).collect();
    let mut order: Vec<usize> = (0..ncls).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(size[c]), tiebreak[c]));
    let mut load = vec![0usize; folds];
    let mut fold_of_class = vec![0usize; ncls];
    for c in order {
        let f = (0..folds).min_by_key(|&f| (load[f], f)).expect("folds >= 2");
        fold_of_class[c] = f;
        load[f] += size[c];
    }
    Ok(class_of.iter().map(|&c| fold_of_class[c]).collect())
}

/// Fold index per sample. Deterministic given the spec.
pub fn make_split(samples: &[Sample], spec: &SplitSpec) -> Result<Vec<usize>, DatasetError> {
    if spec.folds < 2 {
        return Err(DatasetError::InvalidFolds(spec.folds));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.regime {
        Regime::UtteranceHoldout => {
            if samples.len() < spec.folds {
                return Err(DatasetError::TooFewClasses { classes: samples.len(), folds: spec.folds });
            }
            let mut order: Vec<usize> = (0..samples.len()).collect();
            order.shuffle(&mut rng);
            let mut fold = vec![0; samples.len()];
            for (pos, &i) in order.iter().enumerate() {
                fold[i] = pos % spec.folds;
            }
            Ok(fold)
        }
        Regime::FormulaHoldout => assign_classes(&skeleton_classes(samples)?, spec.folds, &mut rng),
        Regime::TypeHoldout => assign_classes(&family_classes(samples), spec.folds, &mut rng),
    }
}

/// Training and test indices for one fold.
pub fn train_test(folds: &[usize], test_fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != test_fold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Origin;
    use crate::ltl::parse_prefix;
    use crate::patterns::PatternTemplate;

    fn sample(u: &str, f: &str, t: Option<&str>) -> Sample {
        Sample::new(u, parse_prefix(f).unwrap(), t.and_then(PatternTemplate::from_id), Origin::Seed).unwrap()
    }

    #[test]
    fn utterance_folds_are_even() {
        let s: Vec<Sample> = (0..10).map(|i| sample(&format!("visit A {i}"), "F A", None)).collect();
        let f = make_split(&s, &SplitSpec::new(Regime::UtteranceHoldout)).unwrap();
        for k in 0..5 {
            assert_eq!(f.iter().filter(|&&x| x == k).count(), 2);
        }
        assert_eq!(f, make_split(&s, &SplitSpec::new(Regime::UtteranceHoldout)).unwrap());
    }

    #[test]
    fn equivalent_skeletons_share_a_fold() {
        let mut s = vec![sample("visit A", "F A", None), sample("never avoid A forever", "! G ! A", None)];
        for (i, f) in ["G A", "X A", "U A B", "& F A F B"].iter().enumerate() {
            s.push(sample(&format!("x{i} A B"), f, None));
        }
        let spec = SplitSpec { regime: Regime::FormulaHoldout, folds: 2, seed: 1 };
        let f = make_split(&s, &spec).unwrap();
        assert_eq!(f[0], f[1]);
        let classes = skeleton_classes(&s).unwrap();
        assert_eq!(classes[0], classes[1]);
        assert_eq!(classes.iter().collect::<std::collections::HashSet<_>>().len(), 5);
    }

    #[test]
    fn family_folds() {
        let mut s = Vec::new();
        for n in 1..=5 {
            let props = ["A", "B", "C", "D", "E"][..n].to_vec();
            let f = props.iter().skip(1).fold(format!("F {}", props[0]), |acc, p| format!("& {acc} F {p}"));
            s.push(sample(&props.join(" "), &f, Some(&format!("visit_{n}"))));
        }
        s.push(sample("A", "G A", Some("global_avoidance_1")));
        s.push(sample("A B", "U A B", None));
        let spec = SplitSpec { regime: Regime::TypeHoldout, folds: 3, seed: 0 };
        let f = make_split(&s, &spec).unwrap();
        assert!(f[..5].iter().all(|&x| x == f[0]));
        let spec = SplitSpec { regime: Regime::TypeHoldout, folds: 4, seed: 0 };
        assert!(matches!(make_split(&s, &spec), Err(DatasetError::TooFewClasses { classes: 3, folds: 4 })));
    }
}

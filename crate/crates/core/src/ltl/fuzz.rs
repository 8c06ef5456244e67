//! Random formula generation for property tests.

use rand::Rng;

use super::formula::{Formula, Op, Prop};

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    /// Upper bound on node count.
    pub max_size: usize,
    /// Upper bound on tree height (a proposition has height 1).
    pub max_height: usize,
    pub props: Vec<Prop>,
}

impl FuzzConfig {
    pub fn new(max_size: usize, max_height: usize, props: &[&str]) -> Self {
        FuzzConfig {
            max_size,
            max_height,
            props: props.iter().map(|p| Prop::new(*p).expect("valid prop")).collect(),
        }
    }
}

/// A formula with size uniform in `1..=max_size` (shrunk if the height
/// bound forces it) and operators drawn uniformly from all eleven.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig) -> Formula {
    assert!(!cfg.props.is_empty() && cfg.max_size >= 1 && cfg.max_height >= 1);
    let size = rng.gen_range(1..=cfg.max_size);
    build(rng, cfg, size, cfg.max_height)
}

fn build<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig, size: usize, height: usize) -> Formula {
    if size == 1 || height == 1 {
        return Formula::Prop(cfg.props[rng.gen_range(0..cfg.props.len())].clone());
    }
    let unary = [Op::Not, Op::Next, Op::Finally, Op::Globally];
    let binary = [Op::And, Op::Or, Op::Implies, Op::Equiv, Op::Until, Op::WeakUntil, Op::StrongRelease];
    if size == 2 || rng.gen_bool(0.35) {
        let op = unary[rng.gen_range(0..unary.len())];
        op.build(vec![build(rng, cfg, size - 1, height - 1)])
    } else {
        let op = binary[rng.gen_range(0..binary.len())];
        let left = rng.gen_range(1..size - 1);
        let a = build(rng, cfg, left, height - 1);
        let b = build(rng, cfg, size - 1 - left, height - 1);
        op.build(vec![a, b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_bounds() {
        let cfg = FuzzConfig::new(12, 5, &["a", "b", "c"]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let f = random_formula(&mut rng, &cfg);
            assert!(f.size() <= 12 && f.height() <= 5);
            assert!(f.props().len() <= 3);
        }
    }
}

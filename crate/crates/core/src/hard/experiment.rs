use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::costfn::{CountingOracle, SetFunction};
use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::subset::Subset;

use super::xos::{canonical_rotation, default_threshold, HardParams, XosHardCost, FIRST};

/// Summary of a query-counting run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryStats {
    pub k: usize,
    pub m: usize,
    pub canonical: bool,
    pub trials: usize,
    pub seed: u64,
    /// Number of rotation classes of size-`m` subsets of `[k]`, `C(k, m) / k`.
    pub classes: usize,
    /// `(classes + 1) / 2`.
    pub analytic_mean: f64,
    pub mean: f64,
    pub median: f64,
    pub min: u64,
    pub max: u64,
    /// `(5/4)^k`, printed alongside for reference; not expected to match at this scale.
    pub asymptotic_bound: f64,
    pub counts: Vec<u64>,
}

/// One representative (the canonical rotation) per rotation class of size-`m` subsets of `[k]`.
pub fn rotation_classes(k: usize, m: usize) -> Vec<u32> {
    let mut reps = Vec::new();
    if m == 0 || m > k {
        return reps;
    }
    // Gosper's hack over all masks with m bits
    let mut mask: u32 = (1 << m) - 1;
    let limit = 1u32 << k;
    while mask < limit {
        if canonical_rotation(mask, k) == mask {
            reps.push(mask);
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    reps
}

/// Uniformly random `m`-subset of `[k]` as a bitmask.
pub fn random_hidden_set<R: Rng + ?Sized>(rng: &mut R, k: usize, m: usize) -> u32 {
    index::sample(rng, k, m).iter().fold(0u32, |acc, e| acc | 1 << e)
}

/// Parameters with a hidden set drawn from `seed`.
pub fn seeded_params(k: usize, m_override: Option<usize>, seed: u64) -> Result<HardParams> {
    let m = m_override.unwrap_or_else(|| default_threshold(k));
    if m == 0 || m >= k {
        return Err(Error::input(format!("threshold must be in 1..{k}, got {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    HardParams::new(k, random_hidden_set(&mut rng, k, m), m_override)
}

/// Number of value queries an adversary sampling one random member of each
/// rotation class (in random order, without replacement) needs to hit `cyclic(T)`.
fn one_trial(k: usize, m: usize, m_override: Option<usize>, classes: &[u32], rng: &mut ChaCha8Rng) -> Result<u64> {
    let t = random_hidden_set(rng, k, m);
    let params = HardParams::new(k, t, m_override)?;
    let oracle = CountingOracle::new(Arc::new(XosHardCost::new(&params)));
    let member_value = 1.0 / 40.0 + 1.0 / (80.0 * k as f64);
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.shuffle(rng);
    for c in order {
        let shift = rng.gen_range(0..k);
        let mut r = classes[c];
        for _ in 0..shift {
            r = ((r << 1) | (r >> (k - 1))) & ((1 << k) - 1);
        }
        let v = oracle.value(Subset::from_bits(r << FIRST));
        if (v - member_value).abs() < 1e-15 {
            return Ok(oracle.value_queries());
        }
    }
    Err(Error::Invariant("no rotation class contained the hidden set".into()))
}

pub fn query_experiment(k: usize, trials: usize, seed: u64, m_override: Option<usize>, exec: Execution) -> Result<QueryStats> {
    if trials == 0 {
        return Err(Error::input("need at least one trial"));
    }
    let m = m_override.unwrap_or_else(|| default_threshold(k));
    // validates k and m
    HardParams::new(k, (1 << m) - 1, m_override)?;
    let classes = rotation_classes(k, m);
    let counts: Vec<u64> = map_range(exec, trials, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        one_trial(k, m, m_override, &classes, &mut rng)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut sorted = counts.clone();
    sorted.sort_unstable();
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
    };
    Ok(QueryStats {
        k,
        m,
        canonical: m_override.is_none(),
        trials,
        seed,
        classes: classes.len(),
        analytic_mean: (classes.len() as f64 + 1.0) / 2.0,
        mean: counts.iter().sum::<u64>() as f64 / trials as f64,
        median,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        asymptotic_bound: 1.25f64.powi(k as i32),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        assert_eq!(rotation_classes(13, 11).len(), 6);
        assert_eq!(rotation_classes(13, 7).len(), 132);
        assert_eq!(rotation_classes(7, 6).len(), 1);
    }

    #[test]
    fn degenerate_case_hits_immediately() {
        let s = query_experiment(7, 20, 3, None, Execution::Sequential).unwrap();
        assert!(s.counts.iter().all(|&c| c == 1));
        assert_eq!(s.analytic_mean, 1.0);
    }

    #[test]
    fn reproducible_across_execution_modes() {
        let a = query_experiment(11, 40, 9, None, Execution::Sequential).unwrap();
        let b = query_experiment(11, 40, 9, None, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}

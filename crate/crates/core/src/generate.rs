//! Seeded random instances, cost functions, marginals and couplings for testing and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costfn::CostSpec;
use crate::model::{Action, Instance};
use crate::subset::Subset;

/// Random monotone table: `v(S) = max_{T ⊆ S} r(T)` for i.i.d. uniform `r`.
pub fn random_monotone_table<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CostSpec {
    let size = 1usize << n;
    let mut values = vec![0.0; size];
    for s in 1..size {
        let own = scale * rng.gen::<f64>();
        let below = (0..n).filter(|j| s >> j & 1 == 1).map(|j| values[s & !(1 << j)]).fold(0.0, f64::max);
        values[s] = own.max(below);
    }
    CostSpec::ExplicitTable { values }
}

/// A random member of one of the built-in submodular families, chosen by `kind % 4`.
pub fn random_submodular<R: Rng + ?Sized>(rng: &mut R, n: usize, kind: usize, scale: f64) -> CostSpec {
    let weights = |rng: &mut R| (0..n).map(|_| scale * rng.gen::<f64>()).collect::<Vec<_>>();
    match kind % 4 {
        0 => CostSpec::Additive { weights: weights(rng) },
        1 => {
            let w = weights(rng);
            let cap = w.iter().sum::<f64>() * rng.gen_range(0.2..0.9);
            CostSpec::BudgetAdditive { weights: w, cap }
        }
        2 => {
            let universe = rng.gen_range(2..=8);
            let covers = (0..n)
                .map(|_| (0..universe).filter(|_| rng.gen_bool(0.35)).collect())
                .collect();
            let element_weights = (0..universe).map(|_| scale * rng.gen::<f64>()).collect();
            CostSpec::WeightedCoverage { covers, element_weights }
        }
        _ => {
            // nonincreasing positive increments
            let mut inc: Vec<f64> = (0..n).map(|_| scale * rng.gen::<f64>()).collect();
            inc.sort_by(|a, b| b.total_cmp(a));
            let mut table = vec![0.0];
            for d in inc {
                table.push(table.last().unwrap() + d);
            }
            CostSpec::ConcaveCardinality { table }
        }
    }
}

fn draw(rng: &mut (impl Rng + ?Sized), lo: f64, hi: f64, grid: Option<f64>) -> f64 {
    match grid {
        Some(step) => {
            let steps = ((hi - lo) / step).round() as u32;
            lo + step * f64::from(rng.gen_range(0..=steps))
        }
        None => rng.gen_range(lo..=hi),
    }
}

/// `n` actions: `bot` with zero cost, then `a1, ..` with random success
/// probabilities and costs. With `coarse`, values sit on a 1/20 grid so that
/// ties and boundary cases are common.
pub fn random_actions<R: Rng + ?Sized>(rng: &mut R, n: usize, coarse: bool) -> Vec<Action> {
    let grid = coarse.then_some(0.05);
    let mut actions = vec![Action::new("bot", 0.0, draw(rng, 0.0, 0.3, grid))];
    for j in 1..n {
        let f = draw(rng, 0.05, 1.0, grid);
        let c = draw(rng, 0.0, 0.6, grid).min(f);
        actions.push(Action::new(format!("a{j}"), c, f));
    }
    actions
}

pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, cost: CostSpec, coarse: bool) -> Instance {
    Instance::new(random_actions(rng, n, coarse), "bot", Arc::new(cost)).expect("generated instances are valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostClass {
    /// One of the built-in submodular families.
    Submodular,
    /// An explicit monotone table.
    Monotone,
}

/// A reproducible random instance with `n` actions.
pub fn seeded_instance(n: usize, seed: u64, class: CostClass) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost = match class {
        CostClass::Submodular => {
            let kind = rng.gen_range(0..4);
            let scale = rng.gen_range(0.05..0.8);
            random_submodular(&mut rng, n, kind, scale)
        }
        CostClass::Monotone => {
            let scale = rng.gen_range(0.05..1.0);
            random_monotone_table(&mut rng, n, scale)
        }
    };
    random_instance(&mut rng, n, cost, seed.is_multiple_of(3))
}

/// Uniform marginals on `ground`, zero elsewhere; some entries are snapped to 0, 1 or to each other.
pub fn random_marginals<R: Rng + ?Sized>(rng: &mut R, n: usize, ground: Subset) -> Vec<f64> {
    let mut q = vec![0.0; n];
    let members: Vec<usize> = ground.iter().collect();
    for &j in &members {
        q[j] = match rng.gen_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen::<f64>(),
        };
    }
    if members.len() >= 2 && rng.gen_bool(0.2) {
        q[members[1]] = q[members[0]];
    }
    q
}

/// A random distribution over subsets of `ground` with marginals `q` and mass 1.
///
/// `ground` is split into random groups; within a group membership is
/// comonotone, across groups independent.
pub fn random_coupling<R: Rng + ?Sized>(rng: &mut R, ground: Subset, q: &[f64]) -> Vec<(Subset, f64)> {
    let mut members: Vec<usize> = ground.iter().collect();
    members.shuffle(rng);
    let mut dist = vec![(Subset::EMPTY, 1.0)];
    let mut rest = members.as_slice();
    while !rest.is_empty() {
        let take = rng.gen_range(1..=rest.len());
        let (group, tail) = rest.split_at(take);
        rest = tail;
        // comonotone within the group: thresholds of one shared uniform
        let mut sorted = group.to_vec();
        sorted.sort_by(|&a, &b| q[a].total_cmp(&q[b]));
        let mut levels = Vec::new();
        let mut prev = 0.0;
        let mut suffix: Subset = group.iter().copied().collect();
        for &j in &sorted {
            if q[j] > prev {
                levels.push((suffix, q[j] - prev));
            }
            prev = q[j];
            suffix = suffix.without(j);
        }
        levels.push((Subset::EMPTY, 1.0 - prev));
        dist = dist
            .iter()
            .flat_map(|&(s, p)| levels.iter().map(move |&(t, r)| (s.union(t), p * r)))
            .filter(|(_, p)| *p > 0.0)
            .collect();
    }
    dist
}

/// Convex combination of two distributions.
pub fn mix(a: &[(Subset, f64)], b: &[(Subset, f64)], w: f64) -> Vec<(Subset, f64)> {
    a.iter().map(|&(s, p)| (s, w * p)).chain(b.iter().map(|&(s, p)| (s, (1.0 - w) * p))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::checks::{check_monotone, check_submodular, CheckMode};
    use crate::costfn::SetFunction;

    #[test]
    fn generated_costs_are_in_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in 0..40 {
            let table = random_monotone_table(&mut rng, 5, 0.5);
            table.validate(5).unwrap();
            let sub = random_submodular(&mut rng, 5, t, 0.5);
            sub.validate(5).unwrap();
            assert!(check_monotone(&sub, CheckMode::Exhaustive).unwrap().holds);
            assert!(check_submodular(&sub, CheckMode::Exhaustive).unwrap().holds);
        }
    }

    #[test]
    fn couplings_realize_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let ground = Subset::full(5);
            let q = random_marginals(&mut rng, 5, ground);
            let d = random_coupling(&mut rng, ground, &q);
            let mass: f64 = d.iter().map(|(_, p)| p).sum();
            assert!((mass - 1.0).abs() < 1e-12);
            for j in 0..5 {
                let m: f64 = d.iter().filter(|(s, _)| s.contains(j)).map(|(_, p)| p).sum();
                assert!((m - q[j]).abs() < 1e-12);
            }
        }
        let f = CostSpec::Additive { weights: vec![1.0; 2] };
        assert_eq!(f.value(Subset::full(2)), 2.0);
    }
}

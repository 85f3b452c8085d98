mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use icx::costfn::checks::{check_monotone, check_submodular, CheckMode};
use icx::costfn::{demand_default, price, SetFunction};
use icx::det::{solve_deterministic, solve_deterministic_with};
use icx::generate::{mix, random_coupling, random_instance, random_marginals, random_monotone_table, random_submodular};
use icx::hard::{cyclic, gen_xos_hard, HardParams};
use icx::io::{canonical_json, instance_to_value, parse_instance};
use icx::model::{agent_utility, is_ic, marginal, normalize_scheme, principal_utility};
use icx::oracle::{brute_force_deterministic, brute_force_randomized_with, simplex_solve, LinearProgram, LpStatus, Sense};
use icx::randomized::{breakpoints, eta, nested_min_cost_distribution, solve_randomized_with, RandOptions};
use icx::report::{solve_report, Mode, SolveOptions};
use icx::{CostSpec, CountingOracle, Execution, Instance, InspectionScheme, MarginalProfile, Subset};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_scheme(rng: &mut ChaCha8Rng, n: usize) -> InspectionScheme {
    let support = rng.gen_range(1..=4);
    let mut w: Vec<f64> = (0..support).map(|_| rng.gen::<f64>() + 0.01).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let dist = w.into_iter().map(|p| (Subset::from_bits(rng.gen_range(0..1u32 << n)), p)).collect();
    InspectionScheme::new(rng.gen_range(0..n), rng.gen::<f64>(), dist)
}

fn submodular_instance(seed: u64, max_n: usize) -> Instance {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n);
    let kind = r.gen_range(0..4);
    let scale = r.gen_range(0.05..0.8);
    let cost = random_submodular(&mut r, n, kind, scale);
    random_instance(&mut r, n, cost, seed % 3 == 0)
}

/// Minimum of `c·x` over `{A x <= b, x >= 0}` by enumerating basic solutions.
fn vertex_min(c: &[f64], rows: &[(Vec<f64>, f64)]) -> Option<f64> {
    let d = c.len();
    let mut planes: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = -1.0;
        planes.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    let total = planes.len();
    for mask in 0u32..1 << total {
        if mask.count_ones() as usize != d {
            continue;
        }
        let chosen: Vec<&(Vec<f64>, f64)> = (0..total).filter(|t| mask >> t & 1 == 1).map(|t| &planes[t]).collect();
        let mut m: Vec<Vec<f64>> = chosen.iter().map(|(a, b)| a.iter().copied().chain([*b]).collect()).collect();
        let Some(x) = gauss(&mut m) else { continue };
        if planes.iter().all(|(a, b)| a.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-9) {
            let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

fn gauss(m: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let d = m.len();
    for col in 0..d {
        let piv = (col..d).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..d {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..=d {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some((0..d).map(|r| m[r][d] / m[r][r]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalization_keeps_agent_utilities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=6);
        let scale = r.gen_range(0.1..1.0);
        let cost = random_monotone_table(&mut r, n, scale);
        let inst = random_instance(&mut r, n, cost, false);
        let s = random_scheme(&mut r, n);
        let t = normalize_scheme(&s);
        for j in 0..n {
            prop_assert!((agent_utility(&inst, &s, j) - agent_utility(&inst, &t, j)).abs() <= 1e-12);
        }
        let i = s.suggested;
        prop_assert!(principal_utility(&inst, &t, i) >= principal_utility(&inst, &s, i) - 1e-12);
        prop_assert!((t.total_mass() - 1.0).abs() <= 1e-12);
        for j in 0..n {
            let m = marginal(&t, j);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
        }
    }

    #[test]
    fn inspecting_the_suggestion_catches_everyone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=6);
        let cost = CostSpec::Additive { weights: vec![0.1; n] };
        let inst = random_instance(&mut r, n, cost, false);
        let i = r.gen_range(0..n);
        let s = Subset::from_bits(r.gen_range(0..1u32 << n)).with(i);
        let scheme = InspectionScheme::deterministic(i, r.gen(), s);
        for j in (0..n).filter(|&j| j != i) {
            prop_assert_eq!(agent_utility(&inst, &scheme, j), -inst.c(j));
        }
    }

    #[test]
    fn generated_costs_are_normalized_and_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let kind = r.gen_range(0..4);
        let f = random_submodular(&mut r, n, kind, 1.0);
        prop_assert_eq!(f.value(Subset::EMPTY), 0.0);
        prop_assert!(check_monotone(&f, CheckMode::Exhaustive).unwrap().holds);
        prop_assert!(check_submodular(&f, CheckMode::Exhaustive).unwrap().holds);
        let t = random_monotone_table(&mut r, n, 1.0);
        prop_assert!(check_monotone(&t, CheckMode::Exhaustive).unwrap().holds);
    }

    #[test]
    fn counting_oracle_is_transparent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let kind = r.gen_range(0..4);
        let inner: Arc<dyn SetFunction> = Arc::new(random_submodular(&mut r, n, kind, 1.0));
        let counter = CountingOracle::new(inner.clone());
        let (v0, d0) = (counter.value_queries(), counter.demand_queries());
        let calls = r.gen_range(0..30);
        let mut demands = 0;
        for _ in 0..calls {
            if r.gen_bool(0.2) {
                let q: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
                prop_assert_eq!(counter.demand(&q).unwrap(), inner.demand(&q).unwrap());
                demands += 1;
            } else {
                let s = Subset::from_bits(r.gen_range(0..1u32 << n));
                prop_assert_eq!(counter.value(s), inner.value(s));
            }
        }
        prop_assert_eq!(counter.value_queries() - v0, (calls - demands) as u64);
        prop_assert_eq!(counter.demand_queries() - d0, demands as u64);
    }

    #[test]
    fn demand_is_never_dominated(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=7);
        let f = random_monotone_table(&mut r, n, 1.0);
        let q: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..0.5)).collect();
        let s = demand_default(&f, &q).unwrap();
        let best = f.value(s) - price(&q, s);
        for t in Subset::all(n) {
            prop_assert!(best >= f.value(t) - price(&q, t) - 1e-15);
        }
    }

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(1..=3);
        let c: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut lp = LinearProgram::new(c.clone());
        let mut rows = Vec::new();
        for _ in 0..r.gen_range(1..=4) {
            let a: Vec<f64> = (0..d).map(|_| r.gen_range(0.1..1.0)).collect();
            let b = r.gen_range(0.5..2.0);
            lp.add(a.clone(), Sense::Le, b);
            rows.push((a, b));
        }
        if r.gen_bool(0.5) {
            let a: Vec<f64> = (0..d).map(|_| r.gen_range(0.0..1.0)).collect();
            let b = r.gen_range(0.0..1.5);
            lp.add(a.clone(), Sense::Ge, b);
            rows.push((a.iter().map(|x| -x).collect(), -b));
        }
        let sol = simplex_solve(&lp).unwrap();
        match vertex_min(&c, &rows) {
            Some(v) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.value - v).abs() <= 1e-8, "simplex {} vs vertices {}", sol.value, v);
            }
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn nested_beats_random_couplings(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let ground = Subset::full(n);
        let kind = r.gen_range(0..4);
        let f = random_submodular(&mut r, n, kind, 1.0);
        let q = random_marginals(&mut r, n, ground);
        let profile = MarginalProfile::new(q.clone()).unwrap();
        let nested = nested_min_cost_distribution(ground, &profile, 1.0, &f).unwrap();
        for _ in 0..100 {
            let a = random_coupling(&mut r, ground, &q);
            let b = random_coupling(&mut r, ground, &q);
            let w = r.gen::<f64>();
            let d = mix(&a, &b, w);
            let cost: f64 = d.iter().map(|(s, p)| p * f.value(*s)).sum();
            prop_assert!(nested.cost <= cost + 1e-12);
        }
    }

    #[test]
    fn eta_order_is_fixed_inside_intervals(seed in any::<u64>()) {
        let inst = submodular_instance(seed, 7);
        let mut r = rng(seed ^ 1);
        for i in 0..inst.n() {
            let (fi, ci) = (inst.f(i), inst.c(i));
            if !(fi > ci && ci > 0.0) {
                continue;
            }
            let part = breakpoints(&inst, i).unwrap();
            for l in 0..part.intervals() {
                let (lo, hi) = part.interval(l);
                let active: Vec<usize> = part.orders[l].iter().copied().filter(|&j| inst.f(j) > 0.0).collect();
                for _ in 0..5 {
                    let a = lo + (hi - lo) * r.gen_range(0.01..0.99);
                    let p = r.gen::<f64>();
                    let vals: Vec<f64> = active.iter().map(|&j| eta(&inst, i, j, a, p).unwrap()).collect();
                    prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-9), "interval {l} at {a}: {vals:?}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn deterministic_matches_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=7);
        let cost = random_monotone_table(&mut r, n, 0.5);
        let inst = random_instance(&mut r, n, cost, seed % 2 == 0);
        let sol = solve_deterministic(&inst).unwrap();
        let brute = brute_force_deterministic(&inst).unwrap();
        prop_assert!((sol.best.utility - brute.utility).abs() <= 1e-9);
        for c in &sol.candidates {
            prop_assert!(is_ic(&inst, &c.scheme(), 1e-12));
        }
    }

    #[test]
    fn randomized_schemes_are_valid_and_beat_deterministic(seed in any::<u64>()) {
        let inst = submodular_instance(seed, 6);
        let sol = solve_randomized_with(&inst, RandOptions::default()).unwrap();
        prop_assert!(is_ic(&inst, &sol.scheme, 1e-9));
        prop_assert!(sol.scheme.support_size() <= inst.n() + 1);
        prop_assert!((sol.scheme.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!((principal_utility(&inst, &sol.scheme, sol.scheme.suggested) - sol.utility).abs() <= 1e-9);
        let det = solve_deterministic(&inst).unwrap().best.utility;
        prop_assert!(sol.utility >= det - 1e-9);
    }

    #[test]
    fn randomized_matches_oracle(seed in any::<u64>()) {
        let inst = submodular_instance(seed, 5);
        let sol = solve_randomized_with(&inst, RandOptions::default()).unwrap();
        let oracle = brute_force_randomized_with(&inst, 0.05, &[], Execution::Sequential).unwrap();
        prop_assert!((sol.utility - oracle.utility).abs() <= 1e-4, "solver {} oracle {}", sol.utility, oracle.utility);
    }

    #[test]
    fn sequential_and_parallel_agree(seed in any::<u64>()) {
        let inst = submodular_instance(seed, 6);
        let a = solve_deterministic_with(&inst, Execution::Sequential).unwrap();
        let b = solve_deterministic_with(&inst, Execution::Parallel).unwrap();
        prop_assert_eq!(a.scheme(), b.scheme());
        let seq = RandOptions { exec: Execution::Sequential, ..RandOptions::default() };
        let par = RandOptions { exec: Execution::Parallel, ..RandOptions::default() };
        let x = solve_randomized_with(&inst, seq).unwrap();
        let y = solve_randomized_with(&inst, par).unwrap();
        prop_assert_eq!(x.scheme, y.scheme);
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>()) {
        let inst = submodular_instance(seed, 6);
        let v = instance_to_value(&inst).unwrap();
        let again = parse_instance(&canonical_json(&v)).unwrap();
        prop_assert_eq!(canonical_json(&instance_to_value(&again).unwrap()), canonical_json(&v));
    }

    #[test]
    fn reports_are_byte_identical(seed in any::<u64>()) {
        let inst = submodular_instance(seed, 5);
        for mode in [Mode::Det, Mode::Rand] {
            let a = serde_json::to_string(&solve_report(&inst, mode, SolveOptions::default()).unwrap()).unwrap();
            let b = serde_json::to_string(&solve_report(&inst, mode, SolveOptions::default()).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn cyclic_shifts_have_uniform_incidence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = [7usize, 11, 13][r.gen_range(0..3)];
        let size = r.gen_range(1..k);
        let mut t = 0u32;
        while (t.count_ones() as usize) < size {
            t |= 1 << r.gen_range(0..k);
        }
        let members = cyclic(t, k);
        prop_assert_eq!(members.len(), k);
        for e in 0..k {
            prop_assert_eq!(members.iter().filter(|&&s| s >> e & 1 == 1).count(), size);
        }
    }
}

#[test]
fn hard_instances_validate() {
    for (k, t) in [(7, 0b1110111u32), (11, 0b111_1111_1100), (13, 0b1_1111_1110_1011)] {
        let p = HardParams::new(k, t, None).unwrap();
        let inst = gen_xos_hard(&p).unwrap();
        assert_eq!(inst.n(), k + 3);
        let v = inst.cost_fn();
        assert!(check_monotone(v.as_ref(), CheckMode::Sampled { seed: 1, count: 3000 }).unwrap().holds);
    }
}

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use icx::det::solve_deterministic_with;
use icx::generate::{random_instance, random_submodular};
use icx::hard::query_experiment;
use icx::oracle::brute_force_randomized_with;
use icx::randomized::{solve_randomized_with, RandOptions};
use icx::{Execution, Instance};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn instance(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost = random_submodular(&mut rng, n, 2, 0.3);
    random_instance(&mut rng, n, cost, false)
}

fn deterministic(c: &mut Criterion) {
    let mut g = c.benchmark_group("deterministic");
    for n in [16, 28] {
        let inst = instance(n, 1);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &inst, |b, inst| {
                b.iter(|| solve_deterministic_with(inst, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn randomized(c: &mut Criterion) {
    let mut g = c.benchmark_group("randomized");
    g.sample_size(20);
    for n in [10, 16] {
        let inst = instance(n, 2);
        for (name, exec) in MODES {
            let opts = RandOptions { exec, verify_submodular: false };
            g.bench_with_input(BenchmarkId::new(name, n), &inst, |b, inst| {
                b.iter(|| solve_randomized_with(inst, opts).unwrap())
            });
        }
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let inst = instance(6, 3);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| brute_force_randomized_with(&inst, 0.01, &[], exec).unwrap()));
    }
    g.finish();
}

fn experiment(c: &mut Criterion) {
    let mut g = c.benchmark_group("query_experiment");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| query_experiment(13, 500, 7, Some(7), exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, deterministic, randomized, oracle, experiment);
criterion_main!(benches);

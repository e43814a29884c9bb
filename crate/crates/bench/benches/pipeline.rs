//! Criterion benchmarks for the heavy pipeline stages: block assembly
//! (the O(n m^3) contract), the coordinate-descent path, and the Gibbs
//! sampler.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gsm::*;
use nalgebra::DMatrix;
use rand::Rng;

fn tn_dataset(n: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = trial_rng(seed, 0);
    Dataset::new(DMatrix::from_fn(n, m, |_, _| 0.01 + 2.0 * rng.random::<f64>())).unwrap()
}

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_pairwise");
    let n = 200;
    for m in [20usize, 40, 80] {
        let data = tn_dataset(n, m, m as u64);
        let spec = ModelSpec::truncated_gaussian(true);
        let hs: Vec<HSpec> = vec!["pow:1:3".parse().unwrap(); m];
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| assemble_pairwise(&spec, &hs, &data).unwrap())
        });
    }
    group.finish();
}

fn bench_solver_path(c: &mut Criterion) {
    let n = 200;
    let m = 40;
    let data = tn_dataset(n, m, 7);
    let spec = ModelSpec::truncated_gaussian(true);
    let hs: Vec<HSpec> = vec!["pow:1:3".parse().unwrap(); m];
    let loss = assemble_pairwise(&spec, &hs, &data).unwrap();
    let loss = amplify(&loss, &AmplifierSpec::multiplier(1.5, AmplifierScope::AllDiagonal))
        .unwrap();
    let grid = default_lambda_grid(&loss, 20);
    let cfg = SolverConfig::default();
    c.bench_function("solve_path_m40_20lambdas", |b| {
        b.iter(|| solve_path(&loss, &grid, &cfg).unwrap())
    });
}

fn bench_gibbs(c: &mut Criterion) {
    let m = 50;
    let mut rng = trial_rng(11, 0);
    let k0 = generate_k0(m, &GraphSpec::block(0.5, 5), &mut rng).unwrap();
    let params = InteractionParams::centered(k0).unwrap();
    let cfg = GibbsConfig { burn_in: 100, thin: 2, ..Default::default() };
    c.bench_function("tn_gibbs_m50_100rows", |b| {
        b.iter(|| sample_tn_gibbs(&params, 100, &cfg, &mut trial_rng(11, 1)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_assembly, bench_solver_path, bench_gibbs
}
criterion_main!(benches);

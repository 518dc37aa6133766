//! Hot-path benchmarks: noise sampling, norm gradients, linear
//! minimization oracles, and full solver runs at a small but
//! representative scale.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use gnfw::geometry::{lmo_lp_ball, smooth_norm_grad_sq, FeasibleSet};
use gnfw::mechanisms::{GGParams, GGSampler, PrivacyBudget};
use gnfw::problems::Problem;
use gnfw::solvers::{noisy_tree_sfw, poly_sfw, PolySfwConfig, TreeSfwConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn lobe_bias(d: usize) -> Vec<f64> {
    (0..d)
        .map(|j| {
            let lobe = if j % 2 == 0 { 0.6 } else { -0.3 };
            lobe * (j + 1) as f64 / d as f64
        })
        .collect()
}

fn bench_gg_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("gg_sample");
    for &d in &[20usize, 200] {
        let params = GGParams::centered(d, 3.0, 1.0).unwrap();
        let sampler = GGSampler::new(&params);
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        group.throughput(Throughput::Elements(d as u64));
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| black_box(sampler.sample(&mut rng)))
        });
    }
    group.finish();
}

fn bench_geometry_kernels(c: &mut Criterion) {
    let d = 200;
    let mut rng = ChaCha12Rng::seed_from_u64(29);
    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();

    let mut group = c.benchmark_group("geometry");
    group.throughput(Throughput::Elements(d as u64));
    group.bench_function("smooth_norm_grad_sq_r3", |b| {
        b.iter(|| black_box(smooth_norm_grad_sq(black_box(&x), 3.0).unwrap()))
    });
    for &p in &[1.0, 1.5] {
        group.bench_with_input(BenchmarkId::new("lmo_lp_ball", p), &p, |b, &p| {
            b.iter(|| black_box(lmo_lp_ball(black_box(&x), p, 1.0).unwrap()))
        });
    }
    group.finish();
}

fn bench_solvers(c: &mut Criterion) {
    let d = 20;
    let n = 4096;
    let budget = PrivacyBudget::new(1.0, 1e-6).unwrap();

    let mut group = c.benchmark_group("solver_run");
    group.sample_size(20);
    group.throughput(Throughput::Elements(n as u64));

    let ball = Problem::linear(FeasibleSet::lp_ball(1.5, 1.0).unwrap(), lobe_bias(d)).unwrap();
    let tree_cfg = TreeSfwConfig::for_problem(&ball, n, budget, 5).unwrap();
    let mut data_rng = ChaCha12Rng::seed_from_u64(11);
    let tree_data = ball.generate_dataset(n, &mut data_rng);
    group.bench_function("tree_sfw_n4096_d20", |b| {
        b.iter(|| {
            let mut rng = ChaCha12Rng::seed_from_u64(5);
            black_box(noisy_tree_sfw(&tree_data, &ball, &tree_cfg, &mut rng).unwrap())
        })
    });

    let cross = Problem::linear(
        FeasibleSet::Polytope(gnfw::geometry::Polytope::l1_ball(d, 1.0).unwrap()),
        lobe_bias(d),
    )
    .unwrap();
    let poly_cfg = PolySfwConfig::for_problem(&cross, n, budget, 5).unwrap();
    let mut data_rng = ChaCha12Rng::seed_from_u64(13);
    let poly_data = cross.generate_dataset(n, &mut data_rng);
    group.bench_function("poly_sfw_n4096_d20", |b| {
        b.iter(|| {
            let mut rng = ChaCha12Rng::seed_from_u64(5);
            black_box(poly_sfw(&poly_data, &cross, &poly_cfg, &mut rng).unwrap())
        })
    });

    group.finish();
}

criterion_group!(benches, bench_gg_sampling, bench_geometry_kernels, bench_solvers);
criterion_main!(benches);

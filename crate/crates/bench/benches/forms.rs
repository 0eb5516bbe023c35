use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ergodic_osc_bench::{cyclic_fixture, random_fixture, rotation_fixture};
use ergodic_osc_core::averages::{bilinear_hilbert, maximal_hilbert, weighted_biform_space};
use ergodic_osc_core::kernels::sample_discrete_family;
use ergodic_osc_core::norms::weak_l1_norm;
use ergodic_osc_core::weights::{WeightSequence, Weights};

/// Residue folding on a periodic system against an explicit orbit walk over the same weights.
fn fold_vs_walk(c: &mut Criterion) {
    let mut group = c.benchmark_group("difference_form");
    let periodic = cyclic_fixture(257, 1);
    // Phased rotations are aperiodic under the period cap, so they take the walk path.
    let aperiodic = rotation_fixture(257, 1);
    for j in [18i64, 20, 22] {
        let d = sample_discrete_family(4, 2, j).unwrap().2;
        let explicit = WeightSequence::from_weights(&d);
        group.bench_with_input(BenchmarkId::new("fold", j), &j, |b, _| {
            b.iter(|| weighted_biform_space(&periodic.system, &periodic.f, &periodic.g, black_box(&d as &dyn Weights)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("walk", j), &j, |b, _| {
            b.iter(|| weighted_biform_space(&aperiodic.system, &aperiodic.f, &aperiodic.g, black_box(&explicit as &dyn Weights)).unwrap())
        });
    }
    group.finish();
}

fn hilbert(c: &mut Criterion) {
    let mut group = c.benchmark_group("hilbert");
    let fx = random_fixture(1024, 2);
    for r in [64.0, 512.0, 4096.0] {
        group.bench_with_input(BenchmarkId::new("truncated", r), &r, |b, &r| b.iter(|| bilinear_hilbert(&fx.system, &fx.f, &fx.g, black_box(r)).unwrap()));
    }
    group.bench_function("maximal_J256", |b| b.iter(|| maximal_hilbert(&fx.system, &fx.f, &fx.g, black_box(256)).unwrap()));
    group.finish();
}

fn weak_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("weak_l1");
    for n in [1usize << 10, 1 << 14, 1 << 18] {
        let fx = random_fixture(n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| weak_l1_norm(black_box(&fx.f))));
    }
    group.finish();
}

criterion_group!(benches, fold_vs_walk, hilbert, weak_norm);
criterion_main!(benches);

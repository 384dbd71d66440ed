use bell_magic::estimation::{estimate_bell_magic, estimate_bell_magic_disjoint};
use bell_magic::magic::{bell_magic_direct, bell_magic_from_distribution};
use bell_magic::rng::stream_rng;
use bell_magic::simulator::bell_distribution;
use bell_magic::stabilizer::random_clifford;
use bell_magic_bench::{magic_distribution, magic_outcomes, random_state};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn distribution(c: &mut Criterion) {
    let mut g = c.benchmark_group("bell_distribution");
    for n in [4, 8, 10] {
        let state = random_state(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, s| b.iter(|| bell_distribution(black_box(s)).unwrap()));
    }
    g.finish();
}

fn exact_magic(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_bell_magic");
    for n in [2, 3, 4] {
        let dist = bell_distribution(&random_state(n)).unwrap();
        g.bench_with_input(BenchmarkId::new("transform", n), &dist, |b, d| b.iter(|| bell_magic_from_distribution(black_box(d))));
        g.bench_with_input(BenchmarkId::new("direct", n), &dist, |b, d| b.iter(|| bell_magic_direct(black_box(d))));
    }
    for n in [8, 10] {
        let dist = magic_distribution(n);
        g.bench_with_input(BenchmarkId::new("transform", n), &dist, |b, d| b.iter(|| bell_magic_from_distribution(black_box(d))));
    }
    g.finish();
}

fn estimator(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimator");
    for nq in [1_000, 10_000] {
        let outcomes = magic_outcomes(8, nq);
        g.bench_with_input(BenchmarkId::new("resample", nq), &outcomes, |b, o| {
            let mut rng = stream_rng(1, 0);
            b.iter(|| estimate_bell_magic(black_box(o), 10 * o.len(), &mut rng).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("disjoint", nq), &outcomes, |b, o| {
            let mut rng = stream_rng(1, 0);
            b.iter(|| estimate_bell_magic_disjoint(black_box(o), &mut rng).unwrap())
        });
    }
    g.finish();
}

fn stabilizer_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("stabilizer_sampling");
    for n in [50, 200] {
        let (tableau, _) = random_clifford(n, 4, &mut stream_rng(2, n as u64)).unwrap();
        g.bench_with_input(BenchmarkId::new("1000_samples", n), &tableau, |b, t| {
            let mut rng = stream_rng(3, 0);
            b.iter(|| t.bell_sample(1000, &mut rng))
        });
    }
    g.finish();
}

criterion_group!(benches, distribution, exact_magic, estimator, stabilizer_sampling);
criterion_main!(benches);

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qtm_core::corpus::{random_layered_unitary, random_probabilistic, CorpusParams};
use qtm_core::gatekit::compose;
use qtm_core::{enumerate_paths, evolve, parse_machine, serialize_machine, validate_norm_preserving, Gate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn evolution(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = CorpusParams { max_branching: 2, defined: 1.0, ..CorpusParams::default() };
    // Skip machines that halt within a few steps.
    let m = loop {
        let m = random_probabilistic(&mut rng, &p);
        if evolve(&m, "00", 12).unwrap().len() >= 200 {
            break m;
        }
    };
    let mut group = c.benchmark_group("evolve_probabilistic");
    for steps in [4, 8, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |b, &n| {
            b.iter(|| evolve(&m, black_box("00"), n).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("enumerate_paths");
    for steps in [4, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |b, &n| {
            b.iter(|| enumerate_paths(&m, black_box("00"), n, 1_000_000).unwrap())
        });
    }
    group.finish();
}

fn validation(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = random_layered_unitary(&mut rng, &CorpusParams::default());
    c.bench_function("validate_layered_unitary", |b| {
        b.iter(|| validate_norm_preserving(&m, black_box(&["0", "00", ""]), 4).unwrap())
    });
}

fn gates(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut group = c.benchmark_group("compose");
    for dim in [2, 4, 8] {
        let a = Gate::random_unitary(dim, &mut rng);
        let g = Gate::random_unitary(dim, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| compose(black_box(&a), black_box(&g)).unwrap())
        });
    }
    group.finish();
}

fn text(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = CorpusParams { max_states: 8, max_symbols: 4, ..CorpusParams::default() };
    let source = serialize_machine(&random_probabilistic(&mut rng, &p));
    c.bench_function("parse_machine", |b| b.iter(|| parse_machine(black_box(&source)).unwrap()));
}

criterion_group!(benches, evolution, validation, gates, text);
criterion_main!(benches);

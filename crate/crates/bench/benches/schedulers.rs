use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use diskarm_core::oracle::optimal_order;
use diskarm_core::schedulers::simulate;
use diskarm_core::workload::{builtin_case, generate, TrackOrder};
use diskarm_core::{Algorithm, DiskGeometry, GeneratorParams};

fn per_scheduler(c: &mut Criterion) {
    let case = builtin_case(6).unwrap();
    let mut group = c.benchmark_group("case6");
    for alg in Algorithm::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(alg), &alg, |b, &alg| {
            b.iter(|| simulate(black_box(&case), alg, true).unwrap())
        });
    }
    group.finish();
}

fn queue_length(c: &mut Criterion) {
    let mut group = c.benchmark_group("modsbsm_queue");
    for n in [100usize, 1_000, 10_000] {
        let params = GeneratorParams::new(n, TrackOrder::Random, 11);
        let s = generate(DiskGeometry::standard(4), params).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| simulate(black_box(s), Algorithm::Modsbsm, false).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let s = builtin_case(2).unwrap().prefix(8);
    c.bench_function("oracle_8", |b| b.iter(|| optimal_order(black_box(&s)).unwrap()));
}

criterion_group!(benches, per_scheduler, queue_length, oracle);
criterion_main!(benches);

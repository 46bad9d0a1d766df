use ccx_bench::{pseudo_random_matrix, worked_target};
use ccx_core::bh::simulate_bh;
use ccx_core::controls::{BilinearMap, ControlSignal, Role};
use ccx_core::linalg::svd;
use ccx_core::partition::{build_protocol_tree, min_monochromatic_partition};
use ccx_core::protocol::{run_two_phase, RoundConfig};
use ccx_core::synthesis::{synthesize_single_round, TargetMatrix};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn bench_svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("svd");
    for n in [4usize, 16, 32] {
        let m = pseudo_random_matrix(n, n, 5.0, 7);
        group.bench_function(format!("{n}x{n}"), |b| {
            b.iter(|| svd(black_box(&m)).unwrap())
        });
    }
    group.finish();
}

fn bench_synthesis(c: &mut Criterion) {
    let h = worked_target();
    let f = BilinearMap::fb(8);
    c.bench_function("synthesize_4x4", |b| {
        b.iter(|| synthesize_single_round(black_box(&h), &f, 4, 4, 1e-9).unwrap())
    });
    let big = TargetMatrix::new(pseudo_random_matrix(6, 6, 5.0, 11));
    let f12 = BilinearMap::fb(12);
    c.bench_function("synthesize_6x6", |b| {
        b.iter(|| synthesize_single_round(black_box(&big), &f12, 6, 6, 1e-9).unwrap())
    });
}

fn bench_simulation(c: &mut Criterion) {
    let u = ControlSignal::new(Role::Alice, vec![1.0, -0.5, 0.7, 0.3]).unwrap();
    let v = ControlSignal::new(Role::Bob, vec![0.4, 1.1, -0.6, 0.2]).unwrap();
    c.bench_function("simulate_bh_10k_steps", |b| {
        b.iter(|| simulate_bh(black_box(&u), black_box(&v), 10_000))
    });
}

fn bench_partition(c: &mut Criterion) {
    let h = worked_target();
    c.bench_function("min_partition_worked_4x4", |b| {
        b.iter(|| min_monochromatic_partition(black_box(&h), 500_000))
    });
}

fn bench_two_phase(c: &mut Criterion) {
    let h = worked_target();
    let search = min_monochromatic_partition(&h, 500_000);
    let tree = build_protocol_tree(&search.partition, &h).unwrap();
    let cfg = RoundConfig { steps_per_round: 1_000, ..RoundConfig::default() };
    c.bench_function("two_phase_run", |b| {
        b.iter(|| run_two_phase(&tree, &search.partition, black_box(&h), 1, 2, 1e-3, &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    bench_svd,
    bench_synthesis,
    bench_simulation,
    bench_partition,
    bench_two_phase
);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, Criterion};

use vbsync::harness::{run_sweep_with, ExecMode, SweepConfig};

fn small_sweep() -> SweepConfig {
    SweepConfig { trials_per_point: 200, ..Default::default() }
}

fn sweep_modes(c: &mut Criterion) {
    let cfg = small_sweep();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| run_sweep_with(&cfg, ExecMode::Sequential).unwrap()));
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| b.iter(|| run_sweep_with(&cfg, ExecMode::Parallel).unwrap()));
    group.finish();
}

criterion_group!(benches, sweep_modes);
criterion_main!(benches);

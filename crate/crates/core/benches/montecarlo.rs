use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use swipt_core::metrics::{DerivedSnrScales, OutageQuery};
use swipt_core::montecarlo::{simulate_metrics_scales, McConfig};

fn simulate(c: &mut Criterion) {
    let scales = DerivedSnrScales {
        gamma_hat_r: 123.74,
        gamma_hat_d: 65.625,
    };
    let q = OutageQuery::new(1.0).unwrap();
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get());
    let mut group = c.benchmark_group("simulate_metrics");
    group.sample_size(10);
    for &m in &[1.0, 3.0] {
        let mut cfg = McConfig::new(1 << 20, 7);
        cfg.batch_size = 1 << 14;
        group.bench_with_input(BenchmarkId::new("sequential", m), &m, |b, &m| {
            b.iter(|| simulate_metrics_scales(scales, black_box(m), 0.5, q, &cfg).unwrap())
        });
        let par = cfg.with_workers(threads);
        group.bench_with_input(BenchmarkId::new(format!("parallel_{threads}"), m), &m, |b, &m| {
            b.iter(|| simulate_metrics_scales(scales, black_box(m), 0.5, q, &par).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, simulate);
criterion_main!(benches);

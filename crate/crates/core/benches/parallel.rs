//! Sequential against data-parallel execution for the two heaviest
//! workloads: a Monte-Carlo ratio suite and a kernel audit.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jacobi_spectral::kernels::{cz_audit, AuditGrid, AuditKind};
use jacobi_spectral::report::SuiteSettings;
use jacobi_spectral::spaces::gfunction_norm_experiment;
use jacobi_spectral::{Execution, ParameterPair};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ratio_suite(c: &mut Criterion) {
    let params = ParameterPair::new(0.2, -0.3).unwrap();
    let mut group = c.benchmark_group("gfunction_ratio_suite");
    group.sample_size(10);
    for (name, exec) in MODES {
        let settings = SuiteSettings {
            samples: 24,
            resolution: 64,
            exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &settings, |b, s| {
            b.iter(|| gfunction_norm_experiment(black_box(&params), 3.0, 0.5, s).unwrap())
        });
    }
    group.finish();
}

fn kernel_audit(c: &mut Criterion) {
    let params = ParameterPair::new(0.0, 0.0).unwrap();
    let grid = AuditGrid {
        points: 4,
        ..Default::default()
    };
    let mut group = c.benchmark_group("growth_audit");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| cz_audit(black_box(params), 0.5, AuditKind::Growth, &grid, e).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ratio_suite, kernel_audit);
criterion_main!(benches);

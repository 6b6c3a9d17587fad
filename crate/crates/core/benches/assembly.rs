use std::hint::black_box;

use backflow_core::spectral::{build_matrix_with, lowest_eigenpair_with};
use backflow_core::{DefectSpec, Execution, GaussianTest, GridSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("serial", Execution::Serial), ("parallel", Execution::Parallel)];

fn assembly(c: &mut Criterion) {
    let test = GaussianTest::new(0.1, 0.1).unwrap();
    let defect = DefectSpec::jump(4.0, true).unwrap();
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    for n in [250, 500] {
        let grid = GridSpec::new(n, 100.0).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, g| {
                b.iter(|| build_matrix_with(&defect, &test, black_box(g), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn eigensolve(c: &mut Criterion) {
    let test = GaussianTest::new(0.0, 0.1).unwrap();
    let mut group = c.benchmark_group("lowest_eigenpair");
    group.sample_size(10);
    for n in [250, 500] {
        let m = build_matrix_with(&DefectSpec::delta(-0.5).unwrap(), &test, &GridSpec::new(n, 100.0).unwrap(), Execution::Parallel).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &m, |b, m| b.iter(|| lowest_eigenpair_with(black_box(m), exec).unwrap()));
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    use backflow_core::scan::{run_sweep_with, SweepOptions, SweepPlan};
    use backflow_core::DefectKind;
    let plan = SweepPlan::new(DefectKind::Delta, false, vec![-0.5, 1.0], Some(vec![-0.5, 0.0, 0.5, 1.0]), GridSpec::new(128, 50.0).unwrap()).unwrap();
    let mut group = c.benchmark_group("sweep_8_points");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| run_sweep_with(&plan, &SweepOptions { exec, record_timing: false }).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, assembly, eigensolve, sweep);
criterion_main!(benches);

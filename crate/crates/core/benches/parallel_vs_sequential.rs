//! Sequential versus rayon execution of the three data-parallel hot spots:
//! feature selection over CV iterations, grid search and the repeated-CV sweep.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion as Bench};
use deltaomics::evaluation::{repeated_cv_sweep, EvaluationSettings};
use deltaomics::features::{FeatureMatrix, Scenario};
use deltaomics::par::Execution;
use deltaomics::pipeline::{generate_features, SyntheticSpec};
use deltaomics::regression::{grid_search, GridSpec, KernelKind};
use deltaomics::selection::{select_features, Criterion, FoldPlan, SelectionConfig};
use ndarray::ArrayView1;

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn cohort() -> (FeatureMatrix, Vec<f64>) {
    let spec = SyntheticSpec {
        n_features: 40,
        ..Default::default()
    };
    let c = generate_features(&spec, 42).unwrap();
    let parts: Vec<&FeatureMatrix> = Scenario::RdAll.blocks().iter().map(|b| &c.blocks[b]).collect();
    (FeatureMatrix::hconcat(&parts).unwrap(), c.labels)
}

fn selection(c: &mut Bench) {
    let (x, y) = cohort();
    let plan = FoldPlan::new(x.n_samples(), 5, 10, 1).unwrap();
    let mut g = c.benchmark_group("select_features");
    g.sample_size(10);
    for mode in MODES {
        let cfg = SelectionConfig {
            execution: mode,
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &cfg, |b, cfg| {
            b.iter(|| select_features(&x, &y, Criterion::XCnt, &plan, cfg).unwrap())
        });
    }
    g.finish();
}

fn grid(c: &mut Bench) {
    let (x, y) = cohort();
    let x = x.select_columns(&(0..10).collect::<Vec<_>>());
    let mut g = c.benchmark_group("grid_search_rbf");
    g.sample_size(10);
    for mode in MODES {
        g.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| {
                grid_search(x.values().view(), ArrayView1::from(&y[..]), KernelKind::Rbf, &GridSpec::default(), 3, mode)
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn sweep(c: &mut Bench) {
    let (x, y) = cohort();
    let plan = FoldPlan::new(x.n_samples(), 5, 2, 5).unwrap();
    let mut g = c.benchmark_group("repeated_cv_sweep");
    g.sample_size(10);
    for mode in MODES {
        let mut settings = EvaluationSettings {
            execution: mode,
            inner_selection_repeats: 2,
            ..Default::default()
        };
        settings.selection.execution = mode;
        g.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| repeated_cv_sweep(&x, &y, Criterion::XCnt, &[KernelKind::Rbf], &[3], &plan, &settings).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, selection, grid, sweep);
criterion_main!(benches);

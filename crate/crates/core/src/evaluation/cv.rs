use std::collections::HashMap;
use std::fmt;

use ndarray::{ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use super::metrics::{r_squared, rrmse, RrmseDenominator};
use crate::error::{Error, Result};
use crate::features::{ColumnName, FeatureMatrix, Scenario};
use crate::par::{self, Execution};
use crate::regression::{grid_search, svr_predict, svr_train, KernelGrids, KernelKind, SvrHyperparams};
use crate::rng::derive_seed;
use crate::selection::{select_features, Criterion, FoldPlan, FoldSplit, SelectionConfig};

pub const Z_95: f64 = 1.96;
pub const MAX_FEATURES: usize = 15;

const SELECT_STREAM: u64 = 0x5e1e;
const GRID_STREAM: u64 = 0x6f1d;

/// Normal-approximation 95% interval, `mean ± 1.96·sd/√N` with sample sd.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ConfidenceInterval {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let half = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            Z_95 * var.sqrt() / n.sqrt()
        };
        ConfidenceInterval {
            mean,
            lo: mean - half,
            hi: mean + half,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }
}

/// Formats as `0.743 (0.710-0.775)`.
impl fmt::Display for ConfidenceInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ({:.3}-{:.3})", self.mean, self.lo, self.hi)
    }
}

/// Metrics of one outer (repeat, fold) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub repeat: usize,
    pub fold: usize,
    pub r2: f64,
    pub rrmse: f64,
    pub n_test: usize,
    pub hyperparams: SvrHyperparams,
    pub features: Vec<ColumnName>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub sample_id: String,
    pub actual: f64,
    pub predicted: f64,
    pub repeat: usize,
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scenario: Option<Scenario>,
    pub criterion: Criterion,
    pub kernel: KernelKind,
    pub n_features: usize,
    pub n_folds: usize,
    pub n_repeats: usize,
    pub seed: u64,
    pub mean_r2: f64,
    pub mean_rrmse: f64,
    pub ci95_r2: [f64; 2],
    pub ci95_rrmse: [f64; 2],
    pub samples: Vec<MetricSample>,
    pub predictions: Vec<Prediction>,
}

impl EvaluationReport {
    pub fn r2_interval(&self) -> ConfidenceInterval {
        ConfidenceInterval {
            mean: self.mean_r2,
            lo: self.ci95_r2[0],
            hi: self.ci95_r2[1],
        }
    }

    pub fn rrmse_interval(&self) -> ConfidenceInterval {
        ConfidenceInterval {
            mean: self.mean_rrmse,
            lo: self.ci95_rrmse[0],
            hi: self.ci95_rrmse[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationSettings {
    pub selection: SelectionConfig,
    pub grids: KernelGrids,
    pub rrmse_denominator: RrmseDenominator,
    /// Folds and repeats of the selection plan nested in each outer training split.
    pub inner_selection_folds: usize,
    pub inner_selection_repeats: usize,
    pub execution: Execution,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        EvaluationSettings {
            selection: SelectionConfig::default(),
            grids: KernelGrids::default(),
            rrmse_denominator: RrmseDenominator::Sum,
            inner_selection_folds: 5,
            inner_selection_repeats: 10,
            execution: Execution::Parallel,
        }
    }
}

impl EvaluationSettings {
    pub fn validate(&self) -> Result<()> {
        self.selection.validate()?;
        self.grids.validate()?;
        if self.inner_selection_folds < 2 || self.inner_selection_repeats == 0 {
            return Err(Error::Config(
                "nested selection needs >= 2 folds and >= 1 repeat".into(),
            ));
        }
        Ok(())
    }
}

/// Repeated-CV estimate for a single kernel and feature count.
pub fn repeated_cv_evaluate(
    x: &FeatureMatrix,
    y: &[f64],
    criterion: Criterion,
    kernel: KernelKind,
    n_features: usize,
    plan: &FoldPlan,
    settings: &EvaluationSettings,
) -> Result<EvaluationReport> {
    let mut reports = repeated_cv_sweep(x, y, criterion, &[kernel], &[n_features], plan, settings)?;
    Ok(reports.remove(0))
}

struct CellOutcome {
    sample: MetricSample,
    predicted: Vec<f64>,
}

/// Repeated-CV estimates for every `kernels × n_features` combination.
///
/// Each outer cell ranks features on its training rows only, with a nested
/// plan seeded from the outer seed and cell; that ranking is shared by every
/// kernel and feature count. Reports are ordered kernel-major.
pub fn repeated_cv_sweep(
    x: &FeatureMatrix,
    y: &[f64],
    criterion: Criterion,
    kernels: &[KernelKind],
    n_features: &[usize],
    plan: &FoldPlan,
    settings: &EvaluationSettings,
) -> Result<Vec<EvaluationReport>> {
    settings.validate()?;
    if y.len() != x.n_samples() || plan.n_samples != x.n_samples() {
        return Err(Error::invalid(format!(
            "evaluation needs matching sizes: {} rows, {} labels, plan for {}",
            x.n_samples(),
            y.len(),
            plan.n_samples
        )));
    }
    if kernels.is_empty() || n_features.is_empty() {
        return Err(Error::invalid("nothing to evaluate: empty kernel or feature-count list"));
    }
    let max_n = *n_features.iter().max().unwrap_or(&0);
    if n_features.contains(&0) || max_n > settings.selection.top_n {
        return Err(Error::invalid(format!(
            "feature counts must lie in 1..={}, got {:?}",
            settings.selection.top_n, n_features
        )));
    }
    let splits = plan.splits();
    let cells = par::map(settings.execution, &splits, |split| {
        run_cell(x, y, criterion, kernels, n_features, plan.seed, split, settings)
            .map_err(|e| e.context(format!("outer repeat {} fold {}", split.repeat, split.fold)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::with_capacity(kernels.len() * n_features.len());
    for (ki, &kernel) in kernels.iter().enumerate() {
        for (ni, &n) in n_features.iter().enumerate() {
            let idx = ki * n_features.len() + ni;
            let mut samples = Vec::with_capacity(splits.len());
            let mut predictions = Vec::new();
            for (split, cell) in splits.iter().zip(&cells) {
                let out = &cell[idx];
                samples.push(out.sample.clone());
                for (&i, &p) in split.test.iter().zip(&out.predicted) {
                    predictions.push(Prediction {
                        sample_id: x.sample_ids()[i].clone(),
                        actual: y[i],
                        predicted: p,
                        repeat: split.repeat,
                        fold: split.fold,
                    });
                }
            }
            let r2: Vec<f64> = samples.iter().map(|s| s.r2).collect();
            let rr: Vec<f64> = samples.iter().map(|s| s.rrmse).collect();
            let (ci_r2, ci_rr) = (ConfidenceInterval::of(&r2), ConfidenceInterval::of(&rr));
            reports.push(EvaluationReport {
                scenario: None,
                criterion,
                kernel,
                n_features: n,
                n_folds: plan.n_folds,
                n_repeats: plan.n_repeats,
                seed: plan.seed,
                mean_r2: ci_r2.mean,
                mean_rrmse: ci_rr.mean,
                ci95_r2: [ci_r2.lo, ci_r2.hi],
                ci95_rrmse: [ci_rr.lo, ci_rr.hi],
                samples,
                predictions,
            });
        }
    }
    Ok(reports)
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    x: &FeatureMatrix,
    y: &[f64],
    criterion: Criterion,
    kernels: &[KernelKind],
    n_features: &[usize],
    seed: u64,
    split: &FoldSplit,
    settings: &EvaluationSettings,
) -> Result<Vec<CellOutcome>> {
    let cell = [split.repeat as u64, split.fold as u64];
    let x_train = x.select_rows(&split.train);
    let y_train: Vec<f64> = split.train.iter().map(|&i| y[i]).collect();
    let y_test: Vec<f64> = split.test.iter().map(|&i| y[i]).collect();
    let nested = FoldPlan::new(
        split.train.len(),
        settings.inner_selection_folds,
        settings.inner_selection_repeats,
        derive_seed(seed, &[SELECT_STREAM, cell[0], cell[1]]),
    )?;
    let selection = select_features(&x_train, &y_train, criterion, &nested, &settings.selection)?;
    let max_n = *n_features.iter().max().unwrap_or(&0);
    if selection.ranked.len() < max_n {
        return Err(Error::Numerical(format!(
            "selection ranked only {} features but {} were requested",
            selection.ranked.len(),
            max_n
        )));
    }
    let index: HashMap<&ColumnName, usize> = x.columns().iter().enumerate().map(|(j, c)| (c, j)).collect();
    let ranked: Vec<usize> = selection.ranked.iter().map(|r| index[&r.name]).collect();

    let mut out = Vec::with_capacity(kernels.len() * n_features.len());
    for &kernel in kernels {
        for &n in n_features {
            let cols = &ranked[..n];
            let xtr = x.values().select(Axis(0), &split.train).select(Axis(1), cols);
            let xte = x.values().select(Axis(0), &split.test).select(Axis(1), cols);
            let ytr = ArrayView1::from(&y_train[..]);
            let grid_seed = derive_seed(seed, &[GRID_STREAM, cell[0], cell[1], kernel as u64, n as u64]);
            let gs = grid_search(xtr.view(), ytr, kernel, settings.grids.get(kernel), grid_seed, settings.execution)?;
            let model = svr_train(xtr.view(), ytr, &gs.best)?;
            let predicted = svr_predict(&model, xte.view())?;
            let r2 = r_squared(&y_test, &predicted).map_err(|e| e.context(format!("{kernel} kernel, {n} features")))?;
            let rr = rrmse(&y_test, &predicted, settings.rrmse_denominator)
                .map_err(|e| e.context(format!("{kernel} kernel, {n} features")))?;
            out.push(CellOutcome {
                sample: MetricSample {
                    repeat: split.repeat,
                    fold: split.fold,
                    r2,
                    rrmse: rr,
                    n_test: split.test.len(),
                    hyperparams: gs.best,
                    features: cols.iter().map(|&j| x.columns()[j].clone()).collect(),
                },
                predicted,
            });
        }
    }
    Ok(out)
}

/// One line of a feature-count sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kernel: KernelKind,
    pub n_features: usize,
    pub mean_r2: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_rrmse: f64,
    pub rrmse_ci_lo: f64,
    pub rrmse_ci_hi: f64,
}

impl From<&EvaluationReport> for SweepRow {
    fn from(r: &EvaluationReport) -> Self {
        SweepRow {
            kernel: r.kernel,
            n_features: r.n_features,
            mean_r2: r.mean_r2,
            ci_lo: r.ci95_r2[0],
            ci_hi: r.ci95_r2[1],
            mean_rrmse: r.mean_rrmse,
            rrmse_ci_lo: r.ci95_rrmse[0],
            rrmse_ci_hi: r.ci95_rrmse[1],
        }
    }
}

impl SweepRow {
    pub fn r2_interval(&self) -> ConfidenceInterval {
        ConfidenceInterval {
            mean: self.mean_r2,
            lo: self.ci_lo,
            hi: self.ci_hi,
        }
    }

    pub fn rrmse_interval(&self) -> ConfidenceInterval {
        ConfidenceInterval {
            mean: self.mean_rrmse,
            lo: self.rrmse_ci_lo,
            hi: self.rrmse_ci_hi,
        }
    }
}

/// Per-kernel sweep rows with the highest mean R² and the lowest mean RRMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestOf {
    pub kernel: KernelKind,
    pub best_r2: SweepRow,
    pub best_rrmse: SweepRow,
}

/// Earliest row wins ties.
pub fn best_of(rows: &[SweepRow]) -> Vec<BestOf> {
    let mut kernels: Vec<KernelKind> = rows.iter().map(|r| r.kernel).collect();
    kernels.dedup();
    kernels
        .into_iter()
        .filter_map(|kernel| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.kernel == kernel).collect();
            let best_r2 = mine.iter().copied().reduce(|a, b| if b.mean_r2 > a.mean_r2 { b } else { a })?;
            let best_rrmse = mine
                .iter()
                .copied()
                .reduce(|a, b| if b.mean_rrmse < a.mean_rrmse { b } else { a })?;
            Some(BestOf {
                kernel,
                best_r2: best_r2.clone(),
                best_rrmse: best_rrmse.clone(),
            })
        })
        .collect()
}

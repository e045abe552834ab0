//! Variance filter, correlation pruning and Lasso ranking under repeated CV.

mod filters;
mod folds;
mod lasso;

pub use filters::{correlation_prune, normalized_variance, variance_filter, PruneOutcome};
pub(crate) use filters::pearson;
pub use folds::{FoldPlan, FoldSplit};
pub use lasso::{k_nonzero, lasso_fit, lasso_k_nonzero, LassoFit, LassoProblem, SupportOutcome};

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ColumnName, FeatureMatrix};
use crate::par::{self, Execution};

/// Feature-ranking criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    /// Mean absolute Lasso coefficient over all iterations.
    #[serde(rename = "X_abs")]
    XAbs,
    /// Number of iterations in which the feature was retained.
    #[serde(rename = "X_cnt")]
    XCnt,
}

impl Criterion {
    pub const ALL: [Criterion; 2] = [Criterion::XAbs, Criterion::XCnt];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::XAbs => "X_abs",
            Criterion::XCnt => "X_cnt",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "xabs" | "abs" => Ok(Criterion::XAbs),
            "xcnt" | "cnt" => Ok(Criterion::XCnt),
            _ => Err(Error::invalid(format!("unknown criterion '{s}' (use X_abs or X_cnt)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub variance_threshold: f64,
    pub correlation_threshold: f64,
    /// Nonzero coefficients targeted by the λ search in each iteration.
    pub k_nonzero: usize,
    /// Features kept per iteration and in the final ranking.
    pub top_n: usize,
    pub execution: Execution,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            variance_threshold: 0.001,
            correlation_threshold: 0.95,
            k_nonzero: 20,
            top_n: 15,
            execution: Execution::Parallel,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance_threshold >= 0.0) {
            return Err(Error::Config("variance_threshold must be >= 0".into()));
        }
        if !(self.correlation_threshold > 0.0 && self.correlation_threshold <= 1.0) {
            return Err(Error::Config("correlation_threshold must be in (0, 1]".into()));
        }
        if self.top_n == 0 || self.k_nonzero < self.top_n {
            return Err(Error::Config(format!(
                "need 0 < top_n <= k_nonzero, got top_n={} k_nonzero={}",
                self.top_n, self.k_nonzero
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub name: ColumnName,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetainedFeature {
    pub name: ColumnName,
    pub abs_coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub repeat: usize,
    pub fold: usize,
    pub lambda: f64,
    pub outcome: SupportOutcome,
    pub retained: Vec<RetainedFeature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub criterion: Criterion,
    pub ranked: Vec<RankedFeature>,
    pub iterations: Vec<IterationRecord>,
}

impl SelectionResult {
    /// Number of iterations in which `name` was retained.
    pub fn retention_count(&self, name: &ColumnName) -> usize {
        self.iterations
            .iter()
            .filter(|it| it.retained.iter().any(|r| &r.name == name))
            .count()
    }

    /// Names of the top `n` ranked features.
    pub fn top(&self, n: usize) -> Vec<ColumnName> {
        self.ranked.iter().take(n).map(|r| r.name.clone()).collect()
    }
}

/// Standardizes `rows` of `x` (population sd; constant columns become 0) and centers `y`.
pub fn standardize_rows(x: ArrayView2<f64>, y: ArrayView1<f64>, rows: &[usize]) -> (Array2<f64>, Array1<f64>) {
    let n = rows.len();
    let p = x.ncols();
    let mut xs = Array2::zeros((n, p));
    for j in 0..p {
        let col = x.column(j);
        let mean = rows.iter().map(|&i| col[i]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|&i| (col[i] - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if sd > 0.0 {
            for (r, &i) in rows.iter().enumerate() {
                xs[[r, j]] = (col[i] - mean) / sd;
            }
        }
    }
    let ym = rows.iter().map(|&i| y[i]).sum::<f64>() / n as f64;
    let ys = Array1::from_iter(rows.iter().map(|&i| y[i] - ym));
    (xs, ys)
}

/// Variance filter followed by correlation pruning; returns retained column indices.
pub fn prefilter(x: &FeatureMatrix, cfg: &SelectionConfig) -> PruneOutcome {
    let kept = variance_filter(x.values().view(), cfg.variance_threshold);
    let sub = x.values().select(ndarray::Axis(1), &kept);
    let pruned = correlation_prune(sub.view(), cfg.correlation_threshold);
    PruneOutcome {
        retained: pruned.retained.iter().map(|&j| kept[j]).collect(),
        zero_variance: pruned.zero_variance.iter().map(|&j| kept[j]).collect(),
    }
}

/// Per-iteration Lasso support: `(column, |coef|)` of the `top_n` largest coefficients.
fn iteration_support(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    split: &FoldSplit,
    cfg: &SelectionConfig,
) -> Result<(LassoFit, Vec<(usize, f64)>)> {
    let (xs, ys) = standardize_rows(x, y, &split.train);
    let fit = lasso_k_nonzero(xs.view(), ys.view(), cfg.k_nonzero)?;
    let mut support: Vec<(usize, f64)> = fit
        .support()
        .into_iter()
        .map(|j| (j, fit.coefficients[j].abs()))
        .collect();
    support.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    support.truncate(cfg.top_n);
    Ok((fit, support))
}

/// Ranks features by X-abs or X-cnt over every (repeat, fold) of `plan`.
///
/// Each iteration standardizes its training rows, tunes λ to `k_nonzero`
/// nonzeros and keeps the `top_n` largest |coef|. X-abs scores are summed
/// |coef| divided by the number of iterations; X-cnt scores count
/// retentions, ties broken by X-abs and then column order.
pub fn select_features(
    x: &FeatureMatrix,
    y: &[f64],
    criterion: Criterion,
    plan: &FoldPlan,
    cfg: &SelectionConfig,
) -> Result<SelectionResult> {
    cfg.validate()?;
    if y.len() != x.n_samples() || plan.n_samples != x.n_samples() {
        return Err(Error::invalid(format!(
            "selection needs matching sizes: {} rows, {} labels, plan for {}",
            x.n_samples(),
            y.len(),
            plan.n_samples
        )));
    }
    if x.n_features() < cfg.k_nonzero {
        return Err(Error::invalid(format!(
            "only {} features survive filtering but the Lasso step needs {} (short by {})",
            x.n_features(),
            cfg.k_nonzero,
            cfg.k_nonzero - x.n_features()
        )));
    }
    let xv = x.values().view();
    let yv = ArrayView1::from(y);
    let splits = plan.splits();
    let per_iter = par::map(cfg.execution, &splits, |s| {
        iteration_support(xv, yv, s, cfg)
            .map_err(|e| e.context(format!("selection repeat {} fold {}", s.repeat, s.fold)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let p = x.n_features();
    let mut abs_sum = vec![0.0; p];
    let mut count = vec![0usize; p];
    let mut iterations = Vec::with_capacity(splits.len());
    for (split, (fit, support)) in splits.iter().zip(&per_iter) {
        for &(j, a) in support {
            abs_sum[j] += a;
            count[j] += 1;
        }
        iterations.push(IterationRecord {
            repeat: split.repeat,
            fold: split.fold,
            lambda: fit.lambda,
            outcome: fit.outcome,
            retained: support
                .iter()
                .map(|&(j, a)| RetainedFeature {
                    name: x.columns()[j].clone(),
                    abs_coef: a,
                })
                .collect(),
        });
    }
    let n_iter = splits.len() as f64;
    let mut candidates: Vec<usize> = (0..p).filter(|&j| count[j] > 0).collect();
    candidates.sort_by(|&a, &b| match criterion {
        Criterion::XAbs => abs_sum[b].total_cmp(&abs_sum[a]).then(a.cmp(&b)),
        Criterion::XCnt => count[b]
            .cmp(&count[a])
            .then(abs_sum[b].total_cmp(&abs_sum[a]))
            .then(a.cmp(&b)),
    });
    candidates.truncate(cfg.top_n);
    let ranked = candidates
        .into_iter()
        .map(|j| RankedFeature {
            name: x.columns()[j].clone(),
            score: match criterion {
                Criterion::XAbs => abs_sum[j] / n_iter,
                Criterion::XCnt => count[j] as f64,
            },
        })
        .collect();
    Ok(SelectionResult {
        criterion,
        ranked,
        iterations,
    })
}

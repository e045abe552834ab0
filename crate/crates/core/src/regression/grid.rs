use std::fmt;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::kernel::{KernelKind, KernelSpec};
use super::scaler::StandardScaler;
use super::svr::{gram, solve_dual, SvrHyperparams, SMO_TOLERANCE};
use crate::error::{Error, Result};
use crate::evaluation::r_squared;
use crate::par::{self, Execution};
use crate::selection::FoldPlan;

pub const INNER_FOLDS: usize = 5;

/// A γ candidate: a fixed value or `1/d` with `d` the feature count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaChoice {
    Value(f64),
    InverseDim,
}

impl GammaChoice {
    pub fn resolve(self, n_features: usize) -> f64 {
        match self {
            GammaChoice::Value(g) => g,
            GammaChoice::InverseDim => 1.0 / n_features.max(1) as f64,
        }
    }
}

impl fmt::Display for GammaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaChoice::Value(g) => write!(f, "{g}"),
            GammaChoice::InverseDim => f.write_str("1/d"),
        }
    }
}

impl Serialize for GammaChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GammaChoice::Value(g) => s.serialize_f64(*g),
            GammaChoice::InverseDim => s.serialize_str("1/d"),
        }
    }
}

impl<'de> Deserialize<'de> for GammaChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(g) => Ok(GammaChoice::Value(g)),
            Raw::Text(t) if t.trim() == "1/d" => Ok(GammaChoice::InverseDim),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "gamma must be a number or \"1/d\", got \"{t}\""
            ))),
        }
    }
}

/// Candidate values per hyperparameter; a kernel only uses the lists it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub gamma: Vec<GammaChoice>,
    pub degree: Vec<u32>,
    pub coef0: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            c: vec![0.1, 1.0, 10.0, 100.0],
            epsilon: vec![0.001, 0.01, 0.1],
            gamma: vec![
                GammaChoice::Value(0.01),
                GammaChoice::Value(0.1),
                GammaChoice::InverseDim,
                GammaChoice::Value(1.0),
            ],
            degree: vec![2, 3],
            coef0: vec![0.0, 1.0],
        }
    }
}

impl GridSpec {
    /// Enumerates hyperparameters in grid order (C, ε, γ, degree, coef0; last varies fastest).
    pub fn candidates(&self, kind: KernelKind, n_features: usize) -> Result<Vec<SvrHyperparams>> {
        let need = |name: &str, empty: bool| {
            if empty {
                Err(Error::Config(format!("{kind} grid has no {name} values")))
            } else {
                Ok(())
            }
        };
        need("C", self.c.is_empty())?;
        need("epsilon", self.epsilon.is_empty())?;
        let uses_gamma = kind != KernelKind::Linear;
        let uses_degree = kind == KernelKind::Polynomial;
        let uses_coef0 = matches!(kind, KernelKind::Polynomial | KernelKind::Sigmoid);
        need("gamma", uses_gamma && self.gamma.is_empty())?;
        need("degree", uses_degree && self.degree.is_empty())?;
        need("coef0", uses_coef0 && self.coef0.is_empty())?;

        let gammas: Vec<f64> = if uses_gamma {
            self.gamma.iter().map(|g| g.resolve(n_features)).collect()
        } else {
            vec![0.0]
        };
        let degrees: &[u32] = if uses_degree { &self.degree } else { &[0] };
        let coef0s: &[f64] = if uses_coef0 { &self.coef0 } else { &[0.0] };
        let mut out = Vec::new();
        for &c in &self.c {
            for &epsilon in &self.epsilon {
                for &gamma in &gammas {
                    for &degree in degrees {
                        for &coef0 in coef0s {
                            let kernel = match kind {
                                KernelKind::Linear => KernelSpec::Linear,
                                KernelKind::Rbf => KernelSpec::Rbf { gamma },
                                KernelKind::Polynomial => KernelSpec::Polynomial { gamma, degree, coef0 },
                                KernelKind::Sigmoid => KernelSpec::Sigmoid { gamma, coef0 },
                            };
                            let hp = SvrHyperparams { c, epsilon, kernel };
                            hp.validate().map_err(|e| Error::Config(format!("{kind} grid: {e}")))?;
                            out.push(hp);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One grid per kernel kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelGrids {
    pub linear: GridSpec,
    pub rbf: GridSpec,
    pub polynomial: GridSpec,
    pub sigmoid: GridSpec,
}

impl KernelGrids {
    pub fn get(&self, kind: KernelKind) -> &GridSpec {
        match kind {
            KernelKind::Linear => &self.linear,
            KernelKind::Rbf => &self.rbf,
            KernelKind::Polynomial => &self.polynomial,
            KernelKind::Sigmoid => &self.sigmoid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in KernelKind::ALL {
            self.get(kind).candidates(kind, 1)?;
        }
        Ok(())
    }
}

/// Grid search outcome: winner plus the score of every candidate in grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: SvrHyperparams,
    pub best_score: f64,
    pub scores: Vec<f64>,
}

/// Picks the best hyperparameters for `kind` by inner k-fold mean R².
///
/// Candidates that fail to train or score score −∞. Exact ties go to the
/// smaller C, then the smaller γ, then the earlier grid position.
pub fn grid_search(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    kind: KernelKind,
    grid: &GridSpec,
    seed: u64,
    execution: Execution,
) -> Result<GridSearchResult> {
    let candidates = grid.candidates(kind, x.ncols())?;
    if x.nrows() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if candidates.len() == 1 {
        return Ok(GridSearchResult {
            best: candidates[0],
            best_score: f64::NAN,
            scores: vec![f64::NAN],
        });
    }
    let plan = FoldPlan::new(x.nrows(), INNER_FOLDS, 1, seed)?;
    let splits = plan.splits();

    // Distinct kernels share one Gram matrix per fold across their (C, ε) points.
    let mut kernels: Vec<KernelSpec> = Vec::new();
    let mut kernel_of = Vec::with_capacity(candidates.len());
    for hp in &candidates {
        let pos = kernels.iter().position(|k| *k == hp.kernel).unwrap_or_else(|| {
            kernels.push(hp.kernel);
            kernels.len() - 1
        });
        kernel_of.push(pos);
    }
    let jobs: Vec<(usize, usize)> = (0..splits.len())
        .flat_map(|f| (0..kernels.len()).map(move |k| (f, k)))
        .collect();
    let per_job = par::map(execution, &jobs, |&(f, ki)| {
        let split = &splits[f];
        let members: Vec<usize> = (0..candidates.len()).filter(|&c| kernel_of[c] == ki).collect();
        let scores = fold_scores(x, y, &split.train, &split.test, kernels[ki], &members, &candidates);
        (members, scores)
    });

    let mut sums = vec![0.0; candidates.len()];
    for (members, scores) in per_job {
        for (c, s) in members.into_iter().zip(scores) {
            sums[c] += s;
        }
    }
    let scores: Vec<f64> = sums.iter().map(|s| s / splits.len() as f64).collect();
    let gamma_key = |hp: &SvrHyperparams| hp.kernel.gamma().unwrap_or(0.0);
    let mut best = 0;
    for i in 1..candidates.len() {
        let (a, b) = (scores[i], scores[best]);
        let better = a > b
            || (a == b
                && (candidates[i].c, gamma_key(&candidates[i]))
                    < (candidates[best].c, gamma_key(&candidates[best])));
        if better {
            best = i;
        }
    }
    Ok(GridSearchResult {
        best: candidates[best],
        best_score: scores[best],
        scores,
    })
}

/// R² on `test` for each candidate in `members`, all sharing `kernel`.
fn fold_scores(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    train: &[usize],
    test: &[usize],
    kernel: KernelSpec,
    members: &[usize],
    candidates: &[SvrHyperparams],
) -> Vec<f64> {
    let xtr = x.select(Axis(0), train);
    let xte = x.select(Axis(0), test);
    let ytr = y.select(Axis(0), train);
    let yte: Vec<f64> = test.iter().map(|&i| y[i]).collect();
    let Ok(scaler) = StandardScaler::fit(xtr.view()) else {
        return vec![f64::NEG_INFINITY; members.len()];
    };
    let (Ok(str_), Ok(ste)) = (scaler.transform(xtr.view()), scaler.transform(xte.view())) else {
        return vec![f64::NEG_INFINITY; members.len()];
    };
    let k_train = gram(&str_, &kernel);
    let k_test = cross_gram(&ste, &str_, &kernel);
    let n_tr = train.len();
    members
        .iter()
        .map(|&c| {
            let hp = &candidates[c];
            let sol = solve_dual(&k_train, ytr.view(), hp.c, hp.epsilon, SMO_TOLERANCE);
            let coefs = sol.coefficients();
            let pred: Vec<f64> = (0..test.len())
                .map(|t| {
                    k_test[t * n_tr..(t + 1) * n_tr]
                        .iter()
                        .zip(&coefs)
                        .filter(|(_, &a)| a != 0.0)
                        .map(|(k, a)| k * a)
                        .sum::<f64>()
                        + sol.bias
                })
                .collect();
            match r_squared(&yte, &pred) {
                Ok(r) if r.is_finite() => r,
                _ => f64::NEG_INFINITY,
            }
        })
        .collect()
}

fn cross_gram(a: &Array2<f64>, b: &Array2<f64>, kernel: &KernelSpec) -> Vec<f64> {
    let rows_b: Vec<Vec<f64>> = b.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut out = Vec::with_capacity(a.nrows() * b.nrows());
    for ra in a.rows() {
        let ra = ra.to_vec();
        out.extend(rows_b.iter().map(|rb| kernel.eval_unchecked(&ra, rb)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};

    fn fixture() -> (Array2<f64>, Array1<f64>) {
        let x = Array2::from_shape_fn((20, 1), |(i, _)| i as f64 / 19.0);
        let y = x.column(0).mapv(|v| 2.0 * v);
        (x, y)
    }

    #[test]
    fn default_grid_sizes() {
        let g = GridSpec::default();
        assert_eq!(g.candidates(KernelKind::Linear, 5).unwrap().len(), 12);
        assert_eq!(g.candidates(KernelKind::Rbf, 5).unwrap().len(), 48);
        assert_eq!(g.candidates(KernelKind::Polynomial, 5).unwrap().len(), 192);
        assert_eq!(g.candidates(KernelKind::Sigmoid, 5).unwrap().len(), 96);
        let rbf = g.candidates(KernelKind::Rbf, 4).unwrap();
        assert_eq!(rbf[2].kernel, KernelSpec::Rbf { gamma: 0.25 });
        let json = serde_json::to_string(&g).unwrap();
        assert!(json.contains(r#""gamma":[0.01,0.1,"1/d",1.0]"#));
        assert_eq!(serde_json::from_str::<GridSpec>(&json).unwrap(), g);
    }

    #[test]
    fn empty_lists_are_config_errors() {
        let g = GridSpec { gamma: vec![], ..GridSpec::default() };
        assert!(g.candidates(KernelKind::Linear, 3).is_ok());
        assert!(matches!(g.candidates(KernelKind::Rbf, 3), Err(Error::Config(_))));
    }

    #[test]
    fn single_point_and_tighter_c() {
        let (x, y) = fixture();
        let one = GridSpec { c: vec![3.0], epsilon: vec![0.05], ..GridSpec::default() };
        let r = grid_search(x.view(), y.view(), KernelKind::Linear, &one, 1, Execution::Parallel).unwrap();
        assert_eq!(r.best.c, 3.0);

        let two = GridSpec { c: vec![0.01, 100.0], epsilon: vec![0.01], ..GridSpec::default() };
        let r = grid_search(x.view(), y.view(), KernelKind::Linear, &two, 1, Execution::Parallel).unwrap();
        assert_eq!(r.best.c, 100.0);
        assert!(r.scores[1] > r.scores[0]);
    }

    #[test]
    fn exact_ties_prefer_small_c_then_gamma() {
        let x = Array2::from_shape_fn((10, 2), |(i, j)| (i + j) as f64);
        let y = Array1::from_elem(10, 1.0);
        let g = GridSpec {
            c: vec![10.0, 1.0],
            epsilon: vec![0.1],
            gamma: vec![GammaChoice::Value(1.0), GammaChoice::Value(0.1)],
            ..GridSpec::default()
        };
        let r = grid_search(x.view(), y.view(), KernelKind::Rbf, &g, 3, Execution::Sequential).unwrap();
        assert!(r.scores.iter().all(|s| *s == f64::NEG_INFINITY));
        assert_eq!(r.best.c, 1.0);
        assert_eq!(r.best.kernel.gamma(), Some(0.1));
    }

    #[test]
    fn deterministic_and_execution_independent() {
        let x = Array2::from_shape_fn((25, 3), |(i, j)| ((i * (j + 3)) % 13) as f64);
        let y = Array1::from_shape_fn(25, |i| (i as f64 * 0.3).cos());
        let g = GridSpec::default();
        let a = grid_search(x.view(), y.view(), KernelKind::Rbf, &g, 9, Execution::Parallel).unwrap();
        let b = grid_search(x.view(), y.view(), KernelKind::Rbf, &g, 9, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }
}

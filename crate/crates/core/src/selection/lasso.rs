//! L1-penalized least squares by cyclic coordinate descent.
//!
//! Minimizes `(1/2n)·‖y − Xβ‖² + λ‖β‖₁`. Inputs are expected to be
//! column-standardized with a centered response; the reported intercept
//! absorbs any residual offset.

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CD_TOLERANCE: f64 = 1e-7;
pub const MAX_SWEEPS: usize = 10_000;
const BISECTION_STEPS: usize = 60;
const BISECTION_REL_WIDTH: f64 = 1e-6;
const PATH_RATIO: f64 = 0.8;
const PATH_FLOOR: f64 = 1e-5;

/// How `lasso_k_nonzero` arrived at its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportOutcome {
    /// A λ with exactly k nonzeros was found.
    Exact,
    /// The count jumped past k; the k largest coefficients were kept.
    Truncated,
    /// Even the smallest λ tried produced fewer than k nonzeros.
    Short,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub n_nonzero: usize,
    pub sweeps: usize,
    pub outcome: SupportOutcome,
}

impl LassoFit {
    /// Indices of nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| (b != 0.0).then_some(j))
            .collect()
    }
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Column-major copy of a design with cached column norms.
pub struct LassoProblem {
    n: usize,
    p: usize,
    cols: Vec<f64>,
    col_sq: Vec<f64>,
    y: Vec<f64>,
    x_means: Vec<f64>,
    y_mean: f64,
}

impl LassoProblem {
    pub fn new(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || y.len() != n {
            return Err(Error::invalid(format!(
                "lasso needs {n} > 0 rows and a matching response, got {}",
                y.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("lasso inputs must be finite"));
        }
        let mut cols = Vec::with_capacity(n * p);
        for j in 0..p {
            cols.extend(x.column(j).iter());
        }
        let col_sq = (0..p)
            .map(|j| cols[j * n..(j + 1) * n].iter().map(|v| v * v).sum::<f64>() / n as f64)
            .collect();
        let x_means = (0..p)
            .map(|j| cols[j * n..(j + 1) * n].iter().sum::<f64>() / n as f64)
            .collect();
        Ok(LassoProblem {
            n,
            p,
            cols,
            col_sq,
            y: y.to_vec(),
            x_means,
            y_mean: y.sum() / n as f64,
        })
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    pub fn n_features(&self) -> usize {
        self.p
    }

    /// `max_j |x_jᵀ y| / n`: the smallest λ giving an all-zero solution.
    pub fn lambda_max(&self) -> f64 {
        (0..self.p)
            .map(|j| dot(self.col(j), &self.y).abs() / self.n as f64)
            .fold(0.0, f64::max)
    }

    pub fn objective(&self, beta: &[f64], lambda: f64) -> f64 {
        let r = self.residual(beta);
        let rss: f64 = r.iter().map(|v| v * v).sum();
        rss / (2.0 * self.n as f64) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let mut r = self.y.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (ri, xi) in r.iter_mut().zip(self.col(j)) {
                    *ri -= b * xi;
                }
            }
        }
        r
    }

    /// Largest subgradient-optimality violation of `beta` at `lambda`.
    pub fn kkt_violation(&self, beta: &[f64], lambda: f64) -> f64 {
        let r = self.residual(beta);
        (0..self.p)
            .map(|j| {
                let g = dot(self.col(j), &r) / self.n as f64;
                if beta[j] == 0.0 {
                    (g.abs() - lambda).max(0.0)
                } else {
                    (g - lambda * beta[j].signum()).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Coordinate descent from `warm` (or zero); `trace` receives the
    /// objective after every sweep.
    pub fn fit(&self, lambda: f64, warm: Option<&[f64]>, mut trace: Option<&mut Vec<f64>>) -> Result<LassoFit> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        let n = self.n as f64;
        let mut beta = warm.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; self.p]);
        let mut r = self.residual(&beta);
        let mut sweeps = 0;

        let sweep = |beta: &mut [f64], r: &mut [f64], only_active: bool| -> f64 {
            let mut max_change = 0.0f64;
            for j in 0..self.p {
                if only_active && beta[j] == 0.0 {
                    continue;
                }
                let cs = self.col_sq[j];
                if cs == 0.0 {
                    continue;
                }
                let xj = self.col(j);
                let old = beta[j];
                let rho = dot(xj, r) / n + cs * old;
                let new = soft_threshold(rho, lambda) / cs;
                if new != old {
                    let d = new - old;
                    for (ri, xi) in r.iter_mut().zip(xj) {
                        *ri -= d * xi;
                    }
                    beta[j] = new;
                    max_change = max_change.max(d.abs());
                }
            }
            max_change
        };

        while sweeps < MAX_SWEEPS {
            let change = sweep(&mut beta, &mut r, false);
            sweeps += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.objective(&beta, lambda));
            }
            if change < CD_TOLERANCE {
                break;
            }
            // iterate on the current support until it settles, then re-check all
            while sweeps < MAX_SWEEPS {
                let change = sweep(&mut beta, &mut r, true);
                sweeps += 1;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(self.objective(&beta, lambda));
                }
                if change < CD_TOLERANCE {
                    break;
                }
            }
        }
        let intercept = self.y_mean - dot(&self.x_means, &beta);
        let n_nonzero = beta.iter().filter(|b| **b != 0.0).count();
        Ok(LassoFit {
            coefficients: beta,
            intercept,
            lambda,
            n_nonzero,
            sweeps,
            outcome: SupportOutcome::Exact,
        })
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn lasso_fit(x: ArrayView2<f64>, y: ArrayView1<f64>, lambda: f64) -> Result<LassoFit> {
    LassoProblem::new(x, y)?.fit(lambda, None, None)
}

/// Tunes λ by bisection until exactly `k` coefficients are nonzero.
///
/// A geometric path from `λ_max` brackets the target first; the bracket is
/// then bisected in log space. When no λ yields exactly `k`, the smallest
/// bracketing λ with more than `k` nonzeros is used and only its `k`
/// largest-magnitude coefficients are kept.
pub fn lasso_k_nonzero(x: ArrayView2<f64>, y: ArrayView1<f64>, k: usize) -> Result<LassoFit> {
    let problem = LassoProblem::new(x, y)?;
    k_nonzero(&problem, k)
}

pub fn k_nonzero(problem: &LassoProblem, k: usize) -> Result<LassoFit> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if k > problem.p {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {} available columns",
            problem.p
        )));
    }
    let lmax = problem.lambda_max();
    if lmax == 0.0 {
        let mut fit = problem.fit(0.0, None, None)?;
        fit.outcome = SupportOutcome::Short;
        return Ok(fit);
    }

    // walk down the path until at least k coefficients are active
    let mut hi = problem.fit(lmax, None, None)?;
    let mut lo: Option<LassoFit> = None;
    let mut lambda = lmax;
    while lambda > lmax * PATH_FLOOR {
        lambda *= PATH_RATIO;
        let fit = problem.fit(lambda, Some(&hi.coefficients), None)?;
        if fit.n_nonzero == k {
            return Ok(fit);
        }
        if fit.n_nonzero > k {
            lo = Some(fit);
            break;
        }
        hi = fit;
    }
    let Some(mut lo) = lo else {
        hi.outcome = SupportOutcome::Short;
        return Ok(hi);
    };

    for _ in 0..BISECTION_STEPS {
        if (hi.lambda - lo.lambda) / hi.lambda < BISECTION_REL_WIDTH {
            break;
        }
        let mid = (hi.lambda * lo.lambda).sqrt();
        let fit = problem.fit(mid, Some(&hi.coefficients), None)?;
        match fit.n_nonzero.cmp(&k) {
            std::cmp::Ordering::Equal => return Ok(fit),
            std::cmp::Ordering::Greater => lo = fit,
            std::cmp::Ordering::Less => hi = fit,
        }
    }

    let mut order: Vec<usize> = lo.support();
    order.sort_by(|&a, &b| {
        lo.coefficients[b]
            .abs()
            .total_cmp(&lo.coefficients[a].abs())
            .then(a.cmp(&b))
    });
    for &j in &order[k..] {
        lo.coefficients[j] = 0.0;
    }
    lo.n_nonzero = k;
    lo.intercept = problem.y_mean - dot(&problem.x_means, &lo.coefficients);
    lo.outcome = SupportOutcome::Truncated;
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn standardized(n: usize, p: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
        let mut r = crate::rng::rng(seed);
        let mut x = Array2::from_shape_fn((n, p), |_| r.sample::<f64, _>(StandardNormal));
        for mut c in x.columns_mut() {
            let m = c.mean().unwrap();
            c.mapv_inplace(|v| v - m);
            let sd = (c.mapv(|v| v * v).sum() / n as f64).sqrt();
            c.mapv_inplace(|v| v / sd);
        }
        let mut y = Array1::from_shape_fn(n, |i| 2.0 * x[[i, 0]] - x[[i, 1]] + 0.5 * r.sample::<f64, _>(StandardNormal));
        let m = y.mean().unwrap();
        y.mapv_inplace(|v| v - m);
        (x, y)
    }

    #[test]
    fn lambda_max_kills_everything() {
        let (x, y) = standardized(30, 8, 1);
        let p = LassoProblem::new(x.view(), y.view()).unwrap();
        let fit = p.fit(p.lambda_max(), None, None).unwrap();
        assert_eq!(fit.n_nonzero, 0);
        let fit = p.fit(p.lambda_max() * 0.99, None, None).unwrap();
        assert_eq!(fit.n_nonzero, 1);
    }

    #[test]
    fn orthonormal_design_least_squares() {
        // columns orthogonal with x_jᵀx_j / n = 1
        let x = array![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];
        let y = array![3.0, 1.0, -1.0, -3.0];
        let fit = lasso_fit(x.view(), y.view(), 0.0).unwrap();
        let expect = x.t().dot(&y) / 4.0;
        assert!((fit.coefficients[0] - expect[0]).abs() < 1e-12);
        assert!((fit.coefficients[1] - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn univariate_soft_threshold() {
        let x = array![[1.0], [-1.0], [1.0], [-1.0]];
        let y = array![2.0, -1.0, 0.5, -1.5];
        let b = x.column(0).dot(&y) / 4.0;
        let lambda = 0.3;
        let fit = lasso_fit(x.view(), y.view(), lambda).unwrap();
        assert!((fit.coefficients[0] - b.signum() * (b.abs() - lambda)).abs() < 1e-12);
    }

    #[test]
    fn objective_monotone_and_kkt() {
        let (x, y) = standardized(25, 12, 7);
        let p = LassoProblem::new(x.view(), y.view()).unwrap();
        for frac in [0.5, 0.1, 0.01] {
            let lambda = p.lambda_max() * frac;
            let mut trace = Vec::new();
            let fit = p.fit(lambda, None, Some(&mut trace)).unwrap();
            let start = p.objective(&[0.0; 12], lambda);
            assert!(trace[0] <= start + 1e-15);
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-13, "{} > {}", w[1], w[0]);
            }
            assert!(p.kkt_violation(&fit.coefficients, lambda) < 1e-5);
        }
    }

    #[test]
    fn k_nonzero_exact_and_errors() {
        let (x, y) = standardized(40, 30, 11);
        for k in [1, 5, 12] {
            let fit = lasso_k_nonzero(x.view(), y.view(), k).unwrap();
            assert_eq!(fit.n_nonzero, k);
            assert_eq!(fit.support().len(), k);
        }
        assert!(lasso_k_nonzero(x.view(), y.view(), 0).is_err());
        assert!(lasso_k_nonzero(x.view(), y.view(), 31).is_err());
    }

    #[test]
    fn k_equals_p_on_tall_design() {
        let (x, y) = standardized(60, 6, 5);
        let fit = lasso_k_nonzero(x.view(), y.view(), 6).unwrap();
        assert_eq!(fit.n_nonzero, 6);
        assert!(fit.lambda < 0.2 * LassoProblem::new(x.view(), y.view()).unwrap().lambda_max());
    }

    #[test]
    fn planted_predictor_survives_k1() {
        let (mut x, _) = standardized(32, 6, 9);
        let y = x.column(3).to_owned();
        // make the others orthogonal to y
        for j in [0, 1, 2, 4, 5] {
            let proj = x.column(j).dot(&y) / y.dot(&y);
            let col = &x.column(j) - &(&y * proj);
            x.column_mut(j).assign(&col);
        }
        let fit = lasso_k_nonzero(x.view(), y.view(), 1).unwrap();
        assert_eq!(fit.support(), vec![3]);
    }

    #[test]
    fn non_finite_rejected() {
        let x = array![[1.0], [f64::NAN]];
        assert!(lasso_fit(x.view(), array![1.0, 2.0].view(), 0.1).is_err());
    }
}

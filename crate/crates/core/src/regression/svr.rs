use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::scaler::StandardScaler;
use crate::error::{Error, Result};

/// Stopping threshold on the maximal KKT violation.
pub const SMO_TOLERANCE: f64 = 1e-3;
pub const SMO_MAX_ITER: usize = 100_000;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyperparams {
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelSpec,
}

impl SvrHyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invalid(format!("C must be positive, got {}", self.c)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::invalid(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        self.kernel.validate()
    }
}

/// Trained ε-SVR. Support vectors are stored in scaled feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub hyperparams: SvrHyperparams,
    pub scaler: StandardScaler,
    pub support_vectors: Vec<Vec<f64>>,
    /// α − α* per support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
}

/// Solver diagnostics from a training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub converged: bool,
    /// Final maximal KKT violation `m − M`.
    pub violation: f64,
    pub dual_objective: f64,
    pub primal_objective: f64,
}

impl SolverReport {
    pub fn duality_gap(&self) -> f64 {
        self.primal_objective - self.dual_objective
    }
}

/// Full training output: the model plus per-sample dual coefficients.
#[derive(Debug, Clone)]
pub struct SvrFit {
    pub model: SvrModel,
    /// α − α* for every training row (zeros included).
    pub coefficients: Vec<f64>,
    pub report: SolverReport,
}

pub fn svr_train(x: ArrayView2<f64>, y: ArrayView1<f64>, hp: &SvrHyperparams) -> Result<SvrModel> {
    svr_train_detailed(x, y, hp, SMO_TOLERANCE).map(|f| f.model)
}

/// Trains with an explicit KKT tolerance and returns solver diagnostics.
pub fn svr_train_detailed(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    hp: &SvrHyperparams,
    tolerance: f64,
) -> Result<SvrFit> {
    hp.validate()?;
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid(format!("SVR needs at least 2 samples, got {n}")));
    }
    if y.len() != n {
        return Err(Error::invalid(format!("{} rows but {} targets", n, y.len())));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("SVR input contains non-finite values"));
    }
    let scaler = StandardScaler::fit(x)?;
    let xs = scaler.transform(x)?;
    let k = gram(&xs, &hp.kernel);
    let sol = solve_dual(&k, y, hp.c, hp.epsilon, tolerance);

    let coefficients = sol.coefficients();
    let support: Vec<usize> = (0..n).filter(|&i| coefficients[i] != 0.0).collect();
    let support_vectors = support.iter().map(|&i| xs.row(i).to_vec()).collect();
    let dual_coefs: Vec<f64> = support.iter().map(|&i| coefficients[i]).collect();

    let dual_objective = dual_objective(&k, y, &coefficients, &sol.beta, hp.epsilon);
    let primal_objective = primal_objective(&k, y, &coefficients, sol.bias, hp.c, hp.epsilon);
    if !sol.converged {
        log::warn!(
            "SVR solver stopped after {} iterations with KKT violation {:.3e}",
            sol.iterations,
            sol.violation
        );
    }
    Ok(SvrFit {
        model: SvrModel {
            hyperparams: *hp,
            scaler,
            support_vectors,
            dual_coefs,
            bias: sol.bias,
        },
        coefficients,
        report: SolverReport {
            iterations: sol.iterations,
            converged: sol.converged,
            violation: sol.violation,
            dual_objective,
            primal_objective,
        },
    })
}

pub fn svr_predict(model: &SvrModel, x: ArrayView2<f64>) -> Result<Vec<f64>> {
    let d = model.scaler.n_features();
    if x.ncols() != d {
        return Err(Error::invalid(format!(
            "model expects {} features, got {}",
            d,
            x.ncols()
        )));
    }
    let kernel = model.hyperparams.kernel;
    Ok(x.rows()
        .into_iter()
        .map(|row| {
            let z = model.scaler.transform_row(row);
            model
                .support_vectors
                .iter()
                .zip(&model.dual_coefs)
                .map(|(sv, &a)| a * kernel.eval_unchecked(sv, &z))
                .sum::<f64>()
                + model.bias
        })
        .collect())
}

/// Solves the dual for a precomputed row-major Gram matrix.
pub(crate) fn solve_dual(k: &[f64], y: ArrayView1<f64>, c: f64, epsilon: f64, tolerance: f64) -> SmoSolution {
    Smo::new(k, y, c, epsilon).solve(tolerance)
}

/// Row-major Gram matrix of the rows of `xs`.
pub(crate) fn gram(xs: &Array2<f64>, kernel: &KernelSpec) -> Vec<f64> {
    let n = xs.nrows();
    let rows: Vec<Vec<f64>> = xs.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval_unchecked(&rows[i], &rows[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Dual objective in maximization form.
pub fn dual_objective(k: &[f64], y: ArrayView1<f64>, coefs: &[f64], beta: &[f64], epsilon: f64) -> f64 {
    let n = coefs.len();
    let mut quad = 0.0;
    for i in 0..n {
        if coefs[i] == 0.0 {
            continue;
        }
        let row = &k[i * n..(i + 1) * n];
        quad += coefs[i] * row.iter().zip(coefs).map(|(a, b)| a * b).sum::<f64>();
    }
    let lin: f64 = y.iter().zip(coefs).map(|(a, b)| a * b).sum();
    -0.5 * quad - epsilon * beta.iter().sum::<f64>() + lin
}

/// ½‖w‖² + C·Σ max(0, |y − f(x)| − ε).
pub fn primal_objective(k: &[f64], y: ArrayView1<f64>, coefs: &[f64], bias: f64, c: f64, epsilon: f64) -> f64 {
    let n = coefs.len();
    let mut quad = 0.0;
    let mut loss = 0.0;
    for i in 0..n {
        let row = &k[i * n..(i + 1) * n];
        let kd: f64 = row.iter().zip(coefs).map(|(a, b)| a * b).sum();
        quad += coefs[i] * kd;
        loss += ((y[i] - kd - bias).abs() - epsilon).max(0.0);
    }
    0.5 * quad + c * loss
}

pub(crate) struct SmoSolution {
    pub beta: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    pub violation: f64,
}

impl SmoSolution {
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.beta.len() / 2;
        (0..n).map(|i| self.beta[i] - self.beta[i + n]).collect()
    }
}

/// Two-coefficient working-set solver over the 2n-variable form
/// `min ½βᵀQβ + pᵀβ, sᵀβ = 0, 0 ≤ β ≤ C` with β = [α; α*].
struct Smo<'a> {
    k: &'a [f64],
    n: usize,
    c: f64,
    beta: Vec<f64>,
    grad: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(k: &'a [f64], y: ArrayView1<f64>, c: f64, epsilon: f64) -> Self {
        let n = y.len();
        let mut grad = Vec::with_capacity(2 * n);
        grad.extend(y.iter().map(|&v| epsilon - v));
        grad.extend(y.iter().map(|&v| epsilon + v));
        Smo {
            k,
            n,
            c,
            beta: vec![0.0; 2 * n],
            grad,
        }
    }

    #[inline]
    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    fn q(&self, s: usize, t: usize) -> f64 {
        self.sign(s) * self.sign(t) * self.k[(s % self.n) * self.n + t % self.n]
    }

    /// Maximal violating pair `(i, j)` and its violation `m − M`.
    fn select(&self) -> Option<(usize, usize, f64)> {
        let n = self.n;
        let (alpha, alpha_star) = self.beta.split_at(n);
        let (g, g_star) = self.grad.split_at(n);
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..n {
            if alpha[k] < self.c && -g[k] > gmax {
                gmax = -g[k];
                i = k;
            }
            if alpha_star[k] > 0.0 && g_star[k] > gmax {
                gmax = g_star[k];
                i = k + n;
            }
            if alpha[k] > 0.0 && -g[k] < gmin {
                gmin = -g[k];
                j = k;
            }
            if alpha_star[k] < self.c && g_star[k] < gmin {
                gmin = g_star[k];
                j = k + n;
            }
        }
        if i == usize::MAX || j == usize::MAX {
            return None;
        }
        Some((i, j, gmax - gmin))
    }

    fn solve(mut self, tolerance: f64) -> SmoSolution {
        let mut iterations = 0;
        let mut violation = 0.0;
        let mut converged = false;
        while iterations < SMO_MAX_ITER {
            let Some((i, j, gap)) = self.select() else {
                converged = true;
                break;
            };
            violation = gap;
            if gap < tolerance {
                converged = true;
                break;
            }
            self.update(i, j);
            iterations += 1;
        }
        if !converged {
            violation = self.select().map_or(0.0, |s| s.2);
        }
        let bias = -self.rho();
        SmoSolution {
            beta: self.beta,
            bias,
            iterations,
            converged,
            violation,
        }
    }

    fn update(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (qii, qjj, qij) = (self.q(i, i), self.q(j, j), self.q(i, j));
        let (old_i, old_j) = (self.beta[i], self.beta[j]);
        let (bi, bj);
        if self.sign(i) != self.sign(j) {
            let mut quad = qii + qjj + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = old_i - old_j;
            let (mut ai, mut aj) = (old_i + delta, old_j + delta);
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
            bi = ai;
            bj = aj;
        } else {
            let mut quad = qii + qjj - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = old_i + old_j;
            let (mut ai, mut aj) = (old_i - delta, old_j + delta);
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
            bi = ai;
            bj = aj;
        }
        self.beta[i] = bi;
        self.beta[j] = bj;
        let (di, dj) = (bi - old_i, bj - old_j);
        if di == 0.0 && dj == 0.0 {
            return;
        }
        let n = self.n;
        let (wi, wj) = (self.sign(i) * di, self.sign(j) * dj);
        let (ri, rj) = ((i % n) * n, (j % n) * n);
        let (ki, kj) = (&self.k[ri..ri + n], &self.k[rj..rj + n]);
        let (g, g_star) = self.grad.split_at_mut(n);
        for t in 0..n {
            let u = ki[t] * wi + kj[t] * wj;
            g[t] += u;
            g_star[t] -= u;
        }
    }

    fn rho(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum_free, mut n_free) = (0.0, 0usize);
        for t in 0..2 * self.n {
            let s = self.sign(t);
            let yg = s * self.grad[t];
            let at_upper = self.beta[t] >= self.c;
            let at_lower = self.beta[t] <= 0.0;
            if at_upper {
                if s < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if at_lower {
                if s > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};

    fn linear_fixture() -> (Array2<f64>, Array1<f64>) {
        let x = Array2::from_shape_fn((20, 1), |(i, _)| i as f64 / 19.0);
        let y = x.column(0).mapv(|v| 2.0 * v);
        (x, y)
    }

    fn r2(y: &[f64], yhat: &[f64]) -> f64 {
        let m = y.iter().sum::<f64>() / y.len() as f64;
        let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
        let ss_tot: f64 = y.iter().map(|a| (a - m).powi(2)).sum();
        1.0 - ss_res / ss_tot
    }

    #[test]
    fn constant_target_gives_bias_only() {
        let x = Array2::from_shape_fn((8, 2), |(i, j)| (i * 3 + j) as f64 % 5.0);
        let y = Array1::from_elem(8, 0.7);
        for kernel in [
            KernelSpec::Linear,
            KernelSpec::Rbf { gamma: 0.5 },
            KernelSpec::Polynomial { gamma: 0.1, degree: 2, coef0: 1.0 },
            KernelSpec::Sigmoid { gamma: 0.1, coef0: 0.0 },
        ] {
            for epsilon in [0.0, 0.1] {
                let hp = SvrHyperparams { c: 1.0, epsilon, kernel };
                let m = svr_train(x.view(), y.view(), &hp).unwrap();
                assert!(m.dual_coefs.is_empty());
                assert!((m.bias - 0.7).abs() < 1e-12);
                let p = svr_predict(&m, x.view()).unwrap();
                assert!(p.iter().all(|v| (v - 0.7).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn noiseless_linear_recovery() {
        let (x, y) = linear_fixture();
        let hp = SvrHyperparams { c: 100.0, epsilon: 0.01, kernel: KernelSpec::Linear };
        let fit = svr_train_detailed(x.view(), y.view(), &hp, SMO_TOLERANCE).unwrap();
        let p = svr_predict(&fit.model, x.view()).unwrap();
        assert!(r2(y.as_slice().unwrap(), &p) >= 0.999);
        for (a, b) in y.iter().zip(&p) {
            assert!((a - b).abs() <= 0.01 + 1e-3, "{a} vs {b}");
        }
        let r = fit.report;
        assert!(r.converged);
        assert!(r.duality_gap() <= 1e-3 * (1.0 + r.dual_objective.abs()), "{r:?}");
        assert!(r.duality_gap() >= -1e-9);
    }

    #[test]
    fn feasibility_and_box() {
        let x = Array2::from_shape_fn((15, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64);
        let y = Array1::from_shape_fn(15, |i| ((i * 5) % 7) as f64 / 3.0);
        let hp = SvrHyperparams { c: 0.5, epsilon: 0.05, kernel: KernelSpec::Rbf { gamma: 0.3 } };
        let m = svr_train(x.view(), y.view(), &hp).unwrap();
        assert!(m.dual_coefs.iter().all(|a| a.abs() <= hp.c));
        assert!(m.dual_coefs.iter().sum::<f64>().abs() <= 1e-6 * hp.c);
    }

    #[test]
    fn shift_equivariance_and_zero_column() {
        let x = Array2::from_shape_fn((12, 2), |(i, j)| ((i * (j + 2)) % 7) as f64);
        let y = Array1::from_shape_fn(12, |i| (i as f64 * 0.37).sin());
        let hp = SvrHyperparams { c: 2.0, epsilon: 0.05, kernel: KernelSpec::Linear };
        let base = svr_predict(&svr_train(x.view(), y.view(), &hp).unwrap(), x.view()).unwrap();
        let shifted_y = y.mapv(|v| v + 3.25);
        let shifted = svr_predict(&svr_train(x.view(), shifted_y.view(), &hp).unwrap(), x.view()).unwrap();
        for (a, b) in base.iter().zip(&shifted) {
            assert!((b - a - 3.25).abs() < 1e-6);
        }
        let xz = ndarray::concatenate![ndarray::Axis(1), x, Array2::zeros((12, 1))];
        let rbf = SvrHyperparams { kernel: KernelSpec::Rbf { gamma: 0.4 }, ..hp };
        let a = svr_predict(&svr_train(x.view(), y.view(), &rbf).unwrap(), x.view()).unwrap();
        let b = svr_predict(&svr_train(xz.view(), y.view(), &rbf).unwrap(), xz.view()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let (x, mut y) = linear_fixture();
        let hp = SvrHyperparams { c: 1.0, epsilon: 0.1, kernel: KernelSpec::Linear };
        let m = svr_train(x.view(), y.view(), &hp).unwrap();
        assert!(svr_predict(&m, Array2::zeros((1, 2)).view()).is_err());
        y[3] = f64::NAN;
        assert!(svr_train(x.view(), y.view(), &hp).is_err());
        let bad = SvrHyperparams { c: 0.0, ..hp };
        assert!(svr_train(x.view(), y.view(), &bad).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let (x, y) = linear_fixture();
        let hp = SvrHyperparams { c: 10.0, epsilon: 0.1, kernel: KernelSpec::Rbf { gamma: 0.5 } };
        let m = svr_train(x.view(), y.view(), &hp).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: SvrModel = serde_json::from_str(&json).unwrap();
        assert_eq!(svr_predict(&m, x.view()).unwrap(), svr_predict(&back, x.view()).unwrap());
        assert!(json.contains("\"C\":10.0"));
    }
}

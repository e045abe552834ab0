use ndarray::{ArrayView1, ArrayView2};

fn is_constant(col: ArrayView1<f64>) -> bool {
    let first = col[0];
    col.iter().all(|&v| v == first)
}

/// Population variance of the min-max normalized column (0 for constant columns).
pub fn normalized_variance(col: ArrayView1<f64>) -> f64 {
    let (lo, hi) = col
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return 0.0;
    }
    let n = col.len() as f64;
    let scaled: Vec<f64> = col.iter().map(|&v| (v - lo) / range).collect();
    let mean = scaled.iter().sum::<f64>() / n;
    scaled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Indices of non-constant columns whose normalized variance is at least `threshold`.
pub fn variance_filter(x: ArrayView2<f64>, threshold: f64) -> Vec<usize> {
    if x.nrows() == 0 {
        return Vec::new();
    }
    (0..x.ncols())
        .filter(|&j| {
            let col = x.column(j);
            !is_constant(col) && normalized_variance(col) >= threshold
        })
        .collect()
}

/// Sample Pearson correlation, or `None` when either side has zero variance.
pub(crate) fn pearson(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b.iter()) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa > 0.0 && sbb > 0.0 {
        Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PruneOutcome {
    pub retained: Vec<usize>,
    /// Zero-variance columns that were kept but should have been filtered earlier.
    pub zero_variance: Vec<usize>,
}

/// Greedy left-to-right pruning: drop a column if its |r| with any already
/// retained column exceeds `threshold`.
pub fn correlation_prune(x: ArrayView2<f64>, threshold: f64) -> PruneOutcome {
    let mut out = PruneOutcome::default();
    for j in 0..x.ncols() {
        let col = x.column(j);
        if x.nrows() < 2 || is_constant(col) {
            log::warn!("column {j} has zero variance; treating its correlations as 0");
            out.zero_variance.push(j);
            out.retained.push(j);
            continue;
        }
        let redundant = out.retained.iter().any(|&k| {
            pearson(col, x.column(k)).is_some_and(|r| r.abs() > threshold)
        });
        if !redundant {
            out.retained.push(j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;

    #[test]
    fn variance_examples() {
        let x = array![[3.0, 0.0, 1.0], [3.0, 1.0, 2.0], [3.0, 0.0, 1.0], [3.0, 1.0, 1.001]];
        assert!((normalized_variance(x.column(1)) - 0.25).abs() < 1e-15);
        assert_eq!(variance_filter(x.view(), 0.001), vec![1, 2]);
        assert_eq!(variance_filter(x.view(), 0.0), vec![1, 2]);
        assert_eq!(variance_filter(x.view(), 0.3), Vec::<usize>::new());
    }

    #[test]
    fn duplicates_and_negations_pruned() {
        let mut r = crate::rng::rng(3);
        let n = 40;
        let a: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let mut x = Array2::zeros((n, 4));
        for i in 0..n {
            x[[i, 0]] = a[i];
            x[[i, 1]] = b[i];
            x[[i, 2]] = a[i];
            x[[i, 3]] = -2.0 * b[i] + 1.0;
        }
        let out = correlation_prune(x.view(), 0.95);
        assert_eq!(out.retained, vec![0, 1]);
        assert!(out.zero_variance.is_empty());
    }

    #[test]
    fn moderately_correlated_columns_survive() {
        // r(a, b) = 0.3 by construction: b = 0.3 a + sqrt(1 - 0.09) c with a ⟂ c
        let a = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let c = [1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
        let s = (1.0f64 - 0.09).sqrt();
        let mut x = Array2::zeros((8, 2));
        for i in 0..8 {
            x[[i, 0]] = a[i];
            x[[i, 1]] = 0.3 * a[i] + s * c[i];
        }
        let r = pearson(x.column(0), x.column(1)).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
        assert_eq!(correlation_prune(x.view(), 0.95).retained, vec![0, 1]);
    }

    #[test]
    fn zero_variance_is_kept_and_reported() {
        let x = array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        let out = correlation_prune(x.view(), 0.95);
        assert_eq!(out.retained, vec![0, 1]);
        assert_eq!(out.zero_variance, vec![1]);
    }
}

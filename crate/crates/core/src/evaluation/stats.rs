use std::fmt;

use nalgebra::{DMatrix, DVector};
use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::metrics::pearson_r;
use crate::error::{Error, Result};

/// Reported instead of +∞ for perfectly collinear features.
pub const VIF_CAP: f64 = 1e12;

/// Group-splitting thresholds on the relative GTV.
pub const EFFECT_THRESHOLDS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1) as f64;
    (m, var.sqrt())
}

/// Mean and sample sd of a set of absolute correlations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsSummary {
    pub mean_abs: f64,
    pub sd_abs: f64,
}

impl AbsSummary {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let abs: Vec<f64> = values.map(f64::abs).collect();
        let (mean_abs, sd_abs) = mean_sd(&abs);
        AbsSummary { mean_abs, sd_abs }
    }
}

impl fmt::Display for AbsSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.mean_abs, self.sd_abs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCorrelations {
    pub r: Vec<f64>,
    pub summary: AbsSummary,
}

/// Pearson r of every column with `y`.
pub fn feature_label_correlations(x: ArrayView2<f64>, y: &[f64]) -> Result<LabelCorrelations> {
    if x.nrows() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    let r = x
        .columns()
        .into_iter()
        .enumerate()
        .map(|(j, c)| pearson_r(&c.to_vec(), y).map_err(|e| e.context(format!("feature {j}"))))
        .collect::<Result<Vec<_>>>()?;
    let summary = AbsSummary::of(r.iter().copied());
    Ok(LabelCorrelations { r, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationHeatmap {
    /// Symmetric, unit diagonal.
    pub matrix: Vec<Vec<f64>>,
    /// Over the strictly upper triangle.
    pub summary: AbsSummary,
}

pub fn pairwise_correlation_heatmap(x: ArrayView2<f64>) -> Result<CorrelationHeatmap> {
    let p = x.ncols();
    if p < 2 {
        return Err(Error::invalid(format!("heatmap needs at least 2 features, got {p}")));
    }
    let cols: Vec<Vec<f64>> = x.columns().into_iter().map(|c| c.to_vec()).collect();
    let mut matrix = vec![vec![1.0; p]; p];
    let mut upper = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in i + 1..p {
            let r = pearson_r(&cols[i], &cols[j]).map_err(|e| e.context(format!("features {i} and {j}")))?;
            matrix[i][j] = r;
            matrix[j][i] = r;
            upper.push(r);
        }
    }
    Ok(CorrelationHeatmap {
        matrix,
        summary: AbsSummary::of(upper.into_iter()),
    })
}

/// Variance inflation factor of every column against the others (with intercept).
pub fn vif(x: ArrayView2<f64>) -> Result<Vec<f64>> {
    let (n, p) = x.dim();
    if p < 2 {
        return Err(Error::invalid(format!("VIF needs at least 2 features, got {p}")));
    }
    if n <= p {
        return Err(Error::invalid(format!("VIF needs more samples than features ({n} <= {p})")));
    }
    (0..p)
        .map(|j| {
            let target = x.column(j);
            let design = DMatrix::from_fn(n, p, |i, c| match c {
                0 => 1.0,
                c if c <= j => x[[i, c - 1]],
                c => x[[i, c]],
            });
            let r2 = ols_r_squared(design, target)
                .ok_or_else(|| Error::Undefined(format!("feature {j} is constant; VIF undefined")))?;
            let denom = 1.0 - r2;
            let v = if denom <= 1.0 / VIF_CAP { VIF_CAP } else { (1.0 / denom).min(VIF_CAP) };
            if v >= VIF_CAP {
                log::warn!("feature {j} is perfectly collinear with the others; VIF capped at {VIF_CAP:e}");
            }
            Ok(v)
        })
        .collect()
}

fn ols_r_squared(design: DMatrix<f64>, target: ArrayView1<f64>) -> Option<f64> {
    let n = target.len();
    let b = DVector::from_iterator(n, target.iter().copied());
    let mean = b.mean();
    let ss_tot: f64 = b.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return None;
    }
    let svd = design.clone().svd(true, true);
    let tol = svd.singular_values.max() * n as f64 * f64::EPSILON;
    let coef = svd.solve(&b, tol).ok()?;
    let resid = &b - design * coef;
    Some((1.0 - resid.norm_squared() / ss_tot).clamp(0.0, 1.0))
}

/// Standardized mean difference with pooled sample sd.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid(format!(
            "Cohen's d needs >= 2 samples per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (ma, sa) = mean_sd(a);
    let (mb, sb) = mean_sd(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0)).sqrt();
    if pooled == 0.0 {
        return Err(Error::Undefined("Cohen's d is undefined for zero pooled sd".into()));
    }
    Ok((ma - mb) / pooled)
}

/// |d| bucket with cut points 0.2, 0.5 and 0.8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EffectMagnitude {
    #[serde(rename = "<0.2")]
    Negligible,
    #[serde(rename = "[0.2, 0.5)")]
    Small,
    #[serde(rename = "[0.5, 0.8)")]
    Medium,
    #[serde(rename = "≥0.8")]
    Large,
}

impl EffectMagnitude {
    pub fn of(d: f64) -> Self {
        let a = d.abs();
        if a < 0.2 {
            EffectMagnitude::Negligible
        } else if a < 0.5 {
            EffectMagnitude::Small
        } else if a < 0.8 {
            EffectMagnitude::Medium
        } else {
            EffectMagnitude::Large
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EffectMagnitude::Negligible => "<0.2",
            EffectMagnitude::Small => "[0.2, 0.5)",
            EffectMagnitude::Medium => "[0.5, 0.8)",
            EffectMagnitude::Large => "≥0.8",
        }
    }
}

impl fmt::Display for EffectMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSizeRow {
    pub feature: String,
    pub cohens_d: f64,
    pub magnitude: EffectMagnitude,
    /// Samples with label below the threshold.
    pub n_below: usize,
    pub n_above: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSizeTable {
    pub threshold: f64,
    pub rows: Vec<EffectSizeRow>,
    pub mean_abs_d: f64,
}

/// Cohen's d per column between `y < threshold` and `y ≥ threshold`.
pub fn effect_size_table(x: ArrayView2<f64>, names: &[String], y: &[f64], threshold: f64) -> Result<EffectSizeTable> {
    if x.nrows() != y.len() || x.ncols() != names.len() {
        return Err(Error::invalid(format!(
            "effect sizes need matching shapes: {}x{} matrix, {} labels, {} names",
            x.nrows(),
            x.ncols(),
            y.len(),
            names.len()
        )));
    }
    let below: Vec<usize> = (0..y.len()).filter(|&i| y[i] < threshold).collect();
    let above: Vec<usize> = (0..y.len()).filter(|&i| y[i] >= threshold).collect();
    if below.len() < 2 || above.len() < 2 {
        return Err(Error::Data(format!(
            "threshold {threshold} splits labels into groups of {} and {}; need >= 2 each",
            below.len(),
            above.len()
        )));
    }
    let rows = x
        .columns()
        .into_iter()
        .zip(names)
        .map(|(col, name)| {
            let a: Vec<f64> = below.iter().map(|&i| col[i]).collect();
            let b: Vec<f64> = above.iter().map(|&i| col[i]).collect();
            let d = cohens_d(&a, &b).map_err(|e| e.context(format!("feature {name}")))?;
            Ok(EffectSizeRow {
                feature: name.clone(),
                cohens_d: d,
                magnitude: EffectMagnitude::of(d),
                n_below: a.len(),
                n_above: b.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_abs_d = rows.iter().map(|r| r.cohens_d.abs()).sum::<f64>() / rows.len().max(1) as f64;
    Ok(EffectSizeTable {
        threshold,
        rows,
        mean_abs_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn vif_orthogonal_and_duplicate() {
        let x = Array2::from_shape_vec((4, 2), vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]).unwrap();
        for v in vif(x.view()).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let dup = Array2::from_shape_fn((6, 2), |(i, _)| i as f64);
        assert_eq!(vif(dup.view()).unwrap(), vec![VIF_CAP, VIF_CAP]);
        assert!(vif(Array2::zeros((2, 2)).view()).is_err());
    }

    #[test]
    fn cohens_d_fixtures() {
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let d = cohens_d(&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert_eq!(cohens_d(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), -d);
        assert!(cohens_d(&[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn magnitude_edges() {
        assert_eq!(EffectMagnitude::of(0.1999), EffectMagnitude::Negligible);
        assert_eq!(EffectMagnitude::of(0.2), EffectMagnitude::Small);
        assert_eq!(EffectMagnitude::of(-0.5), EffectMagnitude::Medium);
        assert_eq!(EffectMagnitude::of(0.69), EffectMagnitude::Medium);
        assert_eq!(EffectMagnitude::of(0.8), EffectMagnitude::Large);
        assert_eq!(serde_json::to_string(&EffectMagnitude::Large).unwrap(), "\"≥0.8\"");
    }

    #[test]
    fn effect_table_groups() {
        let y = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9];
        let x = Array2::from_shape_vec((6, 1), vec![-1.0, 0.0, 1.0, 1.0, 2.0, 3.0]).unwrap();
        let t = effect_size_table(x.view(), &["f".into()], &y, 0.6).unwrap();
        assert_eq!((t.rows[0].n_below, t.rows[0].n_above), (3, 3));
        assert!((t.rows[0].cohens_d + 2.0).abs() < 1e-15);
        assert_eq!(t.rows[0].magnitude, EffectMagnitude::Large);
        let err = effect_size_table(x.view(), &["f".into()], &y, 0.85).unwrap_err();
        assert!(err.to_string().contains("groups of 5 and 1"));
    }

    #[test]
    fn heatmap_and_summary_format() {
        let x = Array2::from_shape_fn((5, 2), |(i, _)| i as f64);
        let h = pairwise_correlation_heatmap(x.view()).unwrap();
        assert!((h.matrix[0][1] - 1.0).abs() < 1e-15);
        assert_eq!(h.matrix[0][0], 1.0);
        let s = AbsSummary { mean_abs: 0.15, sd_abs: 0.125 };
        assert_eq!(s.to_string(), "0.150 ± 0.125");
        let lc = feature_label_correlations(x.view(), &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(lc.summary.sd_abs, 0.0);
    }
}

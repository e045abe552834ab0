use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominator of the relative RMSE.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RrmseDenominator {
    /// `Σŷ²`, unaveraged.
    #[default]
    Sum,
    /// `(1/n)·Σŷ²`.
    Mean,
}

fn check_lengths(y: &[f64], y_hat: &[f64], min: usize) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} targets vs {} predictions",
            y.len(),
            y_hat.len()
        )));
    }
    if y.len() < min {
        return Err(Error::invalid(format!("need at least {min} values, got {}", y.len())));
    }
    Ok(())
}

/// Coefficient of determination `1 − SS_res/SS_tot`.
pub fn r_squared(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_lengths(y, y_hat, 2)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Undefined("R² is undefined for a constant target".into()));
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// `sqrt( mean((y − ŷ)²) / D )` with `D` chosen by `denominator`.
pub fn rrmse(y: &[f64], y_hat: &[f64], denominator: RrmseDenominator) -> Result<f64> {
    check_lengths(y, y_hat, 1)?;
    let n = y.len() as f64;
    let mse = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
    let sum_sq: f64 = y_hat.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return Err(Error::Undefined("RRMSE is undefined for all-zero predictions".into()));
    }
    let denom = match denominator {
        RrmseDenominator::Sum => sum_sq,
        RrmseDenominator::Mean => sum_sq / n,
    };
    Ok((mse / denom).sqrt())
}

/// Sample Pearson correlation.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b, 2)?;
    crate::selection::pearson(ArrayView1::from(a), ArrayView1::from(b))
        .ok_or_else(|| Error::Undefined("Pearson r is undefined for a constant input".into()))
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
    Polynomial,
    Sigmoid,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Linear,
        KernelKind::Rbf,
        KernelKind::Polynomial,
        KernelKind::Sigmoid,
    ];

    pub fn label(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Rbf => "rbf",
            KernelKind::Polynomial => "polynomial",
            KernelKind::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            "polynomial" | "poly" => Ok(KernelKind::Polynomial),
            "sigmoid" => Ok(KernelKind::Sigmoid),
            _ => Err(Error::invalid(format!("unknown kernel '{s}'"))),
        }
    }
}

/// Kernel with exactly the parameters its kind uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { gamma: f64, degree: u32, coef0: f64 },
    Sigmoid { gamma: f64, coef0: f64 },
}

impl KernelSpec {
    pub fn kind(&self) -> KernelKind {
        match self {
            KernelSpec::Linear => KernelKind::Linear,
            KernelSpec::Rbf { .. } => KernelKind::Rbf,
            KernelSpec::Polynomial { .. } => KernelKind::Polynomial,
            KernelSpec::Sigmoid { .. } => KernelKind::Sigmoid,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Linear => None,
            KernelSpec::Rbf { gamma }
            | KernelSpec::Polynomial { gamma, .. }
            | KernelSpec::Sigmoid { gamma, .. } => Some(gamma),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self.gamma() {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::invalid(format!("kernel gamma must be positive, got {g}")));
            }
        }
        match *self {
            KernelSpec::Polynomial { degree, coef0, .. } => {
                if degree == 0 {
                    return Err(Error::invalid("polynomial degree must be >= 1"));
                }
                if !coef0.is_finite() {
                    return Err(Error::invalid("coef0 must be finite"));
                }
            }
            KernelSpec::Sigmoid { coef0, .. } if !coef0.is_finite() => {
                return Err(Error::invalid("coef0 must be finite"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Evaluates the kernel without dimension checks.
    #[inline]
    pub(crate) fn eval_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(u, v),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::Polynomial { gamma, degree, coef0 } => {
                (gamma * dot(u, v) + coef0).powi(degree as i32)
            }
            KernelSpec::Sigmoid { gamma, coef0 } => (gamma * dot(u, v) + coef0).tanh(),
        }
    }
}

#[inline]
fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn kernel_eval(spec: &KernelSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "kernel inputs differ in dimension: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(spec.eval_unchecked(u, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let u = [1.0, 2.0];
        assert_eq!(kernel_eval(&KernelSpec::Rbf { gamma: 0.7 }, &u, &u).unwrap(), 1.0);
        assert_eq!(kernel_eval(&KernelSpec::Linear, &u, &[3.0, 4.0]).unwrap(), 11.0);
        let poly = KernelSpec::Polynomial { gamma: 1.0, degree: 2, coef0: 0.0 };
        assert_eq!(kernel_eval(&poly, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 4.0);
        let sig = KernelSpec::Sigmoid { gamma: 0.5, coef0: -1.0 };
        assert_eq!(kernel_eval(&sig, &[2.0], &[1.0]).unwrap(), 0.0);
        let rbf = KernelSpec::Rbf { gamma: 0.5 };
        assert!((kernel_eval(&rbf, &[0.0, 0.0], &[1.0, 1.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(kernel_eval(&KernelSpec::Linear, &u, &[1.0]).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { gamma: 1.0, degree: 0, coef0: 0.0 }.validate().is_err());
        assert!(KernelSpec::Sigmoid { gamma: 1.0, coef0: 0.0 }.validate().is_ok());
        let json = serde_json::to_string(&KernelSpec::Polynomial { gamma: 0.1, degree: 3, coef0: 1.0 }).unwrap();
        assert_eq!(json, r#"{"kind":"polynomial","gamma":0.1,"degree":3,"coef0":1.0}"#);
    }
}

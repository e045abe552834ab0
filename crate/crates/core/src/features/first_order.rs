use super::{discretize, Family, FeatureVector};
use crate::error::Result;
use crate::volume::{Mask3D, Volume3D};

/// Linear-interpolation percentile of sorted data (`q` in [0, 100]).
pub(crate) fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = q / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Intensity-histogram statistics over the masked voxels.
pub fn first_order(v: &Volume3D, m: &Mask3D, n_bins: u32) -> Result<FeatureVector> {
    m.ensure_matches(v)?;
    let vals = v.values();
    let mut x: Vec<f64> = m.indices().into_iter().map(|i| vals[i]).collect();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4, mut mad) = (0.0, 0.0, 0.0, 0.0);
    for &xi in &x {
        let d = xi - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        mad += d.abs();
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    mad /= n;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let p10 = percentile_sorted(&x, 10.0);
    let p90 = percentile_sorted(&x, 90.0);
    let p25 = percentile_sorted(&x, 25.0);
    let p75 = percentile_sorted(&x, 75.0);
    let robust: Vec<f64> = x.iter().copied().filter(|&v| v >= p10 && v <= p90).collect();
    let robust_mean = robust.iter().sum::<f64>() / robust.len() as f64;
    let robust_mad = robust.iter().map(|v| (v - robust_mean).abs()).sum::<f64>() / robust.len() as f64;

    let labels = discretize(v, m, n_bins)?;
    let mut hist = vec![0.0; n_bins as usize];
    for (_, l) in labels.inside() {
        hist[l as usize - 1] += 1.0;
    }
    let (mut entropy, mut uniformity) = (0.0, 0.0);
    for h in hist {
        let p = h / n;
        if p > 0.0 {
            entropy -= p * p.log2();
            uniformity += p * p;
        }
    }

    let mut out = FeatureVector::new("original", Family::FirstOrder);
    out.push("10Percentile", p10);
    out.push("90Percentile", p90);
    out.push("Energy", energy);
    out.push("Entropy", entropy);
    out.push("InterquartileRange", p75 - p25);
    out.push("Kurtosis", kurtosis);
    out.push("Maximum", x[x.len() - 1]);
    out.push("MeanAbsoluteDeviation", mad);
    out.push("Mean", mean);
    out.push("Median", percentile_sorted(&x, 50.0));
    out.push("Minimum", x[0]);
    out.push("Range", x[x.len() - 1] - x[0]);
    out.push("RobustMeanAbsoluteDeviation", robust_mad);
    out.push("RootMeanSquared", (energy / n).sqrt());
    out.push("Skewness", skewness);
    out.push("Uniformity", uniformity);
    out.push("Variance", m2);
    Ok(out.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Grid;

    fn fo(vals: &[f64]) -> FeatureVector {
        let g = Grid::new([vals.len(), 1, 1], [1.0; 3], [0.0; 3]).unwrap();
        first_order(&Volume3D::new(g, vals.to_vec()).unwrap(), &Mask3D::full(g), 32).unwrap()
    }

    #[test]
    fn constant_region() {
        let f = fo(&[2.0, 2.0, 2.0]);
        assert_eq!(f.get("Mean"), Some(2.0));
        assert_eq!(f.get("Skewness"), Some(0.0));
        assert_eq!(f.get("Kurtosis"), Some(0.0));
        assert_eq!(f.get("RootMeanSquared"), Some(2.0));
        assert_eq!(f.get("Entropy"), Some(0.0));
    }

    #[test]
    fn hand_arithmetic() {
        let f = fo(&[4.0, 2.0, 1.0, 3.0]);
        assert_eq!(f.get("Mean"), Some(2.5));
        assert_eq!(f.get("Median"), Some(2.5));
        assert_eq!(f.get("Minimum"), Some(1.0));
        assert_eq!(f.get("Maximum"), Some(4.0));
        // numpy-style linear percentile: rank 0.3 -> 1.3
        assert!((f.get("10Percentile").unwrap() - 1.3).abs() < 1e-12);
        let s = fo(&[0.0, 0.0, 0.0, 4.0]).get("Skewness").unwrap();
        assert!((s - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((s - 1.1547).abs() < 1e-4);
        let k = fo(&[0.0, 0.0, 0.0, 4.0]).get("Kurtosis").unwrap();
        // m4 = (3 + 81)/4 = 21, m2 = 3
        assert!((k - 21.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn single_voxel() {
        let f = fo(&[5.0]);
        assert_eq!(f.get("Skewness"), Some(0.0));
        assert_eq!(f.get("10Percentile"), Some(5.0));
    }
}

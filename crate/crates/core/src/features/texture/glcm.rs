use super::plogp;
use crate::features::discretize::LabelVolume;
use crate::features::{Family, FeatureVector};

/// Symmetric gray-level co-occurrence matrix, summed over directions.
#[derive(Debug, Clone)]
pub struct Glcm {
    pub n_levels: usize,
    /// Raw symmetric pair counts, row-major `n_levels × n_levels`, level `i` at row `i-1`.
    pub counts: Vec<f64>,
}

pub fn glcm(labels: &LabelVolume, directions: &[[isize; 3]]) -> Glcm {
    let ng = labels.n_bins as usize;
    let g = labels.grid;
    let mut counts = vec![0.0; ng * ng];
    for (idx, li) in labels.inside() {
        let p = g.coords(idx);
        for &d in directions {
            if let Some(q) = g.offset(p, d) {
                let lj = labels.get(q);
                if lj > 0 {
                    let (a, b) = (li as usize - 1, lj as usize - 1);
                    counts[a * ng + b] += 1.0;
                    counts[b * ng + a] += 1.0;
                }
            }
        }
    }
    Glcm { n_levels: ng, counts }
}

impl Glcm {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Joint probability matrix; all zeros when no pair was found.
    pub fn probabilities(&self) -> Vec<f64> {
        let t = self.total();
        if t == 0.0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|c| c / t).collect()
    }

    pub fn features(&self) -> FeatureVector {
        let ng = self.n_levels;
        let p = self.probabilities();
        let mut out = FeatureVector::new("original", Family::Glcm);
        let names = [
            "Autocorrelation",
            "ClusterProminence",
            "ClusterShade",
            "ClusterTendency",
            "Contrast",
            "Correlation",
            "DifferenceAverage",
            "DifferenceEntropy",
            "DifferenceVariance",
            "Id",
            "Idm",
            "Idmn",
            "Idn",
            "Imc1",
            "Imc2",
            "InverseVariance",
            "JointAverage",
            "JointEnergy",
            "JointEntropy",
            "MaximumProbability",
            "SumAverage",
            "SumEntropy",
            "SumSquares",
        ];
        if self.total() == 0.0 {
            for n in names {
                out.push(n, 0.0);
            }
            return out.into();
        }

        let lvl = |k: usize| (k + 1) as f64;
        let mut px = vec![0.0; ng];
        let mut p_sum = vec![0.0; 2 * ng + 1];
        let mut p_diff = vec![0.0; ng];
        for i in 0..ng {
            for j in 0..ng {
                let v = p[i * ng + j];
                px[i] += v;
                p_sum[i + j + 2] += v;
                p_diff[i.abs_diff(j)] += v;
            }
        }
        let mu: f64 = px.iter().enumerate().map(|(i, &v)| lvl(i) * v).sum();
        let var: f64 = px.iter().enumerate().map(|(i, &v)| (lvl(i) - mu).powi(2) * v).sum();

        let mut acc = [0.0f64; 12];
        let (mut hxy, mut hxy1, mut hxy2, mut max_p) = (0.0, 0.0, 0.0, 0.0f64);
        for i in 0..ng {
            for j in 0..ng {
                let v = p[i * ng + j];
                let (a, b) = (lvl(i), lvl(j));
                let pxy = px[i] * px[j];
                if pxy > 0.0 {
                    hxy1 -= v * pxy.log2();
                    hxy2 += plogp(pxy);
                }
                if v == 0.0 {
                    continue;
                }
                let c = a + b - 2.0 * mu;
                let d = a - b;
                let ad = d.abs();
                acc[0] += a * b * v;
                acc[1] += c.powi(4) * v;
                acc[2] += c.powi(3) * v;
                acc[3] += c * c * v;
                acc[4] += d * d * v;
                acc[5] += v / (1.0 + ad);
                acc[6] += v / (1.0 + d * d);
                acc[7] += v / (1.0 + d * d / (ng * ng) as f64);
                acc[8] += v / (1.0 + ad / ng as f64);
                acc[9] += v * v;
                hxy += plogp(v);
                max_p = max_p.max(v);
            }
        }
        let hx: f64 = px.iter().map(|&v| plogp(v)).sum();
        let correlation = if var > 0.0 { (acc[0] - mu * mu) / var } else { 1.0 };
        let diff_avg: f64 = p_diff.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
        let diff_ent: f64 = p_diff.iter().map(|&v| plogp(v)).sum();
        let diff_var: f64 = p_diff
            .iter()
            .enumerate()
            .map(|(k, &v)| (k as f64 - diff_avg).powi(2) * v)
            .sum();
        let inv_var: f64 = p_diff
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &v)| v / (k * k) as f64)
            .sum();
        let sum_avg: f64 = p_sum.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
        let sum_ent: f64 = p_sum.iter().map(|&v| plogp(v)).sum();
        let imc1 = if hx > 0.0 { (hxy - hxy1) / hx } else { 0.0 };
        let imc2 = (1.0 - (-2.0 * (hxy2 - hxy)).exp()).max(0.0).sqrt();

        let values = [
            acc[0], acc[1], acc[2], acc[3], acc[4], correlation, diff_avg, diff_ent, diff_var,
            acc[5], acc[6], acc[7], acc[8], imc1, imc2, inv_var, mu, acc[9], hxy, max_p, sum_avg,
            sum_ent, var,
        ];
        for (n, v) in names.into_iter().zip(values) {
            out.push(n, v);
        }
        out.into()
    }
}

#[cfg(test)]
mod tests {
    use super::super::DIRECTIONS_13;
    use super::*;
    use crate::volume::Grid;

    fn line(labels: &[u32], n_bins: u32) -> LabelVolume {
        let g = Grid::new([labels.len(), 1, 1], [1.0; 3], [0.0; 3]).unwrap();
        LabelVolume::from_labels(g, labels.to_vec(), n_bins).unwrap()
    }

    #[test]
    fn ramp_of_three() {
        let m = glcm(&line(&[1, 2, 3], 3), &DIRECTIONS_13);
        let p = m.probabilities();
        #[rustfmt::skip]
        let expect = [
            0.0, 0.25, 0.0,
            0.25, 0.0, 0.25,
            0.0, 0.25, 0.0,
        ];
        assert_eq!(p, expect);
        let f = m.features();
        assert_eq!(f.get("Autocorrelation"), Some(4.0));
        assert_eq!(f.get("Contrast"), Some(1.0));
        assert_eq!(f.get("JointAverage"), Some(2.0));
        // p_{x-y}(1) = 1
        assert_eq!(f.get("DifferenceEntropy"), Some(0.0));
        assert_eq!(f.get("DifferenceAverage"), Some(1.0));
    }

    #[test]
    fn constant_region_single_cell() {
        let m = glcm(&line(&[1, 1, 1, 1], 32), &DIRECTIONS_13);
        let p = m.probabilities();
        assert_eq!(p[0], 1.0);
        assert!(p[1..].iter().all(|&v| v == 0.0));
        let f = m.features();
        assert_eq!(f.get("Autocorrelation"), Some(1.0));
        assert_eq!(f.get("JointEntropy"), Some(0.0));
        assert_eq!(f.get("Correlation"), Some(1.0));
        assert_eq!(f.get("Imc2"), Some(0.0));
        assert!(f.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn isolated_voxel_has_no_pairs() {
        let m = glcm(&line(&[2], 4), &DIRECTIONS_13);
        assert_eq!(m.total(), 0.0);
        assert!(m.features().values.iter().all(|&v| v == 0.0));
    }
}

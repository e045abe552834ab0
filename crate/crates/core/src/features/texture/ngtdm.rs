use super::neighbors_26;
use crate::features::discretize::LabelVolume;
use crate::features::{Family, FeatureVector};

/// Neighborhood gray-tone difference table.
#[derive(Debug, Clone, PartialEq)]
pub struct Ngtdm {
    /// Voxels per level that have at least one in-mask neighbor.
    pub n: Vec<f64>,
    /// Σ |level − mean neighbor level| per level.
    pub s: Vec<f64>,
}

pub fn ngtdm(labels: &LabelVolume) -> Ngtdm {
    let g = labels.grid;
    let ng = labels.n_bins as usize;
    let mut n = vec![0.0; ng];
    let mut s = vec![0.0; ng];
    for (idx, level) in labels.inside() {
        let p = g.coords(idx);
        let (mut sum, mut cnt) = (0.0, 0usize);
        for d in neighbors_26() {
            if let Some(q) = g.offset(p, d) {
                let l = labels.get(q);
                if l > 0 {
                    sum += l as f64;
                    cnt += 1;
                }
            }
        }
        if cnt > 0 {
            let k = level as usize - 1;
            n[k] += 1.0;
            s[k] += (level as f64 - sum / cnt as f64).abs();
        }
    }
    Ngtdm { n, s }
}

const COARSENESS_CAP: f64 = 1e6;

impl Ngtdm {
    pub fn features(&self) -> FeatureVector {
        let nvp: f64 = self.n.iter().sum();
        let mut out = FeatureVector::new("original", Family::Ngtdm);
        if nvp == 0.0 {
            out.push("Busyness", 0.0);
            out.push("Coarseness", COARSENESS_CAP);
            out.push("Complexity", 0.0);
            out.push("Contrast", 0.0);
            out.push("Strength", 0.0);
            return out.into();
        }
        let levels: Vec<(f64, f64, f64)> = self
            .n
            .iter()
            .zip(&self.s)
            .enumerate()
            .filter(|(_, (&n, _))| n > 0.0)
            .map(|(i, (&n, &s))| ((i + 1) as f64, n / nvp, s))
            .collect();
        let ngp = levels.len() as f64;
        let s_total: f64 = levels.iter().map(|l| l.2).sum();
        let ps_sum: f64 = levels.iter().map(|&(_, p, s)| p * s).sum();

        let (mut pair_contrast, mut busy_den, mut complexity, mut strength_num) = (0.0, 0.0, 0.0, 0.0);
        for &(i, pi, si) in &levels {
            for &(j, pj, sj) in &levels {
                let d = i - j;
                pair_contrast += pi * pj * d * d;
                busy_den += (i * pi - j * pj).abs();
                complexity += d.abs() * (pi * si + pj * sj) / (pi + pj);
                strength_num += (pi + pj) * d * d;
            }
        }
        let coarseness = if ps_sum > 0.0 { (1.0 / ps_sum).min(COARSENESS_CAP) } else { COARSENESS_CAP };
        let contrast = if ngp > 1.0 {
            pair_contrast / (ngp * (ngp - 1.0)) * s_total / nvp
        } else {
            0.0
        };
        let busyness = if busy_den > 0.0 { ps_sum / busy_den } else { 0.0 };
        let strength = if s_total > 0.0 { strength_num / s_total } else { 0.0 };

        out.push("Busyness", busyness);
        out.push("Coarseness", coarseness);
        out.push("Complexity", complexity / nvp);
        out.push("Contrast", contrast);
        out.push("Strength", strength);
        out.into()
    }
}

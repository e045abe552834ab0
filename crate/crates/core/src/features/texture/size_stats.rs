use super::plogp;
use crate::features::{Family, FeatureVector};

/// Count matrix indexed by (gray level, size), shared by GLRLM, GLSZM and GLDM.
///
/// For GLRLM the size axis is run length, for GLSZM zone size and for GLDM
/// dependence count (including the center voxel).
#[derive(Debug, Clone, PartialEq)]
pub struct SizeMatrix {
    pub n_levels: usize,
    pub max_size: usize,
    /// Row-major `n_levels × max_size`; entry `(i-1, j-1)` counts level `i`, size `j`.
    pub counts: Vec<f64>,
    /// Voxels inside the mask.
    pub n_voxels: usize,
    /// Number of directions aggregated (1 for non-directional matrices).
    pub n_directions: usize,
}

impl SizeMatrix {
    pub fn new(n_levels: usize, max_size: usize, n_voxels: usize, n_directions: usize) -> Self {
        SizeMatrix {
            n_levels,
            max_size,
            counts: vec![0.0; n_levels * max_size],
            n_voxels,
            n_directions,
        }
    }

    #[inline]
    pub fn add(&mut self, level: u32, size: usize) {
        self.counts[(level as usize - 1) * self.max_size + size - 1] += 1.0;
    }

    pub fn get(&self, level: usize, size: usize) -> f64 {
        self.counts[(level - 1) * self.max_size + size - 1]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn features(&self, family: Family) -> FeatureVector {
        let s = self.stats();
        let mut out = FeatureVector::new("original", family);
        let pct = if self.n_voxels > 0 {
            s.total / (self.n_voxels * self.n_directions) as f64
        } else {
            0.0
        };
        match family {
            Family::Glrlm => {
                out.push("GrayLevelNonUniformity", s.gln);
                out.push("GrayLevelNonUniformityNormalized", s.glnn);
                out.push("GrayLevelVariance", s.glv);
                out.push("HighGrayLevelRunEmphasis", s.hgl);
                out.push("LongRunEmphasis", s.large);
                out.push("LongRunHighGrayLevelEmphasis", s.large_hgl);
                out.push("LongRunLowGrayLevelEmphasis", s.large_lgl);
                out.push("LowGrayLevelRunEmphasis", s.lgl);
                out.push("RunEntropy", s.entropy);
                out.push("RunLengthNonUniformity", s.sn);
                out.push("RunLengthNonUniformityNormalized", s.snn);
                out.push("RunPercentage", pct);
                out.push("RunVariance", s.sv);
                out.push("ShortRunEmphasis", s.small);
                out.push("ShortRunHighGrayLevelEmphasis", s.small_hgl);
                out.push("ShortRunLowGrayLevelEmphasis", s.small_lgl);
            }
            Family::Glszm => {
                out.push("GrayLevelNonUniformity", s.gln);
                out.push("GrayLevelNonUniformityNormalized", s.glnn);
                out.push("GrayLevelVariance", s.glv);
                out.push("HighGrayLevelZoneEmphasis", s.hgl);
                out.push("LargeAreaEmphasis", s.large);
                out.push("LargeAreaHighGrayLevelEmphasis", s.large_hgl);
                out.push("LargeAreaLowGrayLevelEmphasis", s.large_lgl);
                out.push("LowGrayLevelZoneEmphasis", s.lgl);
                out.push("SizeZoneNonUniformity", s.sn);
                out.push("SizeZoneNonUniformityNormalized", s.snn);
                out.push("SmallAreaEmphasis", s.small);
                out.push("SmallAreaHighGrayLevelEmphasis", s.small_hgl);
                out.push("SmallAreaLowGrayLevelEmphasis", s.small_lgl);
                out.push("ZoneEntropy", s.entropy);
                out.push("ZonePercentage", pct);
                out.push("ZoneVariance", s.sv);
            }
            Family::Gldm => {
                out.push("DependenceEntropy", s.entropy);
                out.push("DependenceNonUniformity", s.sn);
                out.push("DependenceNonUniformityNormalized", s.snn);
                out.push("DependenceVariance", s.sv);
                out.push("GrayLevelNonUniformity", s.gln);
                out.push("GrayLevelVariance", s.glv);
                out.push("HighGrayLevelEmphasis", s.hgl);
                out.push("LargeDependenceEmphasis", s.large);
                out.push("LargeDependenceHighGrayLevelEmphasis", s.large_hgl);
                out.push("LargeDependenceLowGrayLevelEmphasis", s.large_lgl);
                out.push("LowGrayLevelEmphasis", s.lgl);
                out.push("SmallDependenceEmphasis", s.small);
                out.push("SmallDependenceHighGrayLevelEmphasis", s.small_hgl);
                out.push("SmallDependenceLowGrayLevelEmphasis", s.small_lgl);
            }
            other => panic!("size matrix features requested for {other:?}"),
        }
        out.into()
    }

    fn stats(&self) -> SizeStats {
        let mut s = SizeStats::default();
        let total = self.total();
        s.total = total;
        if total == 0.0 {
            return s;
        }
        let mut rows = vec![0.0; self.n_levels];
        let mut cols = vec![0.0; self.max_size];
        let (mut mu_i, mut mu_j) = (0.0, 0.0);
        for i in 0..self.n_levels {
            for j in 0..self.max_size {
                let c = self.counts[i * self.max_size + j];
                if c == 0.0 {
                    continue;
                }
                rows[i] += c;
                cols[j] += c;
                let p = c / total;
                let gi = (i + 1) as f64;
                let sj = (j + 1) as f64;
                let (i2, j2) = (gi * gi, sj * sj);
                mu_i += gi * p;
                mu_j += sj * p;
                s.small += p / j2;
                s.large += p * j2;
                s.lgl += p / i2;
                s.hgl += p * i2;
                s.small_lgl += p / (i2 * j2);
                s.small_hgl += p * i2 / j2;
                s.large_lgl += p * j2 / i2;
                s.large_hgl += p * i2 * j2;
                s.entropy += plogp(p);
            }
        }
        for i in 0..self.n_levels {
            for j in 0..self.max_size {
                let c = self.counts[i * self.max_size + j];
                if c == 0.0 {
                    continue;
                }
                let p = c / total;
                s.glv += p * ((i + 1) as f64 - mu_i).powi(2);
                s.sv += p * ((j + 1) as f64 - mu_j).powi(2);
            }
        }
        s.gln = rows.iter().map(|r| r * r).sum::<f64>() / total;
        s.glnn = s.gln / total;
        s.sn = cols.iter().map(|c| c * c).sum::<f64>() / total;
        s.snn = s.sn / total;
        s
    }
}

#[derive(Debug, Default)]
struct SizeStats {
    total: f64,
    small: f64,
    large: f64,
    lgl: f64,
    hgl: f64,
    small_lgl: f64,
    small_hgl: f64,
    large_lgl: f64,
    large_hgl: f64,
    gln: f64,
    glnn: f64,
    sn: f64,
    snn: f64,
    glv: f64,
    sv: f64,
    entropy: f64,
}

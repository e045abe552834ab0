use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::manifest::{CohortManifest, LesionEntry};
use crate::error::{Error, Result};
use crate::features::{Block, ColumnName, Family, FeatureMatrix, FeatureName};
use crate::rng::{derive_seed, rng};
use crate::volume::io::{write_mask, write_volume};
use crate::volume::{Grid, Mask3D, Volume3D};

/// Latent lesion parameters that drive the volume-mode label, in planting order.
pub const VOLUME_LATENTS: [&str; 4] = [
    "image_texture_amplitude",
    "image_texture_change",
    "dose_level",
    "dose_spread_change",
];

const LABEL_MIN: f64 = 0.05;
const LABEL_MAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticMode {
    /// Feature matrices drawn directly.
    Features,
    /// Small VOL1 volumes plus a manifest, to be run through extraction.
    Volumes,
}

/// Map from the linear predictor to the relative GTV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelTransform {
    /// Min-max affine map onto `[0.05, 1.5]`; keeps the model exactly linear.
    Affine,
    /// `1.5·exp(0.8·(s − max s))` on the standardized predictor; heavy right tail.
    Lognormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub mode: SyntheticMode,
    pub n_samples: usize,
    pub n_patients: usize,
    /// Columns per block (feature mode).
    pub n_features: usize,
    pub n_informative: usize,
    /// Noise sd relative to the sd of the noiseless linear predictor.
    pub noise_sd: f64,
    /// AR(1) correlation between neighboring columns of a block.
    pub feature_correlation: f64,
    /// Lognormal shape of the feature marginals; 0 keeps them Gaussian.
    pub feature_skew: f64,
    pub blocks: Vec<Block>,
    /// Blocks receiving informative columns, round-robin; defaults to `blocks`.
    pub informative_blocks: Option<Vec<Block>>,
    pub label_transform: LabelTransform,
    /// Cube edge in voxels (volume mode).
    pub volume_size: usize,
    pub volume_spacing: [f64; 3],
    /// Falls back to a seed derived from the pipeline seed.
    pub seed: Option<u64>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            mode: SyntheticMode::Features,
            n_samples: 69,
            n_patients: 39,
            n_features: 100,
            n_informative: 6,
            noise_sd: 0.1,
            feature_correlation: 0.3,
            feature_skew: 0.5,
            blocks: Block::ALL.to_vec(),
            informative_blocks: None,
            label_transform: LabelTransform::Affine,
            volume_size: 16,
            volume_spacing: [1.0; 3],
            seed: None,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("synthetic: {m}")));
        if self.n_samples < 4 {
            return bad(format!("n_samples must be >= 4, got {}", self.n_samples));
        }
        if self.n_patients == 0 || self.n_patients > self.n_samples {
            return bad(format!("n_patients must lie in 1..={}", self.n_samples));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return bad(format!("noise_sd must be >= 0, got {}", self.noise_sd));
        }
        if !(self.feature_correlation.abs() < 1.0) {
            return bad("feature_correlation must lie in (-1, 1)".into());
        }
        if !(self.feature_skew.is_finite() && self.feature_skew >= 0.0) {
            return bad("feature_skew must be >= 0".into());
        }
        if self.n_informative == 0 && self.noise_sd == 0.0 {
            return bad("n_informative = 0 with noise_sd = 0 gives a constant label".into());
        }
        match self.mode {
            SyntheticMode::Features => {
                if self.blocks.is_empty() || self.n_features == 0 {
                    return bad("feature mode needs at least one block and one column".into());
                }
                let inf = self.informative_blocks();
                if inf.iter().any(|b| !self.blocks.contains(b)) {
                    return bad("informative_blocks must be a subset of blocks".into());
                }
                if inf.is_empty() && self.n_informative > 0 {
                    return bad("informative_blocks is empty".into());
                }
                let per_block = self.n_informative.div_ceil(inf.len().max(1));
                if per_block > self.n_features {
                    return bad(format!(
                        "{} informative columns do not fit {} columns per block",
                        self.n_informative, self.n_features
                    ));
                }
            }
            SyntheticMode::Volumes => {
                if self.n_informative > VOLUME_LATENTS.len() {
                    return bad(format!("volume mode plants at most {} latents", VOLUME_LATENTS.len()));
                }
                if self.volume_size < 12 {
                    return bad("volume_size must be >= 12".into());
                }
                if self.volume_spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return bad("volume_spacing must be positive".into());
                }
            }
        }
        Ok(())
    }

    fn informative_blocks(&self) -> Vec<Block> {
        self.informative_blocks.clone().unwrap_or_else(|| self.blocks.clone())
    }

    pub fn lesion_ids(&self) -> Vec<String> {
        (1..=self.n_samples).map(|i| format!("L{i:03}")).collect()
    }

    /// Lesions are assigned to patients in contiguous runs.
    pub fn patient_ids(&self) -> Vec<String> {
        (0..self.n_samples)
            .map(|i| format!("P{:03}", i * self.n_patients / self.n_samples + 1))
            .collect()
    }
}

/// A planted coefficient: a feature column (feature mode) or a lesion latent (volume mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTerm {
    pub name: String,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub mode: SyntheticMode,
    pub seed: u64,
    pub terms: Vec<PlantedTerm>,
    pub noise_sd: f64,
    pub label_transform: LabelTransform,
    pub labels: Vec<f64>,
}

impl GroundTruth {
    /// Planted feature columns (feature mode only).
    pub fn informative_columns(&self) -> Result<Vec<ColumnName>> {
        self.terms.iter().map(|t| t.name.parse()).collect()
    }
}

/// Feature-mode output.
#[derive(Debug, Clone)]
pub struct SyntheticFeatures {
    pub blocks: BTreeMap<Block, FeatureMatrix>,
    pub labels: Vec<f64>,
    pub patient_ids: Vec<String>,
    pub truth: GroundTruth,
}

pub fn synthetic_column(block: Block, j: usize) -> ColumnName {
    ColumnName {
        block,
        feature: FeatureName {
            filter: "synthetic".into(),
            family: Family::FirstOrder,
            feature: format!("x{j:03}"),
        },
    }
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Maps the linear predictor `s` plus noise to labels in `(0, 1.5]`.
fn make_labels(signal: &[f64], spec: &SyntheticSpec, r: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let n = signal.len() as f64;
    let mean = signal.iter().sum::<f64>() / n;
    let sd = (signal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let s: Vec<f64> = signal
        .iter()
        .map(|v| {
            let z = if sd > 0.0 { (v - mean) / sd } else { 0.0 };
            z + spec.noise_sd * normal(r)
        })
        .collect();
    let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        return Err(Error::Numerical("synthetic linear predictor is constant".into()));
    }
    Ok(match spec.label_transform {
        LabelTransform::Affine => s
            .iter()
            .map(|v| LABEL_MIN + (LABEL_MAX - LABEL_MIN) * (v - lo) / (hi - lo))
            .collect(),
        LabelTransform::Lognormal => {
            let m = s.iter().sum::<f64>() / n;
            let sd = (s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            let top = (hi - m) / sd;
            s.iter().map(|v| LABEL_MAX * (0.8 * ((v - m) / sd - top)).exp()).collect()
        }
    })
}

fn resolve_seed(spec: &SyntheticSpec, pipeline_seed: u64) -> u64 {
    spec.seed.unwrap_or_else(|| derive_seed(pipeline_seed, &[0x5147]))
}

/// Correlated feature blocks with a sparse planted linear label.
pub fn generate_features(spec: &SyntheticSpec, pipeline_seed: u64) -> Result<SyntheticFeatures> {
    spec.validate()?;
    let seed = resolve_seed(spec, pipeline_seed);
    let ids = spec.lesion_ids();
    let (n, p) = (spec.n_samples, spec.n_features);
    let rho = spec.feature_correlation;
    let innov = (1.0 - rho * rho).sqrt();

    let mut blocks = BTreeMap::new();
    for (bi, &block) in spec.blocks.iter().enumerate() {
        let mut r = rng(derive_seed(seed, &[1, bi as u64]));
        let mut x = Array2::zeros((n, p));
        for i in 0..n {
            let mut z = normal(&mut r);
            for j in 0..p {
                if j > 0 {
                    z = rho * z + innov * normal(&mut r);
                }
                x[[i, j]] = if spec.feature_skew > 0.0 { (spec.feature_skew * z).exp() } else { z };
            }
        }
        let cols = (0..p).map(|j| synthetic_column(block, j)).collect();
        blocks.insert(block, FeatureMatrix::new(ids.clone(), cols, x)?);
    }

    let mut r = rng(derive_seed(seed, &[2]));
    let inf_blocks = spec.informative_blocks();
    let mut per_block: BTreeMap<Block, Vec<usize>> = BTreeMap::new();
    for (k, &b) in inf_blocks.iter().enumerate() {
        let count = spec.n_informative / inf_blocks.len() + usize::from(k < spec.n_informative % inf_blocks.len());
        let mut cols = sample(&mut r, p, count).into_vec();
        cols.sort_unstable();
        per_block.insert(b, cols);
    }
    let mut terms = Vec::new();
    let mut signal = vec![0.0; n];
    for t in 0..spec.n_informative {
        let b = inf_blocks[t % inf_blocks.len()];
        let j = per_block[&b][t / inf_blocks.len()];
        let beta = r.random_range(0.5..1.5);
        let col = blocks[&b].values().column(j);
        for i in 0..n {
            signal[i] += beta * col[i];
        }
        terms.push(PlantedTerm {
            name: synthetic_column(b, j).to_string(),
            beta,
        });
    }
    let labels = make_labels(&signal, spec, &mut r)?;
    Ok(SyntheticFeatures {
        blocks,
        patient_ids: spec.patient_ids(),
        truth: GroundTruth {
            mode: SyntheticMode::Features,
            seed,
            terms,
            noise_sd: spec.noise_sd,
            label_transform: spec.label_transform,
            labels: labels.clone(),
        },
        labels,
    })
}

/// Writes a VOL1 cohort of ellipsoidal lesions under `dir` and returns its
/// manifest path and ground truth.
pub fn generate_volumes(spec: &SyntheticSpec, pipeline_seed: u64, dir: &Path) -> Result<(PathBuf, GroundTruth)> {
    spec.validate()?;
    let seed = resolve_seed(spec, pipeline_seed);
    let n = spec.n_samples;
    let mut r = rng(derive_seed(seed, &[3]));
    let latents: Vec<[f64; 4]> = (0..n).map(|_| std::array::from_fn(|_| normal(&mut r))).collect();
    let betas: Vec<f64> = (0..spec.n_informative).map(|_| r.random_range(0.5..1.5)).collect();
    let signal: Vec<f64> = latents
        .iter()
        .map(|t| betas.iter().zip(t).map(|(b, v)| b * v).sum())
        .collect();
    let labels = make_labels(&signal, spec, &mut r)?;

    let ids = spec.lesion_ids();
    let patients = spec.patient_ids();
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let lesion = build_lesion(spec, &latents[i], derive_seed(seed, &[4, i as u64]))?;
        let id = &ids[i];
        let rel = |kind: &str| PathBuf::from("volumes").join(format!("{id}_{kind}.json"));
        let paths = [
            rel("image_init"),
            rel("image_intra"),
            rel("dose_init"),
            rel("dose_intra"),
            rel("mask_init"),
            rel("mask_intra"),
        ];
        for (p, v) in paths[..4].iter().zip(&lesion.volumes) {
            write_volume(&dir.join(p), v)?;
        }
        write_mask(&dir.join(&paths[4]), &lesion.mask_init)?;
        write_mask(&dir.join(&paths[5]), &lesion.mask_intra)?;
        let gtv_init = lesion.mask_init.volume_mm3();
        let [image_init, image_intra, dose_init, dose_intra, mask_init, mask_intra] = paths;
        entries.push(LesionEntry {
            lesion_id: id.clone(),
            patient_id: patients[i].clone(),
            image_init,
            image_intra,
            dose_init,
            dose_intra,
            mask_init,
            mask_intra,
            gtv_init_mm3: gtv_init,
            gtv_followup_mm3: labels[i] * gtv_init,
        });
    }
    let manifest_path = dir.join("manifest.json");
    CohortManifest { lesions: entries }.write(&manifest_path)?;
    let truth = GroundTruth {
        mode: SyntheticMode::Volumes,
        seed,
        terms: betas
            .iter()
            .enumerate()
            .map(|(k, &beta)| PlantedTerm {
                name: VOLUME_LATENTS[k].into(),
                beta,
            })
            .collect(),
        noise_sd: spec.noise_sd,
        label_transform: spec.label_transform,
        labels,
    };
    Ok((manifest_path, truth))
}

struct LesionVolumes {
    volumes: [Volume3D; 4],
    mask_init: Mask3D,
    mask_intra: Mask3D,
}

fn build_lesion(spec: &SyntheticSpec, t: &[f64; 4], seed: u64) -> Result<LesionVolumes> {
    let mut r = rng(seed);
    let size = spec.volume_size;
    let sp = spec.volume_spacing;
    let dims = [size; 3];
    let grid = Grid::new(dims, sp, [0.0; 3])?;
    let half = size as f64 / 2.0;
    let center: [f64; 3] = std::array::from_fn(|a| (half - 0.5 + r.random_range(-1.0..1.0)) * sp[a]);
    let axes: [f64; 3] = std::array::from_fn(|a| r.random_range(0.28..0.36) * size as f64 * sp[a]);
    let shrink: f64 = r.random_range(0.75..0.92);
    let pos = |x: usize, y: usize, z: usize| [x as f64 * sp[0], y as f64 * sp[1], z as f64 * sp[2]];
    let ellipsoid = |p: [f64; 3], scale: f64| {
        (0..3)
            .map(|a| ((p[a] - center[a]) / (axes[a] * scale)).powi(2))
            .sum::<f64>()
            <= 1.0
    };
    let mask_init = Mask3D::from_fn(grid, |x, y, z| ellipsoid(pos(x, y, z), 1.0))?;
    let mask_intra = Mask3D::from_fn(grid, |x, y, z| ellipsoid(pos(x, y, z), shrink))?;

    let amp_init = 40.0 * (0.4 * t[0]).exp();
    let amp_intra = amp_init * (0.3 * t[1]).exp();
    let dose_level = 20.0 * (0.2 * t[2]).exp();
    let width_init = 0.3 * size as f64;
    let width_intra = width_init * (0.15 * t[3]).exp();

    let noise: Vec<f64> = (0..grid.len()).map(|_| normal(&mut r)).collect();
    let noise2: Vec<f64> = (0..grid.len()).map(|_| normal(&mut r)).collect();
    let image = |amp: f64, m: &Mask3D, field: &[f64]| {
        Volume3D::from_fn(grid, |x, y, z| {
            let idx = grid.index(x, y, z);
            if m.contains(idx) {
                300.0 + amp * field[idx]
            } else {
                100.0 + 10.0 * field[idx]
            }
        })
    };
    let dose = |width: f64, field: &[f64]| {
        Volume3D::from_fn(grid, |x, y, z| {
            let p = pos(x, y, z);
            let d2: f64 = (0..3).map(|a| (p[a] - center[a]).powi(2)).sum();
            dose_level * (-d2 / (2.0 * width * width)).exp() * (1.0 + 0.02 * field[grid.index(x, y, z)])
        })
    };
    Ok(LesionVolumes {
        volumes: [
            image(amp_init, &mask_init, &noise)?,
            image(amp_intra, &mask_intra, &noise2)?,
            dose(width_init, &noise)?,
            dose(width_intra, &noise2)?,
        ],
        mask_init,
        mask_intra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_mode_shapes_and_range() {
        let spec = SyntheticSpec { n_features: 20, ..SyntheticSpec::default() };
        let s = generate_features(&spec, 5).unwrap();
        assert_eq!(s.blocks.len(), 6);
        assert!(s.blocks.values().all(|m| m.n_samples() == 69 && m.n_features() == 20));
        assert!(s.labels.iter().all(|&y| y > 0.0 && y <= 1.5));
        assert_eq!(s.truth.terms.len(), 6);
        let blocks: std::collections::BTreeSet<Block> =
            s.truth.informative_columns().unwrap().iter().map(|c| c.block).collect();
        assert_eq!(blocks.len(), 6);
        let again = generate_features(&spec, 5).unwrap();
        assert_eq!(again.labels, s.labels);
        assert_eq!(again.blocks, s.blocks);
    }

    #[test]
    fn noiseless_labels_are_affine_in_planted_columns() {
        let spec = SyntheticSpec {
            n_features: 30,
            n_informative: 3,
            noise_sd: 0.0,
            blocks: vec![Block::RInit],
            ..SyntheticSpec::default()
        };
        let s = generate_features(&spec, 1).unwrap();
        let x = s.blocks[&Block::RInit].values();
        let cols: Vec<usize> = s
            .truth
            .informative_columns()
            .unwrap()
            .iter()
            .map(|c| c.feature.feature[1..].parse().unwrap())
            .collect();
        let signal: Vec<f64> = (0..69)
            .map(|i| s.truth.terms.iter().zip(&cols).map(|(t, &j)| t.beta * x[[i, j]]).sum())
            .collect();
        let r = crate::evaluation::pearson_r(&signal, &s.labels).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lognormal_labels_are_right_skewed() {
        let spec = SyntheticSpec {
            n_features: 10,
            label_transform: LabelTransform::Lognormal,
            ..SyntheticSpec::default()
        };
        let s = generate_features(&spec, 2).unwrap();
        let below = s.labels.iter().filter(|&&y| y < 0.5).count();
        assert!(below * 2 > s.labels.len());
        assert!(s.labels.iter().all(|&y| y > 0.0 && y <= 1.5 + 1e-12));
    }

    #[test]
    fn invalid_specs() {
        let s = SyntheticSpec { n_informative: 0, noise_sd: 0.0, ..SyntheticSpec::default() };
        assert!(s.validate().is_err());
        let s = SyntheticSpec { mode: SyntheticMode::Volumes, n_informative: 5, ..SyntheticSpec::default() };
        assert!(s.validate().is_err());
    }
}

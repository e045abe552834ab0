//! Radiomic/dosiomic feature extraction inside a mask, delta features and
//! scenario feature matrices.

mod cohort;
mod delta;
pub mod discretize;
mod first_order;
mod matrix;
mod shape;
pub mod texture;

pub use cohort::{assemble_scenario, extract_blocks, BlockSet, LesionSample};
pub use delta::{delta_features, delta_value};
pub use discretize::{discretize, LabelVolume};
pub use first_order::first_order;
pub use matrix::{read_labels_csv, write_labels_csv, Block, ColumnName, FeatureMatrix, Scenario};
pub use shape::shape;
pub use texture::{texture_features, texture_matrix, TextureKind, TextureMatrix, TextureParams};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::volume::{apply_filter, FilterSpec, Mask3D, Volume3D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    FirstOrder,
    Shape,
    Glcm,
    Glrlm,
    Glszm,
    Gldm,
    Ngtdm,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::FirstOrder,
        Family::Shape,
        Family::Glcm,
        Family::Glrlm,
        Family::Glszm,
        Family::Gldm,
        Family::Ngtdm,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Family::FirstOrder => "firstorder",
            Family::Shape => "shape",
            Family::Glcm => "glcm",
            Family::Glrlm => "glrlm",
            Family::Glszm => "glszm",
            Family::Gldm => "gldm",
            Family::Ngtdm => "ngtdm",
        }
    }

    fn texture_kind(self) -> Option<TextureKind> {
        match self {
            Family::Glcm => Some(TextureKind::Glcm),
            Family::Glrlm => Some(TextureKind::Glrlm),
            Family::Glszm => Some(TextureKind::Glszm),
            Family::Gldm => Some(TextureKind::Gldm),
            Family::Ngtdm => Some(TextureKind::Ngtdm),
            _ => None,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| Error::invalid(format!("unknown feature family '{s}'")))
    }
}

/// `(filter, family, feature)` identifier, e.g. `wavelet-HLH:glcm:Autocorrelation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureName {
    pub filter: String,
    pub family: Family,
    pub feature: String,
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.filter, self.family.label(), self.feature)
    }
}

impl FromStr for FeatureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(3, ':');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(filter), Some(family), Some(feature)) if !feature.is_empty() => Ok(FeatureName {
                filter: filter.to_string(),
                family: family.parse()?,
                feature: feature.to_string(),
            }),
            _ => Err(Error::invalid(format!("malformed feature name '{s}'"))),
        }
    }
}

/// Ordered named feature values for one volume.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    pub names: Vec<FeatureName>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub(crate) fn new(filter: &str, family: Family) -> FeatureGroup {
        FeatureGroup {
            filter: filter.to_string(),
            family,
            inner: FeatureVector::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of the first feature whose identifier is `feature`.
    pub fn get(&self, feature: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n.feature == feature)
            .map(|i| self.values[i])
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.names.extend(other.names);
        self.values.extend(other.values);
    }

    fn with_filter(mut self, filter: &str) -> Self {
        for n in &mut self.names {
            n.filter = filter.to_string();
        }
        self
    }
}

/// Builder for one (filter, family) group; derefs to the finished vector.
#[derive(Debug, Clone)]
pub(crate) struct FeatureGroup {
    filter: String,
    family: Family,
    inner: FeatureVector,
}

impl FeatureGroup {
    pub fn push(&mut self, feature: &str, value: f64) {
        self.inner.names.push(FeatureName {
            filter: self.filter.clone(),
            family: self.family,
            feature: feature.to_string(),
        });
        // degenerate matrices can still produce NaN through 0/0 corner cases
        self.inner.values.push(if value.is_finite() { value } else { 0.0 });
    }
}

impl std::ops::Deref for FeatureGroup {
    type Target = FeatureVector;
    fn deref(&self) -> &FeatureVector {
        &self.inner
    }
}

impl From<FeatureGroup> for FeatureVector {
    fn from(g: FeatureGroup) -> Self {
        g.inner
    }
}

/// Feature-extraction settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    pub n_bins: u32,
    pub filters: Vec<FilterSpec>,
    pub families: Vec<Family>,
    /// Isotropic target spacing applied before extraction; `None` skips resampling.
    pub resample_spacing: Option<[f64; 3]>,
    pub execution: Execution,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            n_bins: 32,
            filters: FilterSpec::all(),
            families: Family::ALL.to_vec(),
            resample_spacing: Some([1.0; 3]),
            execution: Execution::Parallel,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::Config(format!("n_bins must be >= 2, got {}", self.n_bins)));
        }
        if self.filters.is_empty() || self.families.is_empty() {
            return Err(Error::Config("filter and family lists must be nonempty".into()));
        }
        for f in &self.filters {
            f.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Voxel margin kept around the mask so every filter sees real neighbors.
    fn crop_margin(&self, spacing: [f64; 3]) -> [usize; 3] {
        let sigma = self
            .filters
            .iter()
            .filter_map(|f| match f {
                FilterSpec::LogSigma { sigma } => Some(*sigma),
                _ => None,
            })
            .fold(0.0, f64::max);
        spacing.map(|s| (4.0 * sigma / s).ceil() as usize + 2)
    }
}

/// Crops volume and mask to the mask's bounding box plus `margin`, keeping
/// the crop start even so Haar blocks align with the uncropped grid.
fn crop_to_region(v: &Volume3D, m: &Mask3D, margin: [usize; 3]) -> Result<(Volume3D, Mask3D)> {
    let (lo, hi) = m.bounding_box();
    let dims = v.dims();
    let mut start = [0usize; 3];
    let mut size = [0usize; 3];
    for a in 0..3 {
        let s = lo[a].saturating_sub(margin[a]);
        let s = s - s % 2;
        let mut e = (hi[a] + margin[a]).min(dims[a]);
        if (e - s) % 2 == 1 && e < dims[a] {
            e += 1;
        }
        start[a] = s;
        size[a] = e - s;
    }
    if size == dims {
        return Ok((v.clone(), m.clone()));
    }
    Ok((v.crop(start, size)?, m.crop(start, size)?))
}

/// Extracts the configured catalogue from one volume inside `m`.
///
/// Shape features are computed once, paired with the original filter.
pub fn extract_features(v: &Volume3D, m: &Mask3D, cfg: &ExtractionConfig) -> Result<FeatureVector> {
    m.ensure_matches(v)?;
    let (v, m) = crop_to_region(v, m, cfg.crop_margin(v.spacing()))?;
    let params = TextureParams::default();
    let mut out = FeatureVector::default();
    for filter in &cfg.filters {
        let label = filter.label();
        let filtered = apply_filter(&v, *filter)?;
        let needs_labels = cfg.families.iter().any(|f| f.texture_kind().is_some());
        let labels = if needs_labels {
            Some(discretize(&filtered, &m, cfg.n_bins)?)
        } else {
            None
        };
        for &family in &cfg.families {
            match family {
                Family::FirstOrder => {
                    out.extend(first_order(&filtered, &m, cfg.n_bins)?.with_filter(&label))
                }
                Family::Shape => {
                    if *filter == FilterSpec::Original {
                        out.extend(shape(&m));
                    }
                }
                tex => {
                    let kind = tex.texture_kind().expect("texture family");
                    let labels = labels.as_ref().expect("labels computed for texture families");
                    let matrix = texture_matrix(kind, labels, &params)?;
                    out.extend(texture_features(&matrix).with_filter(&label));
                }
            }
        }
    }
    Ok(out)
}

/// Feature names the configured catalogue produces, in extraction order.
pub fn catalogue(cfg: &ExtractionConfig) -> Result<Vec<FeatureName>> {
    let g = crate::volume::Grid::new([4, 4, 4], [1.0; 3], [0.0; 3])?;
    let v = Volume3D::from_fn(g, |x, y, z| (x + 2 * y + 3 * z) as f64)?;
    let m = Mask3D::full(g);
    let cfg = ExtractionConfig {
        resample_spacing: None,
        ..cfg.clone()
    };
    Ok(extract_features(&v, &m, &cfg)?.names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Grid;

    fn blob(seed: u64) -> (Volume3D, Mask3D) {
        let g = Grid::new([12, 12, 12], [1.0; 3], [0.0; 3]).unwrap();
        let v = Volume3D::from_fn(g, |x, y, z| {
            let h = (x as u64 * 73 + y as u64 * 151 + z as u64 * 283 + seed * 17) % 97;
            50.0 + h as f64 + 10.0 * (x as f64 / 3.0).sin()
        })
        .unwrap();
        let m = Mask3D::from_fn(g, |x, y, z| {
            let d = (x as f64 - 6.0).powi(2) + (y as f64 - 5.5).powi(2) + (z as f64 - 6.2).powi(2);
            d < 12.0
        })
        .unwrap();
        (v, m)
    }

    #[test]
    fn catalogue_names_unique_and_shape_only_original() {
        let names = catalogue(&ExtractionConfig::default()).unwrap();
        let set: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(set.len(), names.len());
        assert!(names
            .iter()
            .filter(|n| n.family == Family::Shape)
            .all(|n| n.filter == "original"));
        assert!(names.len() > 1000, "catalogue has {}", names.len());
    }

    #[test]
    fn extraction_is_deterministic_and_finite() {
        let (v, m) = blob(1);
        let cfg = ExtractionConfig::default();
        let a = extract_features(&v, &m, &cfg).unwrap();
        let b = extract_features(&v, &m, &cfg).unwrap();
        assert_eq!(a.names, b.names);
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.values.iter().all(|x| x.is_finite()));
        assert_eq!(a.names, catalogue(&cfg).unwrap());
    }

    #[test]
    fn cropping_matches_full_volume() {
        let (v, m) = blob(2);
        let cfg = ExtractionConfig {
            filters: vec![
                FilterSpec::Original,
                FilterSpec::Gradient,
                FilterSpec::LogSigma { sigma: 1.0 },
                FilterSpec::Wavelet { subband: crate::volume::HaarSubband::HLH },
            ],
            ..Default::default()
        };
        // embed the same content in a larger volume; mask region is identical
        let big_g = Grid::new([40, 40, 40], [1.0; 3], [-20.0; 3]).unwrap();
        let off = 20;
        let big_v = Volume3D::from_fn(big_g, |x, y, z| {
            if (off..off + 12).contains(&x) && (off..off + 12).contains(&y) && (off..off + 12).contains(&z) {
                v.at(x - off, y - off, z - off)
            } else {
                // replicate edges so LoG and gradient see the same data
                v.at(x.clamp(off, off + 11) - off, y.clamp(off, off + 11) - off, z.clamp(off, off + 11) - off)
            }
        })
        .unwrap();
        let big_m = Mask3D::from_fn(big_g, |x, y, z| {
            (off..off + 12).contains(&x)
                && (off..off + 12).contains(&y)
                && (off..off + 12).contains(&z)
                && m.contains(m.grid().index(x - off, y - off, z - off))
        })
        .unwrap();
        let a = extract_features(&v, &m, &cfg).unwrap();
        let b = extract_features(&big_v, &big_m, &cfg).unwrap();
        for ((n, x), y) in a.names.iter().zip(&a.values).zip(&b.values) {
            if n.filter == "original" || n.filter == "wavelet-HLH" {
                assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{n}: {x} vs {y}");
            }
        }
    }
}

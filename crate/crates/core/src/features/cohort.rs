use std::collections::BTreeMap;

use ndarray::Array2;

use super::{delta_features, extract_features, Block, ColumnName, ExtractionConfig, FeatureMatrix, FeatureVector, Scenario};
use crate::error::{Error, Result};
use crate::par;
use crate::volume::{resample, resample_mask, Interpolation, Mask3D, Volume3D};

/// One lesion's paired time points and its follow-up label.
#[derive(Debug, Clone)]
pub struct LesionSample {
    pub lesion_id: String,
    pub patient_id: String,
    pub image_init: Volume3D,
    pub image_intra: Volume3D,
    pub dose_init: Volume3D,
    pub dose_intra: Volume3D,
    pub mask_init: Mask3D,
    pub mask_intra: Mask3D,
    pub gtv_init_mm3: f64,
    pub gtv_followup_mm3: f64,
}

impl LesionSample {
    /// Follow-up GTV relative to the pre-treatment GTV.
    pub fn label(&self) -> Result<f64> {
        if !(self.gtv_init_mm3.is_finite() && self.gtv_init_mm3 > 0.0) {
            return Err(Error::Data(format!(
                "lesion {}: initial GTV must be positive, got {}",
                self.lesion_id, self.gtv_init_mm3
            )));
        }
        let y = self.gtv_followup_mm3 / self.gtv_init_mm3;
        if !(y.is_finite() && y >= 0.0) {
            return Err(Error::Data(format!(
                "lesion {}: relative GTV {y} is not a finite nonnegative number",
                self.lesion_id
            )));
        }
        Ok(y)
    }

    /// Resamples images and doses trilinearly and masks by nearest neighbor.
    pub fn resampled(&self, spacing: [f64; 3]) -> Result<LesionSample> {
        let img = |v: &Volume3D| resample(v, spacing, Interpolation::Trilinear);
        Ok(LesionSample {
            lesion_id: self.lesion_id.clone(),
            patient_id: self.patient_id.clone(),
            image_init: img(&self.image_init)?,
            image_intra: img(&self.image_intra)?,
            dose_init: img(&self.dose_init)?,
            dose_intra: img(&self.dose_intra)?,
            mask_init: resample_mask(&self.mask_init, spacing)?,
            mask_intra: resample_mask(&self.mask_intra, spacing)?,
            gtv_init_mm3: self.gtv_init_mm3,
            gtv_followup_mm3: self.gtv_followup_mm3,
        })
    }

    fn check_geometry(&self) -> Result<()> {
        let pairs = [
            (&self.mask_init, &self.image_init, "image_init"),
            (&self.mask_init, &self.dose_init, "dose_init"),
            (&self.mask_intra, &self.image_intra, "image_intra"),
            (&self.mask_intra, &self.dose_intra, "dose_intra"),
            (&self.mask_init, &self.image_intra, "intra-treatment image (vs initial mask)"),
        ];
        for (m, v, what) in pairs {
            if !m.matches(v) {
                return Err(Error::Data(format!(
                    "{what} grid {:?} does not match its mask grid {:?}",
                    v.grid(),
                    m.grid()
                )));
            }
        }
        Ok(())
    }
}

/// Per-lesion feature vectors for the four extracted time points.
struct LesionFeatures {
    r_init: Option<FeatureVector>,
    r_intra: Option<FeatureVector>,
    d_init: Option<FeatureVector>,
    d_intra: Option<FeatureVector>,
}

fn extract_lesion(s: &LesionSample, cfg: &ExtractionConfig, radiomic: bool, dosiomic: bool) -> Result<LesionFeatures> {
    let s = match cfg.resample_spacing {
        Some(sp) => s.resampled(sp)?,
        None => s.clone(),
    };
    s.check_geometry()?;
    let run = |want: bool, v: &Volume3D, m: &Mask3D| -> Result<Option<FeatureVector>> {
        if want {
            extract_features(v, m, cfg).map(Some)
        } else {
            Ok(None)
        }
    };
    Ok(LesionFeatures {
        r_init: run(radiomic, &s.image_init, &s.mask_init)?,
        r_intra: run(radiomic, &s.image_intra, &s.mask_intra)?,
        d_init: run(dosiomic, &s.dose_init, &s.mask_init)?,
        d_intra: run(dosiomic, &s.dose_intra, &s.mask_intra)?,
    })
}

/// Extracted feature blocks for a cohort plus the label vector.
#[derive(Debug, Clone)]
pub struct BlockSet {
    pub blocks: BTreeMap<Block, FeatureMatrix>,
    pub labels: Vec<f64>,
}

impl BlockSet {
    pub fn sample_ids(&self) -> &[String] {
        self.blocks
            .values()
            .next()
            .map(|m| m.sample_ids())
            .unwrap_or(&[])
    }

    /// Concatenates the blocks of `scenario` in canonical order.
    pub fn scenario_matrix(&self, scenario: Scenario) -> Result<FeatureMatrix> {
        let parts = scenario
            .blocks()
            .iter()
            .map(|b| {
                self.blocks
                    .get(b)
                    .ok_or_else(|| Error::Data(format!("feature block {b} is missing")))
            })
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::hconcat(&parts)
    }
}

fn block_matrix(block: Block, ids: &[String], rows: &[&FeatureVector]) -> Result<FeatureMatrix> {
    let names = &rows[0].names;
    let columns = names
        .iter()
        .map(|n| ColumnName {
            block,
            feature: n.clone(),
        })
        .collect();
    let mut values = Array2::zeros((rows.len(), names.len()));
    for (i, r) in rows.iter().enumerate() {
        if &r.names != names {
            return Err(Error::Data(format!("lesion {}: feature catalogue differs", ids[i])));
        }
        values.row_mut(i).assign(&ndarray::ArrayView1::from(&r.values));
    }
    FeatureMatrix::new(ids.to_vec(), columns, values)
}

/// Extracts the requested blocks for every lesion (in parallel, merged in input order).
pub fn extract_blocks(cohort: &[LesionSample], cfg: &ExtractionConfig, blocks: &[Block]) -> Result<BlockSet> {
    cfg.validate()?;
    if cohort.is_empty() {
        return Err(Error::Data("cohort is empty".into()));
    }
    let radiomic = blocks.iter().any(|b| b.is_radiomic());
    let dosiomic = blocks.iter().any(|b| !b.is_radiomic());
    let labels = cohort
        .iter()
        .map(|s| s.label())
        .collect::<Result<Vec<_>>>()?;
    let extracted = par::map(cfg.execution, cohort, |s| {
        extract_lesion(s, cfg, radiomic, dosiomic).map_err(|e| e.context(format!("lesion {}", s.lesion_id)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = cohort.iter().map(|s| s.lesion_id.clone()).collect();

    let mut out = BTreeMap::new();
    for &block in blocks {
        let rows: Vec<FeatureVector> = match block {
            Block::RInit => extracted.iter().map(|e| e.r_init.clone().expect("radiomic")).collect(),
            Block::RIntra => extracted.iter().map(|e| e.r_intra.clone().expect("radiomic")).collect(),
            Block::DInit => extracted.iter().map(|e| e.d_init.clone().expect("dosiomic")).collect(),
            Block::DIntra => extracted.iter().map(|e| e.d_intra.clone().expect("dosiomic")).collect(),
            Block::RDelta | Block::DDelta => extracted
                .iter()
                .zip(&ids)
                .map(|(e, id)| {
                    let (a, b) = if block == Block::RDelta {
                        (&e.r_init, &e.r_intra)
                    } else {
                        (&e.d_init, &e.d_intra)
                    };
                    delta_features(a.as_ref().expect("init"), b.as_ref().expect("intra"))
                        .map_err(|err| err.context(format!("lesion {id}")))
                })
                .collect::<Result<_>>()?,
        };
        let refs: Vec<&FeatureVector> = rows.iter().collect();
        out.insert(block, block_matrix(block, &ids, &refs)?);
    }
    Ok(BlockSet { blocks: out, labels })
}

/// Feature matrix and label vector for one scenario.
pub fn assemble_scenario(
    cohort: &[LesionSample],
    scenario: Scenario,
    cfg: &ExtractionConfig,
) -> Result<(FeatureMatrix, Vec<f64>)> {
    let set = extract_blocks(cohort, cfg, scenario.blocks())?;
    Ok((set.scenario_matrix(scenario)?, set.labels))
}

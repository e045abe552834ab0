use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::LesionSample;
use crate::fsutil::write_atomic;
use crate::volume::io::{read_mask, read_volume};

/// One lesion's VOL1 files and GTVs; paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionEntry {
    pub lesion_id: String,
    pub patient_id: String,
    pub image_init: PathBuf,
    pub image_intra: PathBuf,
    pub dose_init: PathBuf,
    pub dose_intra: PathBuf,
    pub mask_init: PathBuf,
    pub mask_intra: PathBuf,
    pub gtv_init_mm3: f64,
    pub gtv_followup_mm3: f64,
}

impl LesionEntry {
    fn paths(&self) -> [&PathBuf; 6] {
        [
            &self.image_init,
            &self.image_intra,
            &self.dose_init,
            &self.dose_intra,
            &self.mask_init,
            &self.mask_intra,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub lesions: Vec<LesionEntry>,
}

impl CohortManifest {
    /// Reads and validates a manifest: unique ids, existing files, positive GTVs.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: CohortManifest = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })?;
        m.validate(path.parent().unwrap_or(Path::new(".")))
            .map_err(|e| e.context(path.display().to_string()))?;
        Ok(m)
    }

    pub fn validate(&self, base: &Path) -> Result<()> {
        if self.lesions.is_empty() {
            return Err(Error::Data("manifest lists no lesions".into()));
        }
        let mut seen = HashSet::new();
        for l in &self.lesions {
            if !seen.insert(&l.lesion_id) {
                return Err(Error::Data(format!("duplicate lesion id '{}'", l.lesion_id)));
            }
            for (name, v) in [("gtv_init_mm3", l.gtv_init_mm3), ("gtv_followup_mm3", l.gtv_followup_mm3)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Data(format!("lesion {}: {name} must be positive, got {v}", l.lesion_id)));
                }
            }
            for p in l.paths() {
                let full = base.join(p);
                if !full.is_file() {
                    return Err(Error::Data(format!(
                        "lesion {}: missing file {}",
                        l.lesion_id,
                        full.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(path, json.as_bytes())
    }

    /// Loads every referenced volume; `base` is the manifest's directory.
    pub fn load_cohort(&self, base: &Path) -> Result<Vec<LesionSample>> {
        self.lesions
            .iter()
            .map(|l| {
                let v = |p: &PathBuf| read_volume(&base.join(p));
                let m = |p: &PathBuf| read_mask(&base.join(p));
                Ok(LesionSample {
                    lesion_id: l.lesion_id.clone(),
                    patient_id: l.patient_id.clone(),
                    image_init: v(&l.image_init)?,
                    image_intra: v(&l.image_intra)?,
                    dose_init: v(&l.dose_init)?,
                    dose_intra: v(&l.dose_intra)?,
                    mask_init: m(&l.mask_init)?,
                    mask_intra: m(&l.mask_intra)?,
                    gtv_init_mm3: l.gtv_init_mm3,
                    gtv_followup_mm3: l.gtv_followup_mm3,
                })
                .map_err(|e: Error| e.context(format!("lesion {}", l.lesion_id)))
            })
            .collect()
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::synth::SyntheticSpec;
use crate::error::{Error, Result};
use crate::evaluation::{EvaluationSettings, RrmseDenominator, EFFECT_THRESHOLDS, MAX_FEATURES};
use crate::features::{ExtractionConfig, Scenario};
use crate::par::Execution;
use crate::regression::{KernelGrids, KernelKind};
use crate::selection::{Criterion, SelectionConfig};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PathsConfig {
    /// Cohort manifest; defaults to `<output_dir>/cohort/manifest.json`.
    pub manifest: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub n_folds: usize,
    pub n_repeats: usize,
    /// Required before any stage runs; may come from `--seed`.
    pub seed: Option<u64>,
    /// Keeps all lesions of a patient in the same fold.
    pub group_by_patient: bool,
    pub inner_selection_folds: usize,
    pub inner_selection_repeats: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            n_folds: 5,
            n_repeats: 10,
            seed: None,
            group_by_patient: false,
            inner_selection_folds: 5,
            inner_selection_repeats: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    pub extraction: ExtractionConfig,
    pub selection: SelectionConfig,
    pub criteria: Vec<Criterion>,
    pub cv: CvConfig,
    pub kernels: Vec<KernelKind>,
    pub grids: KernelGrids,
    pub scenarios: Vec<Scenario>,
    /// Largest feature count in the evaluation sweep (1..=max_features).
    pub max_features: usize,
    pub rrmse_denominator: RrmseDenominator,
    pub effect_size_thresholds: Vec<f64>,
    pub synthetic: SyntheticSpec,
    /// Applies to extraction, selection and evaluation alike.
    pub execution: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            paths: PathsConfig::default(),
            extraction: ExtractionConfig::default(),
            selection: SelectionConfig::default(),
            criteria: Criterion::ALL.to_vec(),
            cv: CvConfig::default(),
            kernels: KernelKind::ALL.to_vec(),
            grids: KernelGrids::default(),
            scenarios: Scenario::ALL.to_vec(),
            max_features: MAX_FEATURES,
            rrmse_denominator: RrmseDenominator::Sum,
            effect_size_thresholds: EFFECT_THRESHOLDS.to_vec(),
            synthetic: SyntheticSpec::default(),
            execution: Execution::Parallel,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn seed(&self) -> Result<u64> {
        self.cv
            .seed
            .ok_or_else(|| Error::Config("no seed configured: set cv.seed or pass --seed".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.extraction.validate().map_err(cfg)?;
        self.evaluation_settings().validate().map_err(cfg)?;
        self.synthetic.validate().map_err(cfg)?;
        if self.cv.n_folds < 2 || self.cv.n_repeats == 0 {
            return Err(Error::Config("cv needs n_folds >= 2 and n_repeats >= 1".into()));
        }
        if self.criteria.is_empty() || self.kernels.is_empty() || self.scenarios.is_empty() {
            return Err(Error::Config("criteria, kernels and scenarios must be nonempty".into()));
        }
        if self.max_features == 0 || self.max_features > self.selection.top_n {
            return Err(Error::Config(format!(
                "max_features must lie in 1..={} (selection.top_n), got {}",
                self.selection.top_n, self.max_features
            )));
        }
        if self.effect_size_thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("effect_size_thresholds must be finite".into()));
        }
        Ok(())
    }

    pub fn extraction_config(&self) -> ExtractionConfig {
        ExtractionConfig {
            execution: self.execution,
            ..self.extraction.clone()
        }
    }

    pub fn selection_config(&self) -> SelectionConfig {
        SelectionConfig {
            execution: self.execution,
            ..self.selection.clone()
        }
    }

    pub fn evaluation_settings(&self) -> EvaluationSettings {
        EvaluationSettings {
            selection: self.selection_config(),
            grids: self.grids.clone(),
            rrmse_denominator: self.rrmse_denominator,
            inner_selection_folds: self.cv.inner_selection_folds,
            inner_selection_repeats: self.cv.inner_selection_repeats,
            execution: self.execution,
        }
    }

    pub fn feature_counts(&self) -> Vec<usize> {
        (1..=self.max_features).collect()
    }

    pub fn manifest_path(&self, out: &Path) -> PathBuf {
        self.paths
            .manifest
            .clone()
            .unwrap_or_else(|| out.join("cohort").join("manifest.json"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_constants() {
        let c = PipelineConfig::default();
        assert_eq!(c.selection.variance_threshold, 0.001);
        assert_eq!(c.selection.correlation_threshold, 0.95);
        assert_eq!((c.selection.k_nonzero, c.selection.top_n), (20, 15));
        assert_eq!((c.cv.n_folds, c.cv.n_repeats), (5, 10));
        assert_eq!(c.feature_counts().len(), 15);
    }

    #[test]
    fn seed_is_mandatory() {
        let mut c = PipelineConfig::default();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.cv.seed = Some(7);
        c.validate().unwrap();
        let back: PipelineConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let partial: PipelineConfig = serde_json::from_str(r#"{"cv": {"seed": 3}, "kernels": ["rbf"]}"#).unwrap();
        assert_eq!(partial.kernels, vec![KernelKind::Rbf]);
        assert_eq!(partial.cv.n_folds, 5);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut c = PipelineConfig::default();
        c.cv.seed = Some(1);
        c.selection.correlation_threshold = 1.5;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let mut c = PipelineConfig::default();
        c.cv.seed = Some(1);
        c.max_features = 16;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }
}

//! Configuration, cohort files, synthetic cohorts and the CLI stages.

mod config;
mod manifest;
mod stages;
mod synth;

pub use config::{CvConfig, PathsConfig, PipelineConfig};
pub use manifest::{CohortManifest, LesionEntry};
pub use stages::{
    evaluation_dir, extract_cohort, fold_plan, load_scenario, prefiltered, read_ground_truth, report_path,
    run_evaluate, run_extract, run_report, run_select, run_synth, selection_path, summarize, summary_markdown,
    FeatureStatistics, ScenarioData, SelectionOutput, Summary, SummaryRow, SynthOutput, FEATURES_DIR, LABELS_FILE,
    PATIENTS_FILE,
};
pub use synth::{
    generate_features, generate_volumes, synthetic_column, GroundTruth, LabelTransform, PlantedTerm,
    SyntheticFeatures, SyntheticMode, SyntheticSpec, VOLUME_LATENTS,
};

//! Metrics, statistics and repeated cross-validation.

mod cv;
mod metrics;
mod stats;

pub use cv::{
    best_of, repeated_cv_evaluate, repeated_cv_sweep, BestOf, ConfidenceInterval, EvaluationReport,
    EvaluationSettings, MetricSample, Prediction, SweepRow, MAX_FEATURES, Z_95,
};
pub use metrics::{pearson_r, r_squared, rrmse, RrmseDenominator};
pub use stats::{
    cohens_d, effect_size_table, feature_label_correlations, pairwise_correlation_heatmap, vif, AbsSummary,
    CorrelationHeatmap, EffectMagnitude, EffectSizeRow, EffectSizeTable, LabelCorrelations, EFFECT_THRESHOLDS,
    VIF_CAP,
};

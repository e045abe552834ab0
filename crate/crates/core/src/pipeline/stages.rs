use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::manifest::CohortManifest;
use super::synth::{generate_features, generate_volumes, GroundTruth, SyntheticMode};
use crate::error::{Error, Result};
use crate::evaluation::{
    best_of, effect_size_table, feature_label_correlations, pairwise_correlation_heatmap, repeated_cv_sweep, vif,
    EffectSizeTable, EvaluationReport, LabelCorrelations, SweepRow,
};
use crate::features::{
    extract_blocks, read_labels_csv, write_labels_csv, Block, FeatureMatrix, LesionSample, Scenario,
};
use crate::fsutil::write_atomic;
use crate::par;
use crate::regression::KernelKind;
use crate::selection::{prefilter, select_features, Criterion, FoldPlan, SelectionResult};

pub const FEATURES_DIR: &str = "features";
pub const LABELS_FILE: &str = "labels.csv";
pub const PATIENTS_FILE: &str = "patients.csv";

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json = serde_json::to_string_pretty(value).expect("serializable output");
    json.push('\n');
    write_atomic(path, json.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn warn_feature_ratio(n_samples: usize, max_features: usize) {
    if max_features > n_samples / 4 {
        log::warn!(
            "up to {max_features} features for {n_samples} samples exceeds the recommended 1:4 feature-to-sample ratio (max {})",
            n_samples / 4
        );
    }
}

/// What `synth` wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOutput {
    pub mode: SyntheticMode,
    pub manifest: Option<PathBuf>,
    pub features_dir: Option<PathBuf>,
    pub ground_truth: PathBuf,
}

/// Generates the configured synthetic cohort under `out`.
///
/// Feature mode writes block CSVs ready for `select`/`evaluate`; volume mode
/// writes a VOL1 cohort and manifest ready for `extract`.
pub fn run_synth(cfg: &PipelineConfig, out: &Path) -> Result<SynthOutput> {
    let seed = cfg.seed()?;
    let spec = &cfg.synthetic;
    let truth_path = out.join("synthetic").join("ground_truth.json");
    match spec.mode {
        SyntheticMode::Features => {
            let s = generate_features(spec, seed)?;
            let dir = out.join(FEATURES_DIR);
            for (block, m) in &s.blocks {
                m.write_csv(&dir.join(block.file_name()))?;
            }
            let ids = spec.lesion_ids();
            write_labels_csv(&dir.join(LABELS_FILE), &ids, &s.labels)?;
            write_patients_csv(&dir.join(PATIENTS_FILE), &ids, &s.patient_ids)?;
            write_json(&truth_path, &s.truth)?;
            Ok(SynthOutput {
                mode: spec.mode,
                manifest: None,
                features_dir: Some(dir),
                ground_truth: truth_path,
            })
        }
        SyntheticMode::Volumes => {
            let (manifest, truth) = generate_volumes(spec, seed, &out.join("cohort"))?;
            write_json(&truth_path, &truth)?;
            Ok(SynthOutput {
                mode: spec.mode,
                manifest: Some(manifest),
                features_dir: None,
                ground_truth: truth_path,
            })
        }
    }
}

pub fn read_ground_truth(out: &Path) -> Result<GroundTruth> {
    read_json(&out.join("synthetic").join("ground_truth.json"))
}

fn write_patients_csv(path: &Path, ids: &[String], patients: &[String]) -> Result<()> {
    let mut s = String::from("sample_id,patient_id\n");
    for (id, p) in ids.iter().zip(patients) {
        let _ = writeln!(s, "{},{}", csv_field(id), csv_field(p));
    }
    write_atomic(path, s.as_bytes())
}

fn read_patients_csv(path: &Path) -> Result<Vec<(String, String)>> {
    let csv_err = |source| Error::Csv { path: path.into(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok((rec.get(0).unwrap_or_default().to_string(), rec.get(1).unwrap_or_default().to_string()))
        })
        .collect()
}

/// Extracts all six blocks for the manifest's cohort and writes them with the labels.
pub fn run_extract(cfg: &PipelineConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let manifest_path = cfg.manifest_path(out);
    let manifest = CohortManifest::load(&manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let cohort = manifest.load_cohort(base)?;
    extract_cohort(cfg, &cohort, &out.join(FEATURES_DIR))
}

/// Extracts and writes block CSVs, labels and patient ids for an in-memory cohort.
pub fn extract_cohort(cfg: &PipelineConfig, cohort: &[LesionSample], dir: &Path) -> Result<Vec<PathBuf>> {
    let set = extract_blocks(cohort, &cfg.extraction_config(), &Block::ALL)?;
    let mut written = Vec::new();
    for (block, m) in &set.blocks {
        let p = dir.join(block.file_name());
        m.write_csv(&p)?;
        written.push(p);
    }
    let ids: Vec<String> = cohort.iter().map(|s| s.lesion_id.clone()).collect();
    let patients: Vec<String> = cohort.iter().map(|s| s.patient_id.clone()).collect();
    let labels_path = dir.join(LABELS_FILE);
    write_labels_csv(&labels_path, &ids, &set.labels)?;
    write_patients_csv(&dir.join(PATIENTS_FILE), &ids, &patients)?;
    written.push(labels_path);
    Ok(written)
}

/// Scenario matrix, labels and optional patient ids loaded from a features directory.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub scenario: Scenario,
    pub x: FeatureMatrix,
    pub y: Vec<f64>,
    pub patients: Option<Vec<String>>,
}

fn id_mismatch(what: &str, expected: &[String], got: &[String]) -> Error {
    let offenders: Vec<String> = expected
        .iter()
        .zip(got)
        .filter(|(a, b)| a != b)
        .map(|(a, b)| format!("{a}≠{b}"))
        .take(5)
        .collect();
    Error::Data(format!(
        "{what}: sample ids differ ({} vs {} rows; first mismatches: {})",
        expected.len(),
        got.len(),
        offenders.join(", ")
    ))
}

pub fn load_scenario(dir: &Path, scenario: Scenario) -> Result<ScenarioData> {
    let blocks = scenario
        .blocks()
        .iter()
        .map(|b| FeatureMatrix::read_csv(&dir.join(b.file_name())))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&FeatureMatrix> = blocks.iter().collect();
    let x = FeatureMatrix::hconcat(&refs).map_err(|e| e.context(format!("scenario {scenario}")))?;
    let labels_path = dir.join(LABELS_FILE);
    let (ids, y) = read_labels_csv(&labels_path)?;
    if ids != x.sample_ids() {
        return Err(id_mismatch(&labels_path.display().to_string(), x.sample_ids(), &ids));
    }
    let patients_path = dir.join(PATIENTS_FILE);
    let patients = if patients_path.is_file() {
        let rows = read_patients_csv(&patients_path)?;
        let pid: Vec<String> = rows.iter().map(|r| r.0.clone()).collect();
        if pid != x.sample_ids() {
            return Err(id_mismatch(&patients_path.display().to_string(), x.sample_ids(), &pid));
        }
        Some(rows.into_iter().map(|r| r.1).collect())
    } else {
        None
    };
    Ok(ScenarioData { scenario, x, y, patients })
}

/// Outer fold plan for the configured CV, grouped by patient when requested.
pub fn fold_plan(cfg: &PipelineConfig, data: &ScenarioData) -> Result<FoldPlan> {
    let seed = cfg.seed()?;
    if cfg.cv.group_by_patient {
        let groups = data.patients.as_ref().ok_or_else(|| {
            Error::Data(format!("group_by_patient needs {PATIENTS_FILE} in the features directory"))
        })?;
        FoldPlan::grouped(groups, cfg.cv.n_folds, cfg.cv.n_repeats, seed)
    } else {
        FoldPlan::new(data.x.n_samples(), cfg.cv.n_folds, cfg.cv.n_repeats, seed)
    }
}

/// Drops low-variance and highly correlated columns.
pub fn prefiltered(cfg: &PipelineConfig, x: &FeatureMatrix) -> FeatureMatrix {
    let kept = prefilter(x, &cfg.selection_config());
    x.select_columns(&kept.retained)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutput {
    pub scenario: Scenario,
    pub criterion: Criterion,
    pub n_samples: usize,
    pub n_input_features: usize,
    pub n_prefiltered_features: usize,
    pub n_folds: usize,
    pub n_repeats: usize,
    pub seed: u64,
    pub result: SelectionResult,
}

pub fn selection_path(out: &Path, scenario: Scenario, criterion: Criterion) -> PathBuf {
    out.join("selection").join(format!("{}_{}.json", scenario.slug(), criterion))
}

fn select_one(cfg: &PipelineConfig, data: &ScenarioData, criterion: Criterion) -> Result<SelectionOutput> {
    let x = prefiltered(cfg, &data.x);
    let plan = fold_plan(cfg, data)?;
    let result = select_features(&x, &data.y, criterion, &plan, &cfg.selection_config())
        .map_err(|e| e.context(format!("scenario {} criterion {criterion}", data.scenario)))?;
    Ok(SelectionOutput {
        scenario: data.scenario,
        criterion,
        n_samples: x.n_samples(),
        n_input_features: data.x.n_features(),
        n_prefiltered_features: x.n_features(),
        n_folds: plan.n_folds,
        n_repeats: plan.n_repeats,
        seed: plan.seed,
        result,
    })
}

/// Variance filter, correlation pruning and Lasso ranking for each scenario × criterion.
pub fn run_select(
    cfg: &PipelineConfig,
    out: &Path,
    scenarios: &[Scenario],
    criteria: &[Criterion],
) -> Result<Vec<PathBuf>> {
    let dir = out.join(FEATURES_DIR);
    let mut written = Vec::new();
    for &scenario in scenarios {
        let data = load_scenario(&dir, scenario)?;
        warn_feature_ratio(data.x.n_samples(), cfg.selection.top_n);
        let outputs = par::map(cfg.execution, criteria, |&c| select_one(cfg, &data, c));
        for (o, &c) in outputs.into_iter().zip(criteria) {
            let p = selection_path(out, scenario, c);
            write_json(&p, &o?)?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Diagnostics of the features ranked on the full cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStatistics {
    pub features: Vec<String>,
    pub label_correlations: LabelCorrelations,
    pub label_correlation_summary: String,
    pub vif: Option<Vec<f64>>,
    pub pairwise_correlation_summary: String,
    pub effect_sizes: Vec<EffectSizeTable>,
}

pub fn evaluation_dir(out: &Path, scenario: Scenario, criterion: Criterion) -> PathBuf {
    out.join("evaluation").join(scenario.slug()).join(criterion.label())
}

pub fn report_path(out: &Path, scenario: Scenario, criterion: Criterion, kernel: KernelKind, n: usize) -> PathBuf {
    evaluation_dir(out, scenario, criterion)
        .join(kernel.label())
        .join(format!("n{n:02}.json"))
}

struct EvaluationJob {
    scenario: Scenario,
    criterion: Criterion,
}

struct JobOutput {
    reports: Vec<EvaluationReport>,
    heatmap_csv: String,
    effect_csv: String,
    statistics: FeatureStatistics,
}

/// Repeated-CV sweeps for each scenario × criterion over the requested kernels.
///
/// Per job this writes one report per kernel and feature count, `sweep.csv`,
/// `best_of.csv`, per-kernel scatter CSVs for the best feature count, and
/// statistics of the full-cohort ranking (`statistics.json`, `heatmap.csv`,
/// `effect_sizes.csv`).
pub fn run_evaluate(
    cfg: &PipelineConfig,
    out: &Path,
    scenarios: &[Scenario],
    criteria: &[Criterion],
    kernels: &[KernelKind],
) -> Result<Vec<PathBuf>> {
    let dir = out.join(FEATURES_DIR);
    let data: BTreeMap<Scenario, ScenarioData> = scenarios
        .iter()
        .map(|&s| load_scenario(&dir, s).map(|d| (s, d)))
        .collect::<Result<_>>()?;
    let jobs: Vec<EvaluationJob> = scenarios
        .iter()
        .flat_map(|&scenario| criteria.iter().map(move |&criterion| EvaluationJob { scenario, criterion }))
        .collect();
    if let Some(d) = data.values().next() {
        warn_feature_ratio(d.x.n_samples(), cfg.max_features);
    }
    let outputs = par::map(cfg.execution, &jobs, |job| {
        evaluate_job(cfg, &data[&job.scenario], job.criterion, kernels)
            .map_err(|e| e.context(format!("scenario {} criterion {}", job.scenario, job.criterion)))
    });
    let mut written = Vec::new();
    for (job, output) in jobs.iter().zip(outputs) {
        let output = output?;
        written.extend(write_job(out, job, &output)?);
    }
    Ok(written)
}

fn evaluate_job(cfg: &PipelineConfig, data: &ScenarioData, criterion: Criterion, kernels: &[KernelKind]) -> Result<JobOutput> {
    let x = prefiltered(cfg, &data.x);
    let plan = fold_plan(cfg, data)?;
    let settings = cfg.evaluation_settings();
    let mut reports = repeated_cv_sweep(&x, &data.y, criterion, kernels, &cfg.feature_counts(), &plan, &settings)?;
    for r in &mut reports {
        r.scenario = Some(data.scenario);
    }
    let ranking = select_features(&x, &data.y, criterion, &plan, &settings.selection)?;
    let top = ranking.top(cfg.max_features);
    let names: Vec<String> = top.iter().map(|c| c.to_string()).collect();
    let idx: Vec<usize> = top
        .iter()
        .map(|c| x.columns().iter().position(|k| k == c).expect("ranked column exists"))
        .collect();
    let xs = x.select_columns(&idx);
    let (statistics, heatmap_csv, effect_csv) = feature_statistics(cfg, xs.values().view(), &names, &data.y)?;
    Ok(JobOutput {
        reports,
        heatmap_csv,
        effect_csv,
        statistics,
    })
}

fn feature_statistics(
    cfg: &PipelineConfig,
    x: ndarray::ArrayView2<f64>,
    names: &[String],
    y: &[f64],
) -> Result<(FeatureStatistics, String, String)> {
    let label_correlations = feature_label_correlations(x, y)?;
    let vif = if x.ncols() >= 2 {
        vif(x).map_err(|e| log::warn!("VIF skipped: {e}")).ok()
    } else {
        None
    };
    let mut heatmap_csv = String::from("feature");
    for n in names {
        let _ = write!(heatmap_csv, ",{}", csv_field(n));
    }
    heatmap_csv.push('\n');
    let pairwise_correlation_summary = if x.ncols() >= 2 {
        let h = pairwise_correlation_heatmap(x)?;
        for (n, row) in names.iter().zip(&h.matrix) {
            heatmap_csv.push_str(&csv_field(n));
            for v in row {
                let _ = write!(heatmap_csv, ",{v}");
            }
            heatmap_csv.push('\n');
        }
        h.summary.to_string()
    } else {
        String::new()
    };
    let mut effect_csv = String::from("threshold,feature,cohens_d,magnitude,n_below,n_above\n");
    let mut effect_sizes = Vec::new();
    for &t in &cfg.effect_size_thresholds {
        match effect_size_table(x, names, y, t) {
            Ok(table) => {
                for r in &table.rows {
                    let _ = writeln!(
                        effect_csv,
                        "{t},{},{},{},{},{}",
                        csv_field(&r.feature),
                        r.cohens_d,
                        csv_field(r.magnitude.label()),
                        r.n_below,
                        r.n_above
                    );
                }
                effect_sizes.push(table);
            }
            Err(e) => log::warn!("effect sizes at threshold {t} skipped: {e}"),
        }
    }
    Ok((
        FeatureStatistics {
            features: names.to_vec(),
            label_correlation_summary: label_correlations.summary.to_string(),
            label_correlations,
            vif,
            pairwise_correlation_summary,
            effect_sizes,
        },
        heatmap_csv,
        effect_csv,
    ))
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("kernel,n_features,mean_r2,ci_lo,ci_hi,mean_rrmse,rrmse_ci_lo,rrmse_ci_hi\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.kernel, r.n_features, r.mean_r2, r.ci_lo, r.ci_hi, r.mean_rrmse, r.rrmse_ci_lo, r.rrmse_ci_hi
        );
    }
    s
}

fn best_of_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("kernel,best_by,n_features,r2,rrmse\n");
    for b in best_of(rows) {
        for (by, r) in [("r2", &b.best_r2), ("rrmse", &b.best_rrmse)] {
            let _ = writeln!(
                s,
                "{},{by},{},{},{}",
                b.kernel,
                r.n_features,
                r.r2_interval(),
                r.rrmse_interval()
            );
        }
    }
    s
}

fn scatter_csv(report: &EvaluationReport) -> String {
    let mut s = String::from("sample_id,actual,predicted,repeat,fold\n");
    for p in &report.predictions {
        let _ = writeln!(s, "{},{},{},{},{}", csv_field(&p.sample_id), p.actual, p.predicted, p.repeat, p.fold);
    }
    s
}

fn write_job(out: &Path, job: &EvaluationJob, o: &JobOutput) -> Result<Vec<PathBuf>> {
    let dir = evaluation_dir(out, job.scenario, job.criterion);
    let mut written = Vec::new();
    for r in &o.reports {
        let p = report_path(out, job.scenario, job.criterion, r.kernel, r.n_features);
        write_json(&p, r)?;
        written.push(p);
    }
    let rows: Vec<SweepRow> = o.reports.iter().map(SweepRow::from).collect();
    let mut files = vec![
        (dir.join("sweep.csv"), sweep_csv(&rows)),
        (dir.join("best_of.csv"), best_of_csv(&rows)),
        (dir.join("heatmap.csv"), o.heatmap_csv.clone()),
        (dir.join("effect_sizes.csv"), o.effect_csv.clone()),
    ];
    for b in best_of(&rows) {
        let report = o
            .reports
            .iter()
            .find(|r| r.kernel == b.kernel && r.n_features == b.best_r2.n_features)
            .expect("best row comes from a report");
        files.push((dir.join(format!("scatter_{}.csv", b.kernel)), scatter_csv(report)));
    }
    for (p, text) in files {
        write_atomic(&p, text.as_bytes())?;
        written.push(p);
    }
    let stats = dir.join("statistics.json");
    write_json(&stats, &o.statistics)?;
    written.push(stats);
    Ok(written)
}

/// One row of the consolidated table: a kernel's best sweep entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub criterion: Criterion,
    pub kernel: KernelKind,
    pub r2_n_features: usize,
    pub r2: String,
    pub mean_r2: f64,
    pub rrmse_n_features: usize,
    pub rrmse: String,
    pub mean_rrmse: f64,
    /// Highest R² among kernels of the same scenario and criterion.
    pub best_r2_kernel: bool,
    /// Lowest RRMSE among kernels of the same scenario and criterion.
    pub best_rrmse_kernel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_reports: usize,
    pub rows: Vec<SummaryRow>,
}

fn collect_reports(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_reports(&p, found)?;
        } else if p
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('n') && n.ends_with(".json") && n[1..n.len() - 5].parse::<usize>().is_ok())
        {
            found.push(p);
        }
    }
    Ok(())
}

/// Aggregates every evaluation report under `out` into `report/summary.{json,md}`.
pub fn run_report(out: &Path) -> Result<Summary> {
    let eval_dir = out.join("evaluation");
    let mut paths = Vec::new();
    if eval_dir.is_dir() {
        collect_reports(&eval_dir, &mut paths)?;
    }
    if paths.is_empty() {
        return Err(Error::Data(format!("no evaluation reports found under {}", eval_dir.display())));
    }
    let reports = paths.iter().map(|p| read_json::<EvaluationReport>(p)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(&reports);
    let dir = out.join("report");
    write_json(&dir.join("summary.json"), &summary)?;
    write_atomic(&dir.join("summary.md"), summary_markdown(&summary).as_bytes())?;
    Ok(summary)
}

fn scenario_name(r: &EvaluationReport) -> String {
    r.scenario.map_or_else(|| "custom".to_string(), |s| s.label())
}

/// Best sweep rows per (scenario, criterion, kernel), with best kernels flagged.
pub fn summarize(reports: &[EvaluationReport]) -> Summary {
    let order = |r: &EvaluationReport| (r.scenario.map(|s| s as usize).unwrap_or(usize::MAX), r.criterion, r.kernel);
    let mut groups: BTreeMap<(usize, Criterion, KernelKind), Vec<&EvaluationReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(order(r)).or_default().push(r);
    }
    let mut rows: Vec<SummaryRow> = groups
        .into_values()
        .map(|mut g| {
            g.sort_by_key(|r| r.n_features);
            let sweep: Vec<SweepRow> = g.iter().map(|r| SweepRow::from(*r)).collect();
            let best = best_of(&sweep).remove(0);
            SummaryRow {
                scenario: scenario_name(g[0]),
                criterion: g[0].criterion,
                kernel: g[0].kernel,
                r2_n_features: best.best_r2.n_features,
                r2: best.best_r2.r2_interval().to_string(),
                mean_r2: best.best_r2.mean_r2,
                rrmse_n_features: best.best_rrmse.n_features,
                rrmse: best.best_rrmse.rrmse_interval().to_string(),
                mean_rrmse: best.best_rrmse.mean_rrmse,
                best_r2_kernel: false,
                best_rrmse_kernel: false,
            }
        })
        .collect();
    let mut start = 0;
    while start < rows.len() {
        let end = (start..rows.len())
            .find(|&i| rows[i].scenario != rows[start].scenario || rows[i].criterion != rows[start].criterion)
            .unwrap_or(rows.len());
        let group = &rows[start..end];
        let best_r2 = (0..group.len()).fold(0, |b, i| if group[i].mean_r2 > group[b].mean_r2 { i } else { b });
        let best_rr = (0..group.len()).fold(0, |b, i| if group[i].mean_rrmse < group[b].mean_rrmse { i } else { b });
        rows[start + best_r2].best_r2_kernel = true;
        rows[start + best_rr].best_rrmse_kernel = true;
        start = end;
    }
    Summary {
        n_reports: reports.len(),
        rows,
    }
}

/// Markdown table with the best kernel per scenario and criterion in bold.
pub fn summary_markdown(summary: &Summary) -> String {
    let mut s = String::from(
        "| Scenario | Criterion | Kernel | n (R²) | R² (95% CI) | n (RRMSE) | RRMSE (95% CI) |\n|---|---|---|---|---|---|---|\n",
    );
    let bold = |text: &str, on: bool| if on { format!("**{text}**") } else { text.to_string() };
    for r in &summary.rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r.scenario,
            r.criterion,
            r.kernel,
            r.r2_n_features,
            bold(&r.r2, r.best_r2_kernel),
            r.rrmse_n_features,
            bold(&r.rrmse, r.best_rrmse_kernel)
        );
    }
    s
}

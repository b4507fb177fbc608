//! Confusion matrices, macro-averaged scores, run manifests and their
//! on-disk forms (JSON results, CSV plot data, SVG bar charts).
//!
//! Per-class precision (recall) is 0 for a class never predicted (never
//! present), and that 0 still enters the macro mean over all `k` classes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featsel::{RfeTrace, ScoreMode};
use crate::learners::ResolvedParams;

pub const MANIFEST_VERSION: u32 = 1;
pub const AVERAGING: &str = "macro";
pub const METRICS: [&str; 4] = ["accuracy", "precision_macro", "recall_macro", "f1_macro"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("y_true has {0} entries, y_pred has {1}")]
    LengthMismatch(usize, usize),
    #[error("class code {code} out of range for k = {k}")]
    CodeOutOfRange { code: usize, k: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("manifest has no model results")]
    EmptyManifest,
    #[error("malformed plot data: {0}")]
    PlotData(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.to_path_buf(), source }
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<ConfusionMatrix, ReportError> {
    if y_true.len() != y_pred.len() {
        return Err(ReportError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if let Some(&code) = [t, p].iter().find(|&&c| c >= k) {
            return Err(ReportError::CodeOutOfRange { code, k });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
}

impl ScoreSet {
    pub fn get(&self, metric: &str) -> Option<f64> {
        match metric {
            "accuracy" => Some(self.accuracy),
            "precision_macro" => Some(self.precision_macro),
            "recall_macro" => Some(self.recall_macro),
            "f1_macro" => Some(self.f1_macro),
            _ => None,
        }
    }

    fn set(&mut self, metric: &str, v: f64) -> bool {
        let slot = match metric {
            "accuracy" => &mut self.accuracy,
            "precision_macro" => &mut self.precision_macro,
            "recall_macro" => &mut self.recall_macro,
            "f1_macro" => &mut self.f1_macro,
            _ => return false,
        };
        *slot = v;
        true
    }
}

pub fn scores(cm: &ConfusionMatrix) -> Result<ScoreSet, ReportError> {
    let total = cm.total();
    if total == 0 {
        return Err(ReportError::EmptyMatrix);
    }
    let k = cm.k();
    let trace: u64 = (0..k).map(|c| cm.counts[c][c]).sum();
    let (mut p_sum, mut r_sum, mut f_sum) = (0.0, 0.0, 0.0);
    for c in 0..k {
        let tp = cm.counts[c][c] as f64;
        let predicted: u64 = (0..k).map(|r| cm.counts[r][c]).sum();
        let actual: u64 = cm.counts[c].iter().sum();
        let p = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let r = if actual > 0 { tp / actual as f64 } else { 0.0 };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        p_sum += p;
        r_sum += r;
        f_sum += f;
    }
    let kf = k as f64;
    Ok(ScoreSet {
        accuracy: trace as f64 / total as f64,
        precision_macro: p_sum / kf,
        recall_macro: r_sum / kf,
        f1_macro: f_sum / kf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: String,
    pub substitute: bool,
    pub params: ResolvedParams,
    pub scores: ScoreSet,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    /// `ddos` or `latency`.
    pub task: String,
    pub classes: Vec<String>,
    pub score_mode: ScoreMode,
    pub k_best: Vec<String>,
    pub rfe: RfeTrace,
    pub selected_features: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub train_class_counts: Vec<usize>,
    pub models: Vec<ModelResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub mode: String,
    pub leakage_warning: Option<String>,
    pub averaging: String,
    pub prng: String,
    pub master_seed: u64,
    pub stage_seeds: BTreeMap<String, u64>,
    /// Configuration as run, minus the output location.
    pub config: serde_json::Value,
    pub rows_loaded: usize,
    pub rows_after_cleaning: usize,
    pub label_counts: BTreeMap<String, usize>,
    pub tasks: Vec<TaskResult>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path).map_err(io_err(path))?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitFormats {
    pub results: bool,
    pub plot_data: bool,
    pub charts: bool,
}

impl Default for EmitFormats {
    fn default() -> Self {
        Self { results: true, plot_data: true, charts: true }
    }
}

pub const RESULTS_FILE: &str = "results.json";
pub const PLOT_DATA_FILE: &str = "plot_data.csv";

/// Writes the requested files into `dir` and returns their paths.
pub fn emit(manifest: &RunManifest, dir: &Path, formats: EmitFormats) -> Result<Vec<PathBuf>, ReportError> {
    if manifest.tasks.iter().all(|t| t.models.is_empty()) {
        return Err(ReportError::EmptyManifest);
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<(), ReportError> {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        written.push(path);
        Ok(())
    };
    if formats.results {
        put(RESULTS_FILE, manifest.to_json()?.into_bytes())?;
    }
    if formats.plot_data {
        put(PLOT_DATA_FILE, plot_data(manifest)?)?;
    }
    if formats.charts {
        for task in &manifest.tasks {
            put(&format!("chart_{}.svg", task.task), bar_chart(task).into_bytes())?;
        }
    }
    Ok(written)
}

fn plot_data(manifest: &RunManifest) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "task", "metric", "value"])?;
    for task in &manifest.tasks {
        for m in &task.models {
            for metric in METRICS {
                let v = m.scores.get(metric).expect("known metric");
                w.write_record([m.model.as_str(), task.task.as_str(), metric, &v.to_string()])?;
            }
        }
    }
    w.into_inner().map_err(|e| ReportError::PlotData(e.to_string()))
}

/// Reads plot data back into `(task, model) -> scores`.
pub fn load_plot_data(path: &Path) -> Result<BTreeMap<(String, String), ScoreSet>, ReportError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out: BTreeMap<(String, String), ScoreSet> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let [model, task, metric, value] = [0, 1, 2, 3].map(|i| rec.get(i).unwrap_or_default().to_string());
        let v: f64 = value.parse().map_err(|_| ReportError::PlotData(format!("bad value `{value}`")))?;
        let entry = out.entry((task, model)).or_insert(ScoreSet {
            accuracy: f64::NAN,
            precision_macro: f64::NAN,
            recall_macro: f64::NAN,
            f1_macro: f64::NAN,
        });
        if !entry.set(&metric, v) {
            return Err(ReportError::PlotData(format!("unknown metric `{metric}`")));
        }
    }
    Ok(out)
}

const COLOURS: [&str; 4] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52"];

/// Grouped bars: one group per model, one bar per metric.
pub fn bar_chart(task: &TaskResult) -> String {
    let (bar, gap, plot_h, left, top) = (14.0, 18.0, 300.0, 50.0, 40.0);
    let group_w = bar * METRICS.len() as f64 + gap;
    let width = left + group_w * task.models.len() as f64 + 20.0;
    let height = top + plot_h + 110.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{left:.0}" y="20" font-size="14">{} classifier comparison</text>"#, task.task);
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = top + plot_h * (1.0 - v);
        let _ = writeln!(
            s,
            r##"<line x1="{left:.0}" x2="{:.1}" y1="{y:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.0}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            width - 20.0,
            left - 4.0,
            y + 4.0
        );
    }
    for (g, m) in task.models.iter().enumerate() {
        let x0 = left + gap / 2.0 + g as f64 * group_w;
        for (b, metric) in METRICS.iter().enumerate() {
            let v = m.scores.get(metric).unwrap_or(0.0).clamp(0.0, 1.0);
            let h = plot_h * v;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{bar:.1}" height="{h:.1}" fill="{}"><title>{} {metric} {v:.4}</title></rect>"#,
                x0 + b as f64 * bar,
                top + plot_h - h,
                COLOURS[b],
                m.model
            );
        }
        let lx = x0 + bar * 2.0;
        let ly = top + plot_h + 12.0;
        let _ = writeln!(
            s,
            r#"<text x="{lx:.1}" y="{ly:.1}" transform="rotate(40 {lx:.1} {ly:.1})">{}</text>"#,
            m.model
        );
    }
    for (b, metric) in METRICS.iter().enumerate() {
        let x = left + b as f64 * 110.0;
        let y = height - 14.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.0}" y="{:.0}" width="10" height="10" fill="{}"/><text x="{:.0}" y="{y:.0}">{metric}</text>"#,
            y - 9.0,
            COLOURS[b],
            x + 14.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Label, count and share of the total, largest class first.
pub fn distribution_table(counts: &BTreeMap<String, usize>) -> String {
    let total: usize = counts.values().sum();
    let mut rows: Vec<(&String, &usize)> = counts.iter().collect();
    rows.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(5).max(5);
    let mut s = format!("{:<width$}  {:>9}  {:>9}\n", "label", "count", "share");
    for (label, &n) in rows {
        let share = if total > 0 { 100.0 * n as f64 / total as f64 } else { 0.0 };
        let _ = writeln!(s, "{label:<width$}  {n:>9}  {share:>8.4}%");
    }
    let _ = writeln!(s, "{:<width$}  {total:>9}", "total");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree::TreeParams;
    use proptest::prelude::*;

    #[test]
    fn confusion_examples() {
        let cm = confusion(&[0, 0, 1], &[0, 1, 1], 2).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 1], vec![0, 1]]);
        let cm = confusion(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(matches!(confusion(&[0], &[0, 1], 2), Err(ReportError::LengthMismatch(1, 2))));
        assert!(matches!(confusion(&[0], &[2], 2), Err(ReportError::CodeOutOfRange { code: 2, k: 2 })));
    }

    #[test]
    fn score_examples() {
        let s = scores(&ConfusionMatrix { counts: vec![vec![1, 1], vec![0, 1]] }).unwrap();
        assert_eq!(s.accuracy, 2.0 / 3.0);
        assert_eq!(s.precision_macro, 0.75);
        assert_eq!(s.recall_macro, 0.75);
        let s = scores(&ConfusionMatrix { counts: vec![vec![0, 3], vec![2, 0]] }).unwrap();
        assert_eq!((s.accuracy, s.f1_macro), (0.0, 0.0));
        let s = scores(&ConfusionMatrix { counts: vec![vec![4, 0], vec![0, 2]] }).unwrap();
        assert_eq!([s.accuracy, s.precision_macro, s.recall_macro, s.f1_macro], [1.0; 4]);
        assert!(matches!(scores(&ConfusionMatrix { counts: vec![vec![0]] }), Err(ReportError::EmptyMatrix)));
    }

    pub(crate) fn sample_manifest() -> RunManifest {
        let s = ScoreSet { accuracy: 0.74, precision_macro: 0.7, recall_macro: 0.69, f1_macro: 0.695 };
        let model = ModelResult {
            model: "random_forest".into(),
            substitute: false,
            params: ResolvedParams::DecisionTree(TreeParams::default()),
            scores: s,
            confusion: ConfusionMatrix { counts: vec![vec![3, 1], vec![0, 2]] },
        };
        RunManifest {
            version: MANIFEST_VERSION,
            mode: "default".into(),
            leakage_warning: None,
            averaging: AVERAGING.into(),
            prng: crate::seed::PRNG_NAME.into(),
            master_seed: 1,
            stage_seeds: BTreeMap::new(),
            config: serde_json::Value::Null,
            rows_loaded: 6,
            rows_after_cleaning: 6,
            label_counts: BTreeMap::new(),
            tasks: vec![TaskResult {
                task: "ddos".into(),
                classes: vec!["a".into(), "b".into()],
                score_mode: ScoreMode::FRegression,
                k_best: vec![],
                rfe: RfeTrace { iterations: vec![], survivors: vec![] },
                selected_features: vec![],
                n_train: 10,
                n_test: 6,
                train_class_counts: vec![5, 5],
                models: vec![model],
            }],
        }
    }

    #[test]
    fn emit_is_deterministic_and_round_trips() {
        let m = sample_manifest();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let fa = emit(&m, a.path(), EmitFormats::default()).unwrap();
        let fb = emit(&m, b.path(), EmitFormats::default()).unwrap();
        assert_eq!(fa.len(), 3);
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
        let csv = std::fs::read_to_string(a.path().join(PLOT_DATA_FILE)).unwrap();
        assert!(csv.lines().any(|l| l == "random_forest,ddos,accuracy,0.74"));
        let back = load_plot_data(&a.path().join(PLOT_DATA_FILE)).unwrap();
        assert_eq!(back[&("ddos".to_string(), "random_forest".to_string())], m.tasks[0].models[0].scores);
        assert_eq!(RunManifest::load(&a.path().join(RESULTS_FILE)).unwrap(), m);
    }

    #[test]
    fn empty_manifest_rejected() {
        let mut m = sample_manifest();
        m.tasks[0].models.clear();
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(emit(&m, d.path(), EmitFormats::default()), Err(ReportError::EmptyManifest)));
    }

    #[test]
    fn distribution_shares() {
        let counts = BTreeMap::from([("BENIGN".to_string(), 9946usize), ("WebDDoS".to_string(), 54)]);
        let t = distribution_table(&counts);
        assert!(t.contains("WebDDoS"));
        assert!(t.contains("0.5400%"));
        assert!(t.lines().nth(1).unwrap().starts_with("BENIGN"));
    }

    fn permuted(cm: &ConfusionMatrix, perm: &[usize]) -> ConfusionMatrix {
        let k = cm.k();
        let mut counts = vec![vec![0; k]; k];
        for i in 0..k {
            for j in 0..k {
                counts[perm[i]][perm[j]] = cm.counts[i][j];
            }
        }
        ConfusionMatrix { counts }
    }

    proptest! {
        #[test]
        fn accuracy_matches_direct_count(pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..200)) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let cm = confusion(&t, &p, 4).unwrap();
            prop_assert_eq!(cm.total(), t.len() as u64);
            let direct = t.iter().zip(&p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64;
            prop_assert_eq!(scores(&cm).unwrap().accuracy, direct);
        }

        #[test]
        fn macro_scores_invariant_under_relabeling(
            pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..200),
            perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
        ) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let cm = confusion(&t, &p, 4).unwrap();
            let a = scores(&cm).unwrap();
            let b = scores(&permuted(&cm, &perm)).unwrap();
            for m in METRICS {
                prop_assert!((a.get(m).unwrap() - b.get(m).unwrap()).abs() < 1e-12);
            }
        }
    }
}

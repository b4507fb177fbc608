//! Synthetic 5G radio telemetry and the good/bad latency-quality target.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema;
use crate::seed;
use crate::tabular::{FeatureTable, TableError};

pub const RSRP_COLUMN: &str = "5G_RSRP";
pub const RSRQ_COLUMN: &str = "5G_RSRQ";
pub const LATENCY_COLUMN: &str = "5G_Latency";
pub const LATENCY_LABEL_COLUMN: &str = "5G_Latency_Label";

pub const RSRP_RANGE_DBM: (f64, f64) = (-140.0, -44.0);
pub const RSRQ_RANGE_DB: (f64, f64) = (-19.5, -3.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AugmentError {
    #[error("missing label column `{0}`")]
    MissingLabelColumn(String),
    #[error("missing coupling column `{0}`")]
    MissingCouplingColumn(String),
    #[error("latency must be positive, got {0}")]
    NonPositiveLatency(f64),
    #[error("invalid augment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatencyQuality {
    Good,
    Bad,
}

impl LatencyQuality {
    pub fn as_str(self) -> &'static str {
        match self {
            LatencyQuality::Good => "good",
            LatencyQuality::Bad => "bad",
        }
    }
}

impl fmt::Display for LatencyQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveGTelemetry {
    pub rsrp_dbm: f64,
    pub rsrq_db: f64,
    pub latency_ms: f64,
}

impl FiveGTelemetry {
    pub fn in_range(&self) -> bool {
        (RSRP_RANGE_DBM.0..=RSRP_RANGE_DBM.1).contains(&self.rsrp_dbm)
            && (RSRQ_RANGE_DB.0..=RSRQ_RANGE_DB.1).contains(&self.rsrq_db)
            && self.latency_ms > 0.0
    }
}

/// Latency coupled to traffic intensity: `latency += gain_ms * percentile(column)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    #[serde(default = "default_coupling_column")]
    pub column: String,
    #[serde(default = "default_gain")]
    pub gain_ms: f64,
}

fn default_coupling_column() -> String {
    "Flow Packets/s".to_string()
}

fn default_gain() -> f64 {
    40.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub threshold_ms: f64,
    pub benign_latency: (f64, f64),
    pub attack_latency: (f64, f64),
    pub label_column: String,
    pub benign_label: String,
    pub coupling: Option<Coupling>,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            threshold_ms: 30.0,
            benign_latency: (5.0, 25.0),
            attack_latency: (20.0, 120.0),
            label_column: schema::LABEL_COLUMN.to_string(),
            benign_label: "BENIGN".to_string(),
            coupling: None,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        for (name, (lo, hi)) in [("benign_latency", self.benign_latency), ("attack_latency", self.attack_latency)] {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(AugmentError::InvalidConfig(format!("{name}: need 0 < low < high")));
            }
        }
        if !(self.threshold_ms > 0.0 && self.threshold_ms.is_finite()) {
            return Err(AugmentError::InvalidConfig("threshold_ms must be positive".into()));
        }
        if let Some(c) = &self.coupling {
            if !(c.gain_ms >= 0.0 && c.gain_ms.is_finite()) {
                return Err(AugmentError::InvalidConfig("coupling.gain_ms must be >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Good iff `latency_ms < threshold_ms` (strict).
pub fn quality_label(latency_ms: f64, threshold_ms: f64) -> Result<LatencyQuality, AugmentError> {
    if !(latency_ms > 0.0) {
        return Err(AugmentError::NonPositiveLatency(latency_ms));
    }
    Ok(if latency_ms < threshold_ms { LatencyQuality::Good } else { LatencyQuality::Bad })
}

/// Rank percentile in [0,1] of each entry; non-finite entries rank as 0.
fn percentiles(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n <= 1 {
        return vec![0.0; n];
    }
    let key = |v: f64| if v.is_finite() { v } else { f64::NEG_INFINITY };
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])).then(a.cmp(&b)));
    let mut out = vec![0.0; n];
    for (rank, &i) in idx.iter().enumerate() {
        out[i] = rank as f64 / (n - 1) as f64;
    }
    out
}

/// Draws telemetry for one row from its own counter-based stream.
pub fn draw_row(cfg: &AugmentConfig, row: usize, is_benign: bool, extra_ms: f64) -> FiveGTelemetry {
    let mut rng = seed::stream_rng(cfg.seed, row as u64);
    let rsrp_dbm = rng.random_range(RSRP_RANGE_DBM.0..=RSRP_RANGE_DBM.1);
    let rsrq_db = rng.random_range(RSRQ_RANGE_DB.0..=RSRQ_RANGE_DB.1);
    let (lo, hi) = if is_benign { cfg.benign_latency } else { cfg.attack_latency };
    let latency_ms = rng.random_range(lo..hi) + extra_ms;
    FiveGTelemetry { rsrp_dbm, rsrq_db, latency_ms }
}

/// Appends `5G_RSRP`, `5G_RSRQ`, `5G_Latency` and the `5G_Latency_Label` string column.
pub fn augment(table: &FeatureTable, cfg: &AugmentConfig) -> Result<FeatureTable, AugmentError> {
    cfg.validate()?;
    let labels = table
        .string_column(&cfg.label_column)
        .ok_or_else(|| AugmentError::MissingLabelColumn(cfg.label_column.clone()))?;
    let extra: Vec<f64> = match &cfg.coupling {
        None => vec![0.0; table.n_rows()],
        Some(c) => {
            let col = table
                .column(&c.column)
                .ok_or_else(|| AugmentError::MissingCouplingColumn(c.column.clone()))?;
            percentiles(col).into_iter().map(|p| p * c.gain_ms).collect()
        }
    };
    let rows: Vec<FiveGTelemetry> = (0..table.n_rows())
        .into_par_iter()
        .map(|i| draw_row(cfg, i, labels[i] == cfg.benign_label, extra[i]))
        .collect();
    let quality: Vec<String> = rows
        .iter()
        .map(|r| quality_label(r.latency_ms, cfg.threshold_ms).map(|q| q.as_str().to_string()))
        .collect::<Result<_, _>>()?;
    Ok(table
        .with_column(RSRP_COLUMN, rows.iter().map(|r| r.rsrp_dbm).collect())?
        .with_column(RSRQ_COLUMN, rows.iter().map(|r| r.rsrq_db).collect())?
        .with_column(LATENCY_COLUMN, rows.iter().map(|r| r.latency_ms).collect())?
        .with_string_column(LATENCY_LABEL_COLUMN, quality)?)
}

//! Class-conditional synthetic flow records in the CIC-DDoS2019 layout.
//!
//! Each class draws its flow-statistic columns from a Gaussian whose mean is
//! offset from a shared base by `separability * shift[class][column]` (in
//! units of the noise standard deviation), then scaled per column. At
//! separability 0 every class shares one distribution for every retained
//! feature; protocol and rate scaling are blended the same way so they do
//! not leak class identity either. Ports follow the profile: fixed web
//! ports for benign traffic, uniform ranges for attacks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{self, CIC_HEADER};
use crate::seed;
use crate::tabular::{FeatureTable, NumericColumn, StringColumn, TableError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("no profile for label `{0}`")]
    UnknownLabelProfile(String),
    #[error("invalid generator spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Label counts of the merged 13-class dataset, in the order listed there.
pub const REFERENCE_LABEL_COUNTS: [(&str, usize); 13] = [
    ("DrDoS_SSDP", 49_989),
    ("Syn", 49_983),
    ("DrDoS_SNMP", 49_975),
    ("TFTP", 49_970),
    ("DrDoS_NetBIOS", 49_969),
    ("DrDoS_UDP", 49_964),
    ("DrDoS_MSSQL", 49_964),
    ("DrDoS_LDAP", 49_961),
    ("DrDoS_DNS", 49_958),
    ("UDP-lag", 49_454),
    ("DrDoS_NTP", 49_409),
    ("BENIGN", 1_350),
    ("WebDDoS", 54),
];

pub const BENIGN: &str = "BENIGN";

const TCP: i64 = 6;
const UDP: i64 = 17;
/// Mean offset of the shared base distribution, in noise units.
const BASE_LEVEL: f64 = 8.0;
/// Standard deviation of the per-class mean shifts, in noise units.
const SHIFT_SPREAD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub label: String,
    pub protocol_code: i64,
    pub src_port_range: (u16, u16),
    pub dst_port_range: (u16, u16),
    /// When non-empty, both ports are drawn from this set instead of the ranges.
    #[serde(default)]
    pub fixed_ports: Vec<u16>,
    pub rate_scale: f64,
    pub separability: f64,
}

impl ClassProfile {
    pub fn attack(label: &str, protocol_code: i64, rate_scale: f64) -> Self {
        Self {
            label: label.to_string(),
            protocol_code,
            src_port_range: (5000, 65535),
            dst_port_range: (1, 65535),
            fixed_ports: Vec::new(),
            rate_scale,
            separability: 1.0,
        }
    }

    pub fn benign() -> Self {
        Self {
            label: BENIGN.to_string(),
            protocol_code: TCP,
            src_port_range: (80, 443),
            dst_port_range: (80, 443),
            fixed_ports: vec![80, 443],
            rate_scale: 1.0,
            separability: 1.0,
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        let ok_range = |(lo, hi): (u16, u16)| lo <= hi;
        if !ok_range(self.src_port_range) || !ok_range(self.dst_port_range) {
            return Err(GenError::Invalid(format!("{}: port range low > high", self.label)));
        }
        if !(0.0..=1.0).contains(&self.separability) {
            return Err(GenError::Invalid(format!("{}: separability outside [0,1]", self.label)));
        }
        if !(self.rate_scale > 0.0 && self.rate_scale.is_finite()) {
            return Err(GenError::Invalid(format!("{}: rate_scale must be positive", self.label)));
        }
        Ok(())
    }
}

/// Plants non-finite values into rate columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    /// Fraction of rows that receive one non-finite cell.
    pub fraction: f64,
    pub columns: Vec<String>,
}

impl Default for FaultSpec {
    fn default() -> Self {
        Self {
            fraction: 0.005,
            columns: vec!["Flow Bytes/s".to_string(), "Flow Packets/s".to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub profiles: Vec<ClassProfile>,
    pub rows_per_class: BTreeMap<String, usize>,
    /// Number of flow-statistic columns to emit, taken from the schema in order.
    pub n_features: usize,
    pub seed: u64,
    #[serde(default)]
    pub faults: Option<FaultSpec>,
}

impl GenSpec {
    /// Divides every class count by `divisor` (floor), keeping at least one row.
    pub fn scaled(&self, divisor: usize) -> Self {
        let mut out = self.clone();
        for v in out.rows_per_class.values_mut() {
            *v = (*v / divisor.max(1)).max(1);
        }
        out
    }

    pub fn with_separability(mut self, separability: f64) -> Self {
        for p in &mut self.profiles {
            p.separability = separability;
        }
        self
    }

    pub fn total_rows(&self) -> usize {
        self.rows_per_class.values().sum()
    }
}

/// Default profiles for the 13 labels.
pub fn reference_profiles() -> Vec<ClassProfile> {
    let mut v = vec![ClassProfile::benign()];
    for (label, proto, rate) in [
        ("DrDoS_SSDP", UDP, 8.0),
        ("Syn", TCP, 6.0),
        ("DrDoS_SNMP", UDP, 7.0),
        ("TFTP", UDP, 9.0),
        ("DrDoS_NetBIOS", UDP, 5.0),
        ("DrDoS_UDP", UDP, 8.0),
        ("DrDoS_MSSQL", UDP, 6.0),
        ("DrDoS_LDAP", UDP, 7.0),
        ("DrDoS_DNS", UDP, 7.0),
        ("UDP-lag", UDP, 3.0),
        ("DrDoS_NTP", UDP, 9.0),
    ] {
        v.push(ClassProfile::attack(label, proto, rate));
    }
    let mut web = ClassProfile::attack("WebDDoS", TCP, 2.0);
    web.dst_port_range = (80, 80);
    v.push(web);
    v
}

/// Generator spec reproducing the 13-class label table (550,000 rows).
pub fn reference_distribution_spec(seed: u64) -> GenSpec {
    GenSpec {
        profiles: reference_profiles(),
        rows_per_class: REFERENCE_LABEL_COUNTS.iter().map(|(l, n)| (l.to_string(), *n)).collect(),
        n_features: schema::flow_feature_columns().len(),
        seed,
        faults: None,
    }
}

/// Where non-finite values were planted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FaultLog {
    pub cells: Vec<(usize, String)>,
}

impl FaultLog {
    pub fn columns(&self) -> BTreeSet<String> {
        self.cells.iter().map(|(_, c)| c.clone()).collect()
    }

    pub fn rows(&self) -> BTreeSet<usize> {
        self.cells.iter().map(|(r, _)| *r).collect()
    }
}

pub fn generate(spec: &GenSpec) -> Result<FeatureTable, GenError> {
    generate_traced(spec).map(|(t, _)| t)
}

/// Column order of generated tables: the CIC header restricted to what is emitted.
pub fn output_order(spec: &GenSpec) -> Vec<&'static str> {
    let feats: BTreeSet<&str> =
        schema::flow_feature_columns().into_iter().take(spec.n_features).collect();
    let all_feats: BTreeSet<&str> = schema::flow_feature_columns().into_iter().collect();
    CIC_HEADER
        .iter()
        .copied()
        .filter(|c| !all_feats.contains(c) || feats.contains(c))
        .collect()
}

struct ClassBlock {
    numeric: Vec<Vec<f64>>,
    text: Vec<Vec<String>>,
    labels: Vec<String>,
    src_ports: Vec<f64>,
    dst_ports: Vec<f64>,
    protocol: Vec<f64>,
}

fn column_scale(name: &str) -> f64 {
    10f64.powi((seed::fnv1a(name.as_bytes()) % 5) as i32)
}

pub fn generate_traced(spec: &GenSpec) -> Result<(FeatureTable, FaultLog), GenError> {
    let feature_names: Vec<&str> =
        schema::flow_feature_columns().into_iter().take(spec.n_features).collect();
    if spec.n_features > schema::flow_feature_columns().len() {
        return Err(GenError::Invalid(format!(
            "n_features {} exceeds schema width {}",
            spec.n_features,
            schema::flow_feature_columns().len()
        )));
    }
    for p in &spec.profiles {
        p.validate()?;
    }
    let mut jobs = Vec::new();
    for (label, &count) in &spec.rows_per_class {
        if count == 0 {
            return Err(GenError::Invalid(format!("{label}: rows_per_class must be >= 1")));
        }
        let profile = spec
            .profiles
            .iter()
            .find(|p| &p.label == label)
            .ok_or_else(|| GenError::UnknownLabelProfile(label.clone()))?;
        jobs.push((profile, count));
    }

    let blocks: Vec<ClassBlock> = jobs
        .par_iter()
        .map(|(profile, count)| generate_class(spec.seed, profile, *count, &feature_names))
        .collect();

    let n_total: usize = blocks.iter().map(|b| b.labels.len()).sum();
    let mut numeric: Vec<Vec<f64>> = vec![Vec::with_capacity(n_total); feature_names.len()];
    let mut text: Vec<Vec<String>> = vec![Vec::with_capacity(n_total); schema::TEXT_COLUMNS.len()];
    let (mut labels, mut sp, mut dp, mut proto) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for b in blocks {
        for (dst, src) in numeric.iter_mut().zip(b.numeric) {
            dst.extend(src);
        }
        for (dst, src) in text.iter_mut().zip(b.text) {
            dst.extend(src);
        }
        labels.extend(b.labels);
        sp.extend(b.src_ports);
        dp.extend(b.dst_ports);
        proto.extend(b.protocol);
    }

    let mut log = FaultLog::default();
    if let Some(faults) = &spec.faults {
        inject_faults(spec.seed, faults, &feature_names, &mut numeric, &mut log)?;
    }

    let mut columns = vec![
        NumericColumn {
            name: schema::INDEX_COLUMN.into(),
            values: (0..n_total).map(|i| i as f64).collect(),
        },
        NumericColumn { name: schema::SOURCE_PORT.into(), values: sp },
        NumericColumn { name: schema::DESTINATION_PORT.into(), values: dp },
        NumericColumn { name: schema::PROTOCOL.into(), values: proto },
    ];
    // Keep the numeric block in header order.
    for (name, values) in feature_names.iter().zip(numeric) {
        columns.push(NumericColumn { name: name.to_string(), values });
    }
    let order = output_order(spec);
    columns.sort_by_key(|c| order.iter().position(|o| *o == c.name).unwrap_or(usize::MAX));
    let mut string_columns: Vec<StringColumn> = schema::TEXT_COLUMNS
        .iter()
        .zip(text)
        .map(|(name, values)| StringColumn { name: name.to_string(), values })
        .collect();
    string_columns.push(StringColumn { name: schema::LABEL_COLUMN.into(), values: labels });
    Ok((FeatureTable::new(columns, string_columns)?, log))
}

fn generate_class(master: u64, profile: &ClassProfile, count: usize, features: &[&str]) -> ClassBlock {
    let class_seed = seed::splitmix64(master ^ seed::fnv1a(profile.label.as_bytes()));
    let sep = profile.separability;
    let mut shift_rng = seed::stream_rng(class_seed, u64::MAX);
    let shifts: Vec<f64> = features
        .iter()
        .map(|_| SHIFT_SPREAD * shift_rng.sample::<f64, _>(StandardNormal))
        .collect();
    let rate_factor = 1.0 + sep * (profile.rate_scale - 1.0);
    let scales: Vec<f64> = features
        .iter()
        .map(|f| {
            let s = column_scale(f);
            if schema::RATE_COLUMNS.contains(f) {
                s * rate_factor
            } else {
                s
            }
        })
        .collect();
    let is_benign = profile.label == BENIGN;

    let mut numeric = vec![Vec::with_capacity(count); features.len()];
    let mut text = vec![Vec::with_capacity(count); schema::TEXT_COLUMNS.len()];
    let mut src_ports = Vec::with_capacity(count);
    let mut dst_ports = Vec::with_capacity(count);
    let mut protocol = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = seed::stream_rng(class_seed, i as u64);
        for (j, col) in numeric.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            col.push(scales[j] * (BASE_LEVEL + sep * shifts[j] + z));
        }
        let draw_port = |rng: &mut seed::Rng, range: (u16, u16)| -> u16 {
            if profile.fixed_ports.is_empty() {
                rng.random_range(range.0..=range.1)
            } else {
                profile.fixed_ports[rng.random_range(0..profile.fixed_ports.len())]
            }
        };
        let sport = draw_port(&mut rng, profile.src_port_range);
        let dport = draw_port(&mut rng, profile.dst_port_range);
        let proto = if rng.random::<f64>() < sep {
            profile.protocol_code
        } else if rng.random::<bool>() {
            TCP
        } else {
            UDP
        };
        src_ports.push(f64::from(sport));
        dst_ports.push(f64::from(dport));
        protocol.push(proto as f64);

        let src_ip = if is_benign {
            format!("192.168.50.{}", 2 + i % 250)
        } else {
            format!("172.16.0.{}", 5 + i % 8)
        };
        let dst_ip = "192.168.50.1".to_string();
        text[0].push(format!("{src_ip}-{dst_ip}-{sport}-{dport}-{proto}"));
        text[1].push(src_ip);
        text[2].push(dst_ip);
        text[3].push(format!(
            "2018-12-01 {:02}:{:02}:{:02}.{:06}",
            10 + (i / 3600) % 14,
            (i / 60) % 60,
            i % 60,
            (class_seed as usize).wrapping_add(i) % 1_000_000
        ));
        text[4].push("0".to_string());
    }
    ClassBlock {
        numeric,
        text,
        labels: vec![profile.label.clone(); count],
        src_ports,
        dst_ports,
        protocol,
    }
}

fn inject_faults(
    master: u64,
    faults: &FaultSpec,
    features: &[&str],
    numeric: &mut [Vec<f64>],
    log: &mut FaultLog,
) -> Result<(), GenError> {
    if !(0.0..=1.0).contains(&faults.fraction) {
        return Err(GenError::Invalid("fault fraction outside [0,1]".into()));
    }
    if faults.fraction == 0.0 {
        return Ok(());
    }
    let targets: Vec<usize> = faults
        .columns
        .iter()
        .map(|c| {
            features
                .iter()
                .position(|f| f == c)
                .ok_or_else(|| GenError::Invalid(format!("fault column `{c}` is not generated")))
        })
        .collect::<Result<_, _>>()?;
    if targets.is_empty() {
        return Err(GenError::Invalid("fault column list is empty".into()));
    }
    let n = numeric.first().map_or(0, Vec::len);
    let n_faulty = ((faults.fraction * n as f64).round() as usize).clamp(1, n);
    let mut rng = seed::rng(seed::derive_seed(master, "synthgen.faults"));
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    let mut chosen = rows[..n_faulty].to_vec();
    chosen.sort_unstable();
    for (k, row) in chosen.into_iter().enumerate() {
        let col = targets[k % targets.len()];
        numeric[col][row] = match rng.random_range(0..3) {
            0 => f64::INFINITY,
            1 => f64::NEG_INFINITY,
            _ => f64::NAN,
        };
        log.cells.push((row, features[col].to_string()));
    }
    Ok(())
}

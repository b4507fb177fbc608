//! SMOTE oversampling up to the majority class count.
//!
//! For each minority class, synthetic row `s` draws a base row uniformly
//! from the class, one of the base row's `k'` nearest same-class
//! neighbours (Euclidean, brute force), and `u ~ U[0,1)`, then emits
//! `x + u * (x_nn - x)`. `k' = min(k, count - 1)`; a class with a single
//! row is duplicated instead. Each synthetic row uses its own
//! counter-based stream, so output is independent of thread count.
//! Output order: all original rows verbatim, then synthetic rows by
//! ascending class code, then generation index.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;
use crate::tabular::{FeatureTable, NumericColumn, TableError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmoteError {
    #[error("class code {0} has no rows")]
    EmptyClass(usize),
    #[error("no rows to balance")]
    EmptyInput,
    #[error("non-finite value in column `{0}`")]
    NonFiniteFeature(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("interpolation weight {0} outside [0,1]")]
    InvalidWeight(f64),
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("k_neighbors must be >= 1")]
    InvalidK,
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self { k_neighbors: 5, seed: 0 }
    }
}

/// `x + u * (x_nn - x)` componentwise.
pub fn interpolate(x: &[f64], x_nn: &[f64], u: f64) -> Result<Vec<f64>, SmoteError> {
    if x.len() != x_nn.len() {
        return Err(SmoteError::DimensionMismatch(x.len(), x_nn.len()));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(SmoteError::InvalidWeight(u));
    }
    Ok(x.iter().zip(x_nn).map(|(a, b)| a + u * (b - a)).collect())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (into `rows`) of the `k` nearest other rows of each row.
/// Distance ties resolve to the lower index.
fn neighbours(rows: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    (0..rows.len())
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..rows.len())
                .filter(|&j| j != i)
                .map(|j| (sq_dist(&rows[i], &rows[j]), j))
                .collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < d.len() {
                d.select_nth_unstable_by(k - 1, cmp);
                d.truncate(k);
            }
            d.sort_by(cmp);
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Per-class counts keyed by code.
pub fn class_counts(labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for &l in labels {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

pub fn smote(
    features: &FeatureTable,
    labels: &[usize],
    cfg: &SmoteConfig,
) -> Result<(FeatureTable, Vec<usize>), SmoteError> {
    if features.n_rows() != labels.len() {
        return Err(SmoteError::LengthMismatch { features: features.n_rows(), labels: labels.len() });
    }
    if labels.is_empty() {
        return Err(SmoteError::EmptyInput);
    }
    if cfg.k_neighbors == 0 {
        return Err(SmoteError::InvalidK);
    }
    if let Some(c) = features.columns().iter().find(|c| c.values.iter().any(|v| !v.is_finite())) {
        return Err(SmoteError::NonFiniteFeature(c.name.clone()));
    }
    let counts = class_counts(labels);
    let max_code = *counts.keys().next_back().expect("non-empty");
    if let Some(missing) = (0..=max_code).find(|c| !counts.contains_key(c)) {
        return Err(SmoteError::EmptyClass(missing));
    }
    let target = *counts.values().max().expect("non-empty");

    let mut out_cols: Vec<Vec<f64>> = features.columns().iter().map(|c| c.values.clone()).collect();
    let mut out_labels = labels.to_vec();
    for (&code, &count) in &counts {
        let need = target - count;
        if need == 0 {
            continue;
        }
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == code).collect();
        let rows: Vec<Vec<f64>> = members.iter().map(|&i| features.row(i)).collect();
        let k = cfg.k_neighbors.min(count - 1);
        let nn = if k > 0 { neighbours(&rows, k) } else { Vec::new() };
        let class_seed = seed::stream_seed(cfg.seed, code as u64);
        let synthetic: Vec<Vec<f64>> = (0..need)
            .into_par_iter()
            .map(|s| {
                let mut rng = seed::stream_rng(class_seed, s as u64);
                let base = rng.random_range(0..count);
                if k == 0 {
                    return rows[base].clone();
                }
                let other = nn[base][rng.random_range(0..k)];
                let u: f64 = rng.random();
                interpolate(&rows[base], &rows[other], u).expect("same class, same width")
            })
            .collect();
        for row in synthetic {
            for (col, v) in out_cols.iter_mut().zip(row) {
                col.push(v);
            }
            out_labels.push(code);
        }
    }
    let columns = features
        .columns()
        .iter()
        .zip(out_cols)
        .map(|(c, values)| NumericColumn { name: c.name.clone(), values })
        .collect();
    Ok((FeatureTable::new(columns, Vec::new())?, out_labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn table(rows: &[Vec<f64>]) -> FeatureTable {
        let p = rows.first().map_or(0, Vec::len);
        FeatureTable::from_numeric(
            (0..p).map(|j| (format!("f{j}"), rows.iter().map(|r| r[j]).collect())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn interpolation_examples() {
        assert_eq!(interpolate(&[1.0, 2.0], &[3.0, 5.0], 0.0).unwrap(), vec![1.0, 2.0]);
        assert_eq!(interpolate(&[1.0, 2.0], &[3.0, 5.0], 1.0).unwrap(), vec![3.0, 5.0]);
        assert_eq!(interpolate(&[2.0, 0.0], &[0.0, 4.0], 0.25).unwrap(), vec![1.5, 1.0]);
        assert_eq!(interpolate(&[0.0, 0.0], &[1.0, 1.0], 0.5).unwrap(), vec![0.5, 0.5]);
        assert_eq!(interpolate(&[0.0], &[1.0, 1.0], 0.5), Err(SmoteError::DimensionMismatch(1, 2)));
        assert!(interpolate(&[0.0], &[1.0], 1.5).is_err());
    }

    #[test]
    fn minority_raised_to_majority() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..100 {
            rows.push(vec![i as f64, 0.0]);
            labels.push(0);
        }
        for i in 0..10 {
            rows.push(vec![i as f64, 50.0 + i as f64]);
            labels.push(1);
        }
        let t = table(&rows);
        let (out, y) = smote(&t, &labels, &SmoteConfig::default()).unwrap();
        assert_eq!(class_counts(&y), BTreeMap::from([(0, 100), (1, 100)]));
        assert_eq!(out.take_rows(&(0..110).collect::<Vec<_>>()), t);
    }

    #[test]
    fn balanced_input_is_untouched() {
        let t = table(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0, 1, 0, 1];
        let (out, y2) = smote(&t, &y, &SmoteConfig::default()).unwrap();
        assert_eq!(out, t);
        assert_eq!(y2, y);
    }

    #[test]
    fn singleton_class_duplicates() {
        let t = table(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![7.0, 9.0]]);
        let (out, y) = smote(&t, &[0, 0, 0, 1], &SmoteConfig::default()).unwrap();
        assert_eq!(y, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(out.row(4), vec![7.0, 9.0]);
        assert_eq!(out.row(5), vec![7.0, 9.0]);
    }

    #[test]
    fn two_point_class_stays_on_segment() {
        let mut rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let mut y = vec![1, 1];
        for i in 0..8 {
            rows.push(vec![10.0 + i as f64, -3.0]);
            y.push(0);
        }
        let (out, y2) = smote(&table(&rows), &y, &SmoteConfig { k_neighbors: 5, seed: 9 }).unwrap();
        for i in 10..out.n_rows() {
            assert_eq!(y2[i], 1);
            let r = out.row(i);
            assert_eq!(r[0], r[1]);
            assert!((0.0..=1.0).contains(&r[0]));
        }
    }

    #[test]
    fn errors() {
        let t = table(&[vec![0.0], vec![f64::NAN]]);
        assert!(matches!(smote(&t, &[0, 1], &SmoteConfig::default()), Err(SmoteError::NonFiniteFeature(_))));
        let t = table(&[vec![0.0], vec![1.0]]);
        assert_eq!(smote(&t, &[0, 2], &SmoteConfig::default()), Err(SmoteError::EmptyClass(1)));
        assert_eq!(smote(&t, &[0, 1], &SmoteConfig { k_neighbors: 0, seed: 0 }), Err(SmoteError::InvalidK));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn histogram_uniform_and_points_in_box(
            counts in proptest::collection::vec(1usize..30, 2..5),
            seed in any::<u64>(),
        ) {
            let mut rng = crate::seed::rng(seed);
            let mut rows = Vec::new();
            let mut y = Vec::new();
            for (c, &n) in counts.iter().enumerate() {
                for _ in 0..n {
                    rows.push(vec![rng.random_range(-5.0..5.0) + c as f64, rng.random_range(0.0..1.0)]);
                    y.push(c);
                }
            }
            let t = table(&rows);
            let (out, y2) = smote(&t, &y, &SmoteConfig { k_neighbors: 5, seed }).unwrap();
            let max = *counts.iter().max().unwrap();
            for (_, n) in class_counts(&y2) {
                prop_assert_eq!(n, max);
            }
            for i in 0..rows.len() {
                prop_assert_eq!(out.row(i), rows[i].clone());
            }
            for i in rows.len()..out.n_rows() {
                let r = out.row(i);
                for j in 0..2 {
                    let (lo, hi) = (0..rows.len()).filter(|&m| y[m] == y2[i])
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(rows[m][j]), hi.max(rows[m][j])));
                    prop_assert!(r[j] >= lo && r[j] <= hi);
                }
            }
        }
    }
}

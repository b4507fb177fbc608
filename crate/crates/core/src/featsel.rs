//! Univariate K-best by F statistic, then recursive feature elimination
//! ranked by a regression tree's impurity-decrease importances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::tree::{Tree, TreeParams};
use crate::tabular::FeatureTable;

/// Stand-in for an infinite F statistic when the correlation is perfect.
pub const F_CAP: f64 = 1e30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatSelError {
    #[error("non-finite value in `{0}`")]
    NonFiniteInput(String),
    #[error("target has {target} rows, features have {features}")]
    LengthMismatch { features: usize, target: usize },
    #[error("k = {k} exceeds the {available} available features")]
    KTooLarge { k: usize, available: usize },
    #[error("final count {count} is not in 1..={available}")]
    CountTooLarge { count: usize, available: usize },
    #[error("tree is not fitted")]
    UnfittedModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Pearson correlation against the class code treated as a real target.
    #[default]
    FRegression,
    /// One-way ANOVA F across the class codes.
    AnovaF,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FScore {
    pub feature: String,
    pub r: f64,
    pub f_stat: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeTrace {
    /// `(eliminated feature, its importance when eliminated)`, in order.
    pub iterations: Vec<(String, f64)>,
    /// Surviving features in original column order.
    pub survivors: Vec<String>,
}

/// `r^2 / (1 - r^2) * (n - 2)`, with perfect correlation mapped to [`F_CAP`].
pub fn f_from_r(r: f64, n: usize) -> f64 {
    let r2 = r * r;
    let dof = n.saturating_sub(2) as f64;
    if dof == 0.0 || r2 == 0.0 {
        return 0.0;
    }
    if 1.0 - r2 <= 1e-15 {
        return F_CAP;
    }
    (r2 / (1.0 - r2) * dof).min(F_CAP)
}

/// Pearson correlation; `0.0` when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

fn check_inputs(features: &FeatureTable, target: &[f64]) -> Result<(), FeatSelError> {
    if features.n_rows() != target.len() {
        return Err(FeatSelError::LengthMismatch { features: features.n_rows(), target: target.len() });
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(FeatSelError::NonFiniteInput("<target>".into()));
    }
    if let Some(c) = features.columns().iter().find(|c| c.values.iter().any(|v| !v.is_finite())) {
        return Err(FeatSelError::NonFiniteInput(c.name.clone()));
    }
    Ok(())
}

pub fn f_regression_scores(features: &FeatureTable, target: &[f64]) -> Result<Vec<FScore>, FeatSelError> {
    check_inputs(features, target)?;
    let n = target.len();
    Ok(features
        .columns()
        .par_iter()
        .map(|c| {
            let r = pearson(&c.values, target);
            FScore { feature: c.name.clone(), r, f_stat: f_from_r(r, n), selected: false }
        })
        .collect())
}

/// One-way ANOVA F of each feature across integer class codes. `r` holds
/// the correlation ratio (eta), which is what the F is monotone in.
pub fn anova_f_scores(features: &FeatureTable, classes: &[usize]) -> Result<Vec<FScore>, FeatSelError> {
    let target: Vec<f64> = classes.iter().map(|&c| c as f64).collect();
    check_inputs(features, &target)?;
    let k = classes.iter().copied().max().map_or(0, |m| m + 1);
    let n = classes.len();
    Ok(features
        .columns()
        .par_iter()
        .map(|c| {
            let mean = c.values.iter().sum::<f64>() / n as f64;
            let mut sums = vec![0.0; k];
            let mut counts = vec![0usize; k];
            for (v, &g) in c.values.iter().zip(classes) {
                sums[g] += v;
                counts[g] += 1;
            }
            let groups = counts.iter().filter(|&&m| m > 0).count();
            let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &m)| s / m.max(1) as f64).collect();
            let ssb: f64 = means.iter().zip(&counts).map(|(m, &cnt)| cnt as f64 * (m - mean).powi(2)).sum();
            let ssw: f64 = c.values.iter().zip(classes).map(|(v, &g)| (v - means[g]).powi(2)).sum();
            let sst = ssb + ssw;
            let eta = if sst > 0.0 { (ssb / sst).sqrt() } else { 0.0 };
            let f = if groups < 2 || n <= groups || ssb == 0.0 {
                0.0
            } else if ssw == 0.0 {
                F_CAP
            } else {
                ((ssb / (groups - 1) as f64) / (ssw / (n - groups) as f64)).min(F_CAP)
            };
            FScore { feature: c.name.clone(), r: eta, f_stat: f, selected: false }
        })
        .collect())
}

/// Names of the `k` highest-F features, in original column order. Equal
/// F values favour the earlier column.
pub fn select_k_best(scores: &[FScore], k: usize) -> Result<Vec<String>, FeatSelError> {
    if k > scores.len() {
        return Err(FeatSelError::KTooLarge { k, available: scores.len() });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].f_stat.total_cmp(&scores[a].f_stat).then(a.cmp(&b)));
    let mut keep = order[..k].to_vec();
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| scores[i].feature.clone()).collect())
}

/// Sets `selected` on the scores named in `chosen`.
pub fn mark_selected(scores: &mut [FScore], chosen: &[String]) {
    for s in scores {
        s.selected = chosen.contains(&s.feature);
    }
}

/// Ranker used by RFE unless the caller supplies another.
pub fn default_ranker() -> TreeParams {
    TreeParams { max_depth: 8, min_samples_leaf: 5, max_features: None, random_thresholds: false }
}

pub fn tree_importance(tree: &Tree, n_features: usize) -> Result<Vec<f64>, FeatSelError> {
    let mut imp = tree.importances().ok_or(FeatSelError::UnfittedModel)?;
    imp.resize(n_features, 0.0);
    Ok(imp)
}

/// Removes one feature per round until `final_count` remain.
pub fn rfe(
    features: &FeatureTable,
    target: &[f64],
    final_count: usize,
    ranker: &TreeParams,
) -> Result<RfeTrace, FeatSelError> {
    check_inputs(features, target)?;
    let p = features.n_columns();
    if final_count == 0 || final_count > p {
        return Err(FeatSelError::CountTooLarge { count: final_count, available: p });
    }
    let all: Vec<Vec<f64>> = features.columns().iter().map(|c| c.values.clone()).collect();
    let names = features.column_names();
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut iterations = Vec::with_capacity(p - final_count);
    while remaining.len() > final_count {
        let cols: Vec<Vec<f64>> = remaining.iter().map(|&j| all[j].clone()).collect();
        let tree = Tree::fit_regressor(&cols, target, ranker);
        let imp = tree_importance(&tree, cols.len())?;
        let mut worst = 0;
        for (i, v) in imp.iter().enumerate() {
            if *v < imp[worst] {
                worst = i;
            }
        }
        iterations.push((names[remaining[worst]].clone(), imp[worst]));
        remaining.remove(worst);
    }
    Ok(RfeTrace { iterations, survivors: remaining.into_iter().map(|j| names[j].clone()).collect() })
}

/// Both stages together, as run by the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub mode: ScoreMode,
    pub scores: Vec<FScore>,
    pub k_best: Vec<String>,
    pub rfe: RfeTrace,
}

pub fn select(
    features: &FeatureTable,
    classes: &[usize],
    k_best: usize,
    final_count: usize,
    mode: ScoreMode,
    ranker: &TreeParams,
) -> Result<Selection, FeatSelError> {
    let target: Vec<f64> = classes.iter().map(|&c| c as f64).collect();
    let mut scores = match mode {
        ScoreMode::FRegression => f_regression_scores(features, &target)?,
        ScoreMode::AnovaF => anova_f_scores(features, classes)?,
    };
    let k_names = select_k_best(&scores, k_best)?;
    mark_selected(&mut scores, &k_names);
    let projected = features.select_columns(&k_names).expect("names come from the table");
    let trace = rfe(&projected, &target, final_count, ranker)?;
    Ok(Selection { mode, scores, k_best: k_names, rfe: trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn table(cols: Vec<Vec<f64>>) -> FeatureTable {
        FeatureTable::from_numeric(cols.into_iter().enumerate().map(|(j, v)| (format!("f{j}"), v)).collect()).unwrap()
    }

    #[test]
    fn small_example_matches_hand_values() {
        // mean x 2, mean y 7/3; sxy = 3, sxx = 2, syy = 14/3; r = 3 / sqrt(28/3)
        let s = f_regression_scores(&table(vec![vec![1.0, 2.0, 3.0]]), &[1.0, 2.0, 4.0]).unwrap();
        let r = 3.0 / (28.0f64 / 3.0).sqrt();
        assert!((s[0].r - r).abs() < 1e-12);
        assert!((s[0].r - 0.98198).abs() < 1e-5);
        assert!((s[0].f_stat - 27.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_scores() {
        let s = f_regression_scores(&table(vec![vec![4.0; 5]]), &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((s[0].r, s[0].f_stat), (0.0, 0.0));
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let s = f_regression_scores(&table(vec![x]), &y).unwrap();
        assert_eq!(s[0].f_stat, F_CAP);
        let bad = table(vec![vec![1.0, f64::NAN]]);
        assert!(matches!(f_regression_scores(&bad, &[0.0, 1.0]), Err(FeatSelError::NonFiniteInput(_))));
    }

    fn fs(fstats: &[f64]) -> Vec<FScore> {
        fstats
            .iter()
            .enumerate()
            .map(|(i, &f)| FScore { feature: format!("f{}", i + 1), r: 0.0, f_stat: f, selected: false })
            .collect()
    }

    #[test]
    fn k_best_examples() {
        assert_eq!(select_k_best(&fs(&[5.0, 1.0, 9.0]), 2).unwrap(), vec!["f1", "f3"]);
        assert_eq!(select_k_best(&fs(&[5.0, 1.0, 9.0]), 3).unwrap().len(), 3);
        assert_eq!(select_k_best(&fs(&[2.0, 2.0, 2.0]), 1).unwrap(), vec!["f1"]);
        assert_eq!(select_k_best(&fs(&[1.0]), 2), Err(FeatSelError::KTooLarge { k: 2, available: 1 }));
    }

    fn planted(seed: u64, n: usize, p: usize) -> (FeatureTable, Vec<usize>) {
        let mut rng = crate::seed::rng(seed);
        let y: Vec<usize> = (0..n).map(|i| i % 4).collect();
        let cols = (0..p)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let z: f64 = rng.sample(StandardNormal);
                        if j == 0 { y[i] as f64 + 0.5 * z } else { z }
                    })
                    .collect()
            })
            .collect();
        (table(cols), y)
    }

    #[test]
    fn planted_feature_in_k_best() {
        let mut hits = 0;
        for seed in 0..100 {
            let (t, y) = planted(seed, 200, 40);
            let target: Vec<f64> = y.iter().map(|&c| c as f64).collect();
            let k = select_k_best(&f_regression_scores(&t, &target).unwrap(), 10).unwrap();
            hits += k.contains(&"f0".to_string()) as usize;
        }
        assert!(hits >= 99, "{hits}");
    }

    #[test]
    fn rfe_examples() {
        let (t, y) = planted(3, 200, 8);
        let target: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let none = rfe(&t, &target, 8, &default_ranker()).unwrap();
        assert!(none.iterations.is_empty());
        assert_eq!(none.survivors, t.column_names());
        let tr = rfe(&t, &target, 3, &default_ranker()).unwrap();
        assert_eq!(tr.iterations.len(), 5);
        assert_eq!(tr.survivors.len(), 3);
        assert!(tr.survivors.contains(&"f0".to_string()));
        let mut all: Vec<String> = tr.iterations.iter().map(|(n, _)| n.clone()).chain(tr.survivors.clone()).collect();
        all.sort();
        assert_eq!(all, t.column_names());
        assert_eq!(tr, rfe(&t, &target, 3, &default_ranker()).unwrap());
        assert!(matches!(rfe(&t, &target, 9, &default_ranker()), Err(FeatSelError::CountTooLarge { .. })));
    }

    #[test]
    fn rfe_keeps_copied_feature() {
        let mut rng = crate::seed::rng(17);
        let cols: Vec<Vec<f64>> = (0..6).map(|_| (0..150).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let target: Vec<f64> = cols[4].iter().map(|v| v + 1e-6 * rng.random_range(-1.0..1.0)).collect();
        let tr = rfe(&table(cols), &target, 1, &default_ranker()).unwrap();
        assert_eq!(tr.survivors, vec!["f4"]);
    }

    #[test]
    fn unfitted_tree_importance() {
        let t = Tree { nodes: Vec::new(), n_features: 3 };
        assert_eq!(tree_importance(&t, 3), Err(FeatSelError::UnfittedModel));
    }

    #[test]
    fn anova_ranks_planted_feature_first() {
        let (t, y) = planted(5, 200, 5);
        let s = anova_f_scores(&t, &y).unwrap();
        assert_eq!(select_k_best(&s, 1).unwrap(), vec!["f0"]);
    }

    proptest! {
        #[test]
        fn f_monotone_in_abs_r(a in 0.001f64..0.999, b in 0.001f64..0.999, n in 3usize..500) {
            if a < b {
                prop_assert!(f_from_r(a, n) < f_from_r(-b, n));
            }
        }

        #[test]
        fn k_best_invariant_under_affine_rescale(
            seed in any::<u64>(), scale in 0.01f64..100.0, shift in -50.0f64..50.0, col in 0usize..6,
        ) {
            let (t, y) = planted(seed, 60, 6);
            let target: Vec<f64> = y.iter().map(|&c| c as f64).collect();
            let before = select_k_best(&f_regression_scores(&t, &target).unwrap(), 3).unwrap();
            let name = format!("f{col}");
            let moved: Vec<f64> = t.column(&name).unwrap().iter().map(|v| scale * v + shift).collect();
            let t2 = t.replace_column(&name, moved).unwrap();
            let s1 = f_regression_scores(&t, &target).unwrap();
            let s2 = f_regression_scores(&t2, &target).unwrap();
            prop_assert!((s1[col].r - s2[col].r).abs() < 1e-9);
            // Exact ties are impossible on continuous data, so the chosen set is stable
            // unless two F values land within rounding of each other.
            let after = select_k_best(&s2, 3).unwrap();
            let mut f: Vec<f64> = s1.iter().map(|s| s.f_stat).collect();
            f.sort_by(|a, b| b.total_cmp(a));
            if (f[2] - f[3]).abs() > 1e-6 * f[2].max(1e-12) {
                prop_assert_eq!(before, after);
            }
        }
    }
}

//! Multiclass AdaBoost (SAMME) over shallow Gini trees (default depth 2;
//! `max_depth = 1` gives classic stumps).
//!
//! Round weight: `alpha = lr * (ln((1 - err) / err) + ln(K - 1))`;
//! misclassified sample weights are multiplied by `exp(alpha)` and the
//! weights renormalized. Boosting stops early on a perfect stump or when
//! the weighted error reaches the chance level `1 - 1/K`.

use serde::{Deserialize, Serialize};

use super::matrix::{argmax, softmax_in_place};
use super::tree::{Tree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// Depth of each base tree.
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<Tree>,
    pub alphas: Vec<f64>,
    /// Weighted training error of each kept stump.
    pub errors: Vec<f64>,
    pub n_classes: usize,
}

pub fn samme_alpha(err: f64, n_classes: usize, learning_rate: f64) -> f64 {
    learning_rate * (((1.0 - err) / err).ln() + ((n_classes - 1) as f64).ln())
}

impl AdaBoost {
    pub fn fit(columns: &[Vec<f64>], y: &[usize], n_classes: usize, params: &AdaBoostParams) -> Self {
        let n = y.len();
        let stump_params = TreeParams { max_depth: params.max_depth, min_samples_leaf: 1, ..Default::default() };
        let mut w = vec![1.0 / n as f64; n];
        let mut model = Self { stumps: Vec::new(), alphas: Vec::new(), errors: Vec::new(), n_classes };
        let chance = 1.0 - 1.0 / n_classes as f64;
        let mut row = vec![0.0; columns.len()];
        for round in 0..params.n_rounds {
            let mut samples: Vec<usize> = (0..n).collect();
            let stump = Tree::fit_classifier(columns, y, &w, n_classes, &mut samples, &stump_params, None);
            let miss: Vec<bool> = (0..n)
                .map(|i| {
                    for (j, c) in columns.iter().enumerate() {
                        row[j] = c[i];
                    }
                    argmax(stump.leaf_value(&row)) != y[i]
                })
                .collect();
            let total: f64 = w.iter().sum();
            let err: f64 = w.iter().zip(&miss).filter(|(_, m)| **m).map(|(wi, _)| wi).sum::<f64>() / total;
            if err <= 0.0 {
                model.stumps.push(stump);
                model.alphas.push(1.0);
                model.errors.push(0.0);
                break;
            }
            if err >= chance {
                if round == 0 {
                    // Nothing better than chance is available; keep one stump so predict works.
                    model.stumps.push(stump);
                    model.alphas.push(1.0);
                    model.errors.push(err);
                }
                break;
            }
            let alpha = samme_alpha(err, n_classes, params.learning_rate);
            let scale = alpha.exp();
            for (wi, m) in w.iter_mut().zip(&miss) {
                if *m {
                    *wi *= scale;
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            model.stumps.push(stump);
            model.alphas.push(alpha);
            model.errors.push(err);
        }
        model
    }

    /// Softmax of the alpha-weighted class votes.
    pub fn proba_row(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (s, a) in self.stumps.iter().zip(&self.alphas) {
            out[argmax(s.leaf_value(x))] += a;
        }
        softmax_in_place(out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_round_alpha_matches_hand_trace() {
        // x = 0,1,2,3 ; y = 0,0,1,0. Best Gini stump: x <= 1.5, right leaf
        // ties 1:1 and predicts class 0, so only x=2 is wrong: err = 0.25.
        let cols = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let y = [0, 0, 1, 0];
        let m = AdaBoost::fit(&cols, &y, 2, &AdaBoostParams { n_rounds: 1, learning_rate: 1.0, max_depth: 1 });
        assert_eq!(m.errors[0], 0.25);
        let expected = 3f64.ln() + 1f64.ln();
        assert!((m.alphas[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn perfect_stump_stops_early() {
        let cols = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let y = [0, 0, 1, 1];
        let m = AdaBoost::fit(&cols, &y, 2, &AdaBoostParams { n_rounds: 10, learning_rate: 1.0, max_depth: 1 });
        assert_eq!(m.stumps.len(), 1);
        let mut p = [0.0; 2];
        m.proba_row(&[3.0], &mut p);
        assert!(p[1] > p[0]);
    }
}

use serde::{Deserialize, Serialize};

use super::matrix::{softmax_in_place, Matrix};

/// Gaussian naive Bayes. Every variance gets `var_smoothing * max_variance`
/// added (at least 1e-12) so constant features stay finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, var_smoothing: f64) -> Self {
        let p = x.cols();
        let mut counts = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; p]; n_classes];
        for (i, &c) in y.iter().enumerate() {
            counts[c] += 1;
            for (m, v) in means[c].iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for (m, &n) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= n.max(1) as f64);
        }
        let mut variances = vec![vec![0.0; p]; n_classes];
        for (i, &c) in y.iter().enumerate() {
            for ((s, v), m) in variances[c].iter_mut().zip(x.row(i)).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, &n) in variances.iter_mut().zip(&counts) {
            s.iter_mut().for_each(|v| *v /= n.max(1) as f64);
        }
        // Smoothing relative to the largest overall feature variance.
        let n = x.rows() as f64;
        let max_var = (0..p)
            .map(|j| {
                let mean = (0..x.rows()).map(|i| x.get(i, j)).sum::<f64>() / n;
                (0..x.rows()).map(|i| (x.get(i, j) - mean).powi(2)).sum::<f64>() / n
            })
            .fold(0.0, f64::max);
        let eps = (var_smoothing * max_var).max(1e-12);
        variances.iter_mut().flatten().for_each(|v| *v += eps);
        let log_prior = counts.iter().map(|&c| (c as f64 / n).ln()).collect();
        Self { log_prior, means, variances }
    }

    pub fn proba_row(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut ll = self.log_prior[k];
            for ((v, m), s2) in x.iter().zip(&self.means[k]).zip(&self.variances[k]) {
                ll -= 0.5 * ((2.0 * std::f64::consts::PI * s2).ln() + (v - m) * (v - m) / s2);
            }
            *o = ll;
        }
        softmax_in_place(out);
    }
}

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;

/// Brute-force Euclidean k-nearest-neighbours with vote-fraction scores.
/// Distance ties resolve to the lower training index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub train: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, k: usize) -> Self {
        Self { k, train: x.clone(), labels: y.to_vec(), n_classes }
    }

    pub fn proba_row(&self, x: &[f64], out: &mut [f64]) {
        let n = self.train.rows();
        let k = self.k.min(n);
        let mut d: Vec<(f64, usize)> = (0..n)
            .map(|i| {
                let r = self.train.row(i);
                let s: f64 = r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < n {
            d.select_nth_unstable_by(k - 1, cmp);
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(_, i) in &d[..k] {
            out[self.labels[i]] += 1.0;
        }
        out.iter_mut().for_each(|v| *v /= k as f64);
    }
}

use serde::{Deserialize, Serialize};

use super::matrix::{softmax_in_place, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub n_iterations: usize,
    pub l2: f64,
}

/// Multinomial softmax regression trained by full-batch gradient descent on
/// mean cross-entropy plus `l2/2 * ||W||^2` (bias unpenalized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    /// `n_classes x n_features`, row-major.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Logistic {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &LogisticParams) -> Self {
        let (n, p) = (x.rows(), x.cols());
        let mut model = Self { weights: Matrix::zeros(n_classes, p), bias: vec![0.0; n_classes] };
        let mut gw = Matrix::zeros(n_classes, p);
        let mut gb = vec![0.0; n_classes];
        let mut z = vec![0.0; n_classes];
        for _ in 0..params.n_iterations {
            gw.as_mut_slice().iter_mut().for_each(|v| *v = 0.0);
            gb.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                let row = x.row(i);
                model.logits(row, &mut z);
                softmax_in_place(&mut z);
                z[y[i]] -= 1.0;
                for (k, dk) in z.iter().enumerate() {
                    gb[k] += dk;
                    for (g, v) in gw.row_mut(k).iter_mut().zip(row) {
                        *g += dk * v;
                    }
                }
            }
            let inv = 1.0 / n as f64;
            for (w, g) in model.weights.as_mut_slice().iter_mut().zip(gw.as_slice()) {
                *w -= params.learning_rate * (g * inv + params.l2 * *w);
            }
            for (b, g) in model.bias.iter_mut().zip(&gb) {
                *b -= params.learning_rate * g * inv;
            }
        }
        model
    }

    fn logits(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.bias[k] + self.weights.row(k).iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    pub fn proba_row(&self, x: &[f64], out: &mut [f64]) {
        self.logits(x, out);
        softmax_in_place(out);
    }
}

//! One-hidden-layer ReLU network with a softmax output, trained on mean
//! cross-entropy (plus `l2/2 * ||W||^2` on both weight matrices) with Adam.
//!
//! Parameters live in one flat vector: `W1 (hidden x in)`, `b1`,
//! `W2 (out x hidden)`, `b2`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{softmax_in_place, Matrix};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    pub l2: f64,
    pub params: Vec<f64>,
}

struct Layout {
    w1: std::ops::Range<usize>,
    b1: std::ops::Range<usize>,
    w2: std::ops::Range<usize>,
    b2: std::ops::Range<usize>,
}

impl Mlp {
    fn layout(&self) -> Layout {
        let w1 = 0..self.n_hidden * self.n_in;
        let b1 = w1.end..w1.end + self.n_hidden;
        let w2 = b1.end..b1.end + self.n_out * self.n_hidden;
        let b2 = w2.end..w2.end + self.n_out;
        Layout { w1, b1, w2, b2 }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(n_in: usize, n_hidden: usize, n_out: usize, l2: f64, rng: &mut seed::Rng) -> Self {
        let mut m = Self { n_in, n_hidden, n_out, l2, params: Vec::new() };
        let l = m.layout();
        m.params = vec![0.0; l.b2.end];
        let b_in = (6.0 / (n_in + n_hidden) as f64).sqrt();
        let b_out = (6.0 / (n_hidden + n_out) as f64).sqrt();
        for v in &mut m.params[l.w1] {
            *v = rng.random_range(-b_in..b_in);
        }
        for v in &mut m.params[l.w2] {
            *v = rng.random_range(-b_out..b_out);
        }
        m
    }

    fn forward(&self, x: &[f64], hidden_pre: &mut [f64], hidden: &mut [f64], out: &mut [f64]) {
        let l = self.layout();
        let (w1, b1) = (&self.params[l.w1], &self.params[l.b1]);
        let (w2, b2) = (&self.params[l.w2], &self.params[l.b2]);
        for j in 0..self.n_hidden {
            let row = &w1[j * self.n_in..(j + 1) * self.n_in];
            let a = b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            hidden_pre[j] = a;
            hidden[j] = a.max(0.0);
        }
        for k in 0..self.n_out {
            let row = &w2[k * self.n_hidden..(k + 1) * self.n_hidden];
            out[k] = b2[k] + row.iter().zip(hidden.iter()).map(|(w, h)| w * h).sum::<f64>();
        }
        softmax_in_place(out);
    }

    /// Mean cross-entropy (with the L2 term) over `rows` and its gradient
    /// with respect to the flat parameter vector.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[usize], rows: &[usize]) -> (f64, Vec<f64>) {
        let l = self.layout();
        let mut grad = vec![0.0; self.params.len()];
        let mut pre = vec![0.0; self.n_hidden];
        let mut hid = vec![0.0; self.n_hidden];
        let mut p = vec![0.0; self.n_out];
        let mut dh = vec![0.0; self.n_hidden];
        let inv = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            let xi = x.row(i);
            self.forward(xi, &mut pre, &mut hid, &mut p);
            loss -= p[y[i]].max(f64::MIN_POSITIVE).ln() * inv;
            p[y[i]] -= 1.0;
            dh.iter_mut().for_each(|v| *v = 0.0);
            {
                let w2 = &self.params[l.w2.clone()];
                for k in 0..self.n_out {
                    let dz = p[k] * inv;
                    grad[l.b2.start + k] += dz;
                    let off = l.w2.start + k * self.n_hidden;
                    for j in 0..self.n_hidden {
                        grad[off + j] += dz * hid[j];
                        dh[j] += dz * w2[k * self.n_hidden + j];
                    }
                }
            }
            for j in 0..self.n_hidden {
                if pre[j] <= 0.0 {
                    continue;
                }
                let da = dh[j];
                grad[l.b1.start + j] += da;
                let off = l.w1.start + j * self.n_in;
                for (g, v) in grad[off..off + self.n_in].iter_mut().zip(xi) {
                    *g += da * v;
                }
            }
        }
        if self.l2 > 0.0 {
            for r in [l.w1, l.w2] {
                for idx in r {
                    let w = self.params[idx];
                    loss += 0.5 * self.l2 * w * w;
                    grad[idx] += self.l2 * w;
                }
            }
        }
        (loss, grad)
    }

    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, params: &MlpParams, seed: u64) -> Self {
        let mut init_rng = seed::stream_rng(seed, u64::MAX);
        let mut m = Self::init(x.cols(), params.hidden, n_classes, params.l2, &mut init_rng);
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let mut mom = vec![0.0; m.params.len()];
        let mut vel = vec![0.0; m.params.len()];
        let mut step = 0i32;
        let mut order: Vec<usize> = (0..x.rows()).collect();
        for epoch in 0..params.epochs {
            order.shuffle(&mut seed::stream_rng(seed, epoch as u64));
            for batch in order.chunks(params.batch_size.max(1)) {
                let (_, g) = m.loss_and_gradient(x, y, batch);
                step += 1;
                let c1 = 1.0 - b1.powi(step);
                let c2 = 1.0 - b2.powi(step);
                for ((w, gi), (mi, vi)) in m.params.iter_mut().zip(&g).zip(mom.iter_mut().zip(vel.iter_mut())) {
                    *mi = b1 * *mi + (1.0 - b1) * gi;
                    *vi = b2 * *vi + (1.0 - b2) * gi * gi;
                    *w -= params.learning_rate * (*mi / c1) / ((*vi / c2).sqrt() + eps);
                }
            }
        }
        m
    }

    pub fn proba_row(&self, x: &[f64], out: &mut [f64]) {
        let mut pre = vec![0.0; self.n_hidden];
        let mut hid = vec![0.0; self.n_hidden];
        self.forward(x, &mut pre, &mut hid, out);
    }
}

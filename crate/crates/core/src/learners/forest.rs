//! Bagged tree ensembles: random forests and extremely randomized trees.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::argmax;
use super::tree::{Tree, TreeParams};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
}

impl Forest {
    pub fn fit(columns: &[Vec<f64>], y: &[usize], n_classes: usize, params: &ForestParams, seed: u64) -> Self {
        let n = y.len();
        let weights = vec![1.0; n];
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::stream_rng(seed, t as u64);
                let mut samples: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                Tree::fit_classifier(columns, y, &weights, n_classes, &mut samples, &params.tree, Some(rng))
            })
            .collect();
        Self { trees, n_classes }
    }

    /// Hard-vote fractions. Each tree votes for the argmax of its leaf.
    pub fn proba_row(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for t in &self.trees {
            out[argmax(t.leaf_value(x))] += 1.0;
        }
        let b = self.trees.len() as f64;
        out.iter_mut().for_each(|v| *v /= b);
    }
}

//! CART trees: Gini classification trees and variance-reduction regression
//! trees, sharing one growing engine.
//!
//! Splits send `x[feature] <= threshold` left. Thresholds are midpoints of
//! adjacent distinct sorted values (or uniform draws between the node's
//! min and max in random-threshold mode). Candidate splits are scanned in
//! ascending feature order and ascending threshold order and replaced only
//! on a strictly larger gain, so ties resolve to the lower feature index,
//! then the lower threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
    pub random_thresholds: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 16, min_samples_leaf: 2, max_features: None, random_thresholds: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
        /// Weighted impurity decrease of this split.
        gain: f64,
    },
    /// Class distribution (classification) or `[mean]` (regression).
    Leaf { value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

#[derive(Clone, Copy)]
enum Target<'a> {
    Class { y: &'a [usize], w: &'a [f64], k: usize },
    Reg { y: &'a [f64] },
}

impl Target<'_> {
    fn width(&self) -> usize {
        match self {
            Target::Class { k, .. } => *k,
            Target::Reg { .. } => 3,
        }
    }

    fn add(&self, s: &mut [f64], i: usize) {
        match self {
            Target::Class { y, w, .. } => s[y[i]] += w[i],
            Target::Reg { y } => {
                s[0] += 1.0;
                s[1] += y[i];
                s[2] += y[i] * y[i];
            }
        }
    }

    fn weight(&self, s: &[f64]) -> f64 {
        match self {
            Target::Class { .. } => s.iter().sum(),
            Target::Reg { .. } => s[0],
        }
    }

    /// Node impurity times node weight (Gini or variance).
    fn impurity_w(&self, s: &[f64]) -> f64 {
        let w = self.weight(s);
        if w <= 0.0 {
            return 0.0;
        }
        match self {
            Target::Class { .. } => w - s.iter().map(|c| c * c).sum::<f64>() / w,
            Target::Reg { .. } => (s[2] - s[1] * s[1] / w).max(0.0),
        }
    }

    fn leaf(&self, s: &[f64]) -> Vec<f64> {
        let w = self.weight(s);
        match self {
            Target::Class { .. } => s.iter().map(|c| c / w).collect(),
            Target::Reg { .. } => vec![s[1] / w],
        }
    }

    fn stats(&self, samples: &[usize]) -> Vec<f64> {
        let mut s = vec![0.0; self.width()];
        for &i in samples {
            self.add(&mut s, i);
        }
        s
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a> {
    columns: &'a [Vec<f64>],
    target: Target<'a>,
    params: &'a TreeParams,
    rng: Option<seed::Rng>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn build(&mut self, samples: &mut [usize], depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let parent = self.target.stats(samples);
        self.nodes.push(Node::Leaf { value: self.target.leaf(&parent) });
        let w = self.target.weight(&parent);
        let imp = self.target.impurity_w(&parent);
        let min_leaf = self.params.min_samples_leaf.max(1);
        if depth >= self.params.max_depth || samples.len() < 2 * min_leaf || imp <= 1e-12 * w {
            return id;
        }
        let Some(best) = self.best_split(samples, &parent, imp) else {
            return id;
        };
        if !(best.gain > 1e-12 * w) {
            return id;
        }
        let col = &self.columns[best.feature];
        // Stable partition keeps child sample order deterministic.
        let (mut left, mut right): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| col[i] <= best.threshold);
        let l = self.build(&mut left, depth + 1);
        let r = self.build(&mut right, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
            gain: best.gain,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.columns.len();
        match (self.params.max_features, self.rng.as_mut()) {
            (Some(m), Some(rng)) if m < p => {
                let mut all: Vec<usize> = (0..p).collect();
                for i in 0..m {
                    let j = rng.random_range(i..p);
                    all.swap(i, j);
                }
                let mut chosen = all[..m].to_vec();
                chosen.sort_unstable();
                chosen
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, samples: &[usize], parent: &[f64], parent_imp: f64) -> Option<Best> {
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<Best> = None;
        let mut consider = |feature: usize, threshold: f64, gain: f64| {
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Best { feature, threshold, gain });
            }
        };
        let width = self.target.width();
        let mut left = vec![0.0; width];
        let mut right = vec![0.0; width];
        for f in self.candidate_features() {
            let col = &self.columns[f];
            if self.params.random_thresholds {
                let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(col[i]), hi.max(col[i]))
                });
                if !(hi > lo) {
                    continue;
                }
                let rng = self.rng.as_mut().expect("random thresholds need an rng");
                let thr = rng.random_range(lo..hi);
                left.iter_mut().for_each(|v| *v = 0.0);
                let mut n_left = 0;
                for &i in samples {
                    if col[i] <= thr {
                        self.target.add(&mut left, i);
                        n_left += 1;
                    }
                }
                let n_right = samples.len() - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                for k in 0..width {
                    right[k] = parent[k] - left[k];
                }
                let gain = parent_imp - self.target.impurity_w(&left) - self.target.impurity_w(&right);
                consider(f, thr, gain);
                continue;
            }

            let mut order: Vec<usize> = samples.to_vec();
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            left.iter_mut().for_each(|v| *v = 0.0);
            let n = order.len();
            for pos in 0..n - 1 {
                self.target.add(&mut left, order[pos]);
                let (x0, x1) = (col[order[pos]], col[order[pos + 1]]);
                let n_left = pos + 1;
                if x0 == x1 || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                for k in 0..width {
                    right[k] = parent[k] - left[k];
                }
                let gain = parent_imp - self.target.impurity_w(&left) - self.target.impurity_w(&right);
                let mut thr = x0 + (x1 - x0) / 2.0;
                if thr >= x1 {
                    thr = x0;
                }
                consider(f, thr, gain);
            }
        }
        best
    }
}

impl Tree {
    /// Fits a Gini classification tree on the given (possibly repeated) samples.
    pub fn fit_classifier(
        columns: &[Vec<f64>],
        y: &[usize],
        weights: &[f64],
        n_classes: usize,
        samples: &mut [usize],
        params: &TreeParams,
        rng: Option<seed::Rng>,
    ) -> Self {
        let target = Target::Class { y, w: weights, k: n_classes };
        Self::grow(columns, target, samples, params, rng)
    }

    /// Fits a variance-reduction regression tree on all rows.
    pub fn fit_regressor(columns: &[Vec<f64>], y: &[f64], params: &TreeParams) -> Self {
        let mut samples: Vec<usize> = (0..y.len()).collect();
        Self::grow(columns, Target::Reg { y }, &mut samples, params, None)
    }

    fn grow(
        columns: &[Vec<f64>],
        target: Target<'_>,
        samples: &mut [usize],
        params: &TreeParams,
        rng: Option<seed::Rng>,
    ) -> Self {
        let mut b = Builder { columns, target, params, rng, nodes: Vec::new() };
        if !samples.is_empty() {
            b.build(samples, 0);
        }
        Self { nodes: b.nodes, n_features: columns.len() }
    }

    pub fn leaf_value(&self, x: &[f64]) -> &[f64] {
        let mut id = 0usize;
        loop {
            match &self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right, .. } => {
                    id = if x[*feature] <= *threshold { *left as usize } else { *right as usize };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + go(nodes, *left as usize).max(go(nodes, *right as usize))
                }
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            go(&self.nodes, 0)
        }
    }

    /// Total impurity decrease per feature, normalized to sum 1.
    /// A tree without splits yields all zeros. `None` for an unfitted tree.
    pub fn importances(&self) -> Option<Vec<f64>> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut imp = vec![0.0; self.n_features];
        for n in &self.nodes {
            if let Node::Split { feature, gain, .. } = n {
                imp[*feature] += gain.max(0.0);
            }
        }
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            imp.iter_mut().for_each(|v| *v /= total);
        }
        Some(imp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        let p = rows[0].len();
        (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
    }

    #[test]
    fn axis_separable_single_split() {
        let x = cols(&[&[-2.0], &[-1.0], &[-0.5], &[0.5], &[1.0], &[3.0]]);
        let y = [0, 0, 0, 1, 1, 1];
        let w = [1.0; 6];
        let mut s: Vec<usize> = (0..6).collect();
        let t = Tree::fit_classifier(&x, &y, &w, 2, &mut s, &TreeParams::default(), None);
        assert_eq!(t.n_leaves(), 2);
        match &t.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.0);
            }
            _ => panic!("expected split"),
        }
        for (i, &yi) in y.iter().enumerate() {
            let v = t.leaf_value(&[x[0][i]]);
            assert_eq!(v[yi], 1.0);
        }
    }

    #[test]
    fn ties_prefer_lower_feature() {
        // Features 0 and 1 are identical: both give the same gain.
        let x = cols(&[&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let y = [0, 0, 1, 1];
        let mut s: Vec<usize> = (0..4).collect();
        let p = TreeParams { min_samples_leaf: 1, ..Default::default() };
        let t = Tree::fit_classifier(&x, &y, &[1.0; 4], 2, &mut s, &p, None);
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn single_split_importance() {
        let x = cols(&[&[5.0, 1.0, 0.0], &[5.0, 2.0, 0.0], &[5.0, 1.0, 1.0], &[5.0, 2.0, 1.0]]);
        let y = [0.0, 0.0, 10.0, 10.0];
        let p = TreeParams { max_depth: 1, min_samples_leaf: 1, ..Default::default() };
        let t = Tree::fit_regressor(&x, &y, &p);
        assert_eq!(t.importances().unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn pure_target_has_zero_importance() {
        let x = cols(&[&[1.0], &[2.0], &[3.0]]);
        let t = Tree::fit_regressor(&x, &[4.0, 4.0, 4.0], &TreeParams::default());
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.importances().unwrap(), vec![0.0]);
        let empty = Tree { nodes: vec![], n_features: 1 };
        assert!(empty.importances().is_none());
    }

    #[test]
    fn two_split_importance_matches_hand_computation() {
        // Six points, two features. y = [0,0,0,10,10,20].
        // Root: best split x0 <= 2.5 separates {0,0,0} from {10,10,20}.
        //   SSE root = sum(y^2) - (sum y)^2/6 = 600 - 40^2/6 = 333.33..
        //   SSE left = 0; SSE right = 600 - 40^2/3 = 66.66..
        //   gain_root = 266.66..
        // Right child: x1 <= 0.5 separates {10,10} from {20}: gain 66.66..;
        //   x0 cannot (its order there is 10,20,10).
        let x0 = [1.0, 2.0, 2.2, 3.0, 5.0, 4.0];
        let x1 = [0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let y = [0.0, 0.0, 0.0, 10.0, 10.0, 20.0];
        let p = TreeParams { max_depth: 2, min_samples_leaf: 1, ..Default::default() };
        let t = Tree::fit_regressor(&[x0.to_vec(), x1.to_vec()], &y, &p);

        let sse = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m).powi(2)).sum::<f64>()
        };
        let g_root = sse(&y) - sse(&y[..3]) - sse(&y[3..]);
        let g_right = sse(&y[3..]) - sse(&y[3..5]) - sse(&y[5..]);
        let total = g_root + g_right;
        let imp = t.importances().unwrap();
        assert!((imp[0] - g_root / total).abs() < 1e-12, "{imp:?}");
        assert!((imp[1] - g_right / total).abs() < 1e-12);
        assert!((imp[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn depth_and_leaf_caps() {
        let n = 64;
        let x = vec![(0..n).map(f64::from).collect::<Vec<_>>()];
        let y: Vec<usize> = (0..n as usize).map(|i| i % 2).collect();
        let mut s: Vec<usize> = (0..n as usize).collect();
        let p = TreeParams { max_depth: 3, min_samples_leaf: 4, ..Default::default() };
        let t = Tree::fit_classifier(&x, &y, &vec![1.0; n as usize], 2, &mut s, &p, None);
        assert!(t.depth() <= 3);
        for node in &t.nodes {
            if let Node::Leaf { value } = node {
                assert!((value.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

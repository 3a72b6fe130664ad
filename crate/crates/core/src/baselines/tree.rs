//! Greedy CART regression tree: exhaustive search over features and
//! midpoints between sorted unique values, minimizing total squared error.
//! Ties break toward the lowest feature index, then the lowest threshold.

use crate::nn::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 12,
            min_samples_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub root: Node,
    pub n_features: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }

    pub fn n_leaves(&self) -> usize {
        fn walk(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => walk(left) + walk(right),
            }
        }
        walk(&self.root)
    }
}

/// Best split of one node: (feature, threshold, combined SSE).
fn best_split(
    xs: &[Vec<f64>],
    ys: &[f64],
    indices: &[usize],
    min_leaf: usize,
) -> Option<(usize, f64, f64)> {
    let n = indices.len();
    if n < 2 * min_leaf {
        return None;
    }
    let p = xs[indices[0]].len();
    let mut best: Option<(usize, f64, f64)> = None;

    let mut order: Vec<usize> = indices.to_vec();
    for f in 0..p {
        order.sort_by(|&a, &b| xs[a][f].total_cmp(&xs[b][f]).then(a.cmp(&b)));
        // prefix sums over the sorted order
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let prefix: Vec<(f64, f64)> = order
            .iter()
            .map(|&i| {
                sum += ys[i];
                sumsq += ys[i] * ys[i];
                (sum, sumsq)
            })
            .collect();
        let (total_sum, total_sumsq) = prefix[n - 1];

        for s in min_leaf..=n - min_leaf {
            let lo = xs[order[s - 1]][f];
            let hi = xs[order[s]][f];
            if lo == hi {
                continue;
            }
            let threshold = 0.5 * (lo + hi);
            // guard against midpoints that round onto an endpoint
            if threshold <= lo || threshold >= hi {
                continue;
            }
            let (lsum, lsumsq) = prefix[s - 1];
            let rsum = total_sum - lsum;
            let rsumsq = total_sumsq - lsumsq;
            let nl = s as f64;
            let nr = (n - s) as f64;
            let sse = (lsumsq - lsum * lsum / nl) + (rsumsq - rsum * rsum / nr);
            let better = match best {
                None => true,
                Some((_, _, best_sse)) => sse < best_sse,
            };
            if better {
                best = Some((f, threshold, sse));
            }
        }
    }
    best
}

fn build(xs: &[Vec<f64>], ys: &[f64], indices: &[usize], depth: usize, cfg: &TreeConfig) -> Node {
    let pure = indices.iter().all(|&i| ys[i] == ys[indices[0]]);
    if pure {
        return Node::Leaf { value: ys[indices[0]] };
    }
    let n = indices.len() as f64;
    let mean = indices.iter().map(|&i| ys[i]).sum::<f64>() / n;
    if depth >= cfg.max_depth {
        return Node::Leaf { value: mean };
    }
    let Some((feature, threshold, _)) = best_split(xs, ys, indices, cfg.min_samples_leaf) else {
        return Node::Leaf { value: mean };
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&i| xs[i][feature] <= threshold);
    Node::Split {
        feature,
        threshold,
        left: Box::new(build(xs, ys, &left_idx, depth + 1, cfg)),
        right: Box::new(build(xs, ys, &right_idx, depth + 1, cfg)),
    }
}

pub fn fit_tree(xs: &[Vec<f64>], ys: &[f64], cfg: &TreeConfig) -> Result<RegressionTree> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::data("tree needs a non-empty design with matching targets"));
    }
    if cfg.min_samples_leaf == 0 {
        return Err(Error::config("min_samples_leaf must be >= 1"));
    }
    if xs.len() < cfg.min_samples_leaf {
        return Err(Error::data("fewer samples than min_samples_leaf"));
    }
    let indices: Vec<usize> = (0..xs.len()).collect();
    Ok(RegressionTree {
        root: build(xs, ys, &indices, 0, cfg),
        n_features: xs[0].len(),
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
    })
}

/// Flatten to a checkpoint tensor: one row [is_leaf, feature_or_0,
/// threshold_or_value, left, right] per node, root first.
pub fn tree_to_tensor(tree: &RegressionTree) -> Tensor {
    let mut rows: Vec<[f64; 5]> = Vec::new();
    fn emit(node: &Node, rows: &mut Vec<[f64; 5]>) -> usize {
        let slot = rows.len();
        rows.push([0.0; 5]);
        match node {
            Node::Leaf { value } => {
                rows[slot] = [1.0, 0.0, *value, 0.0, 0.0];
            }
            Node::Split { feature, threshold, left, right } => {
                let l = emit(left, rows);
                let r = emit(right, rows);
                rows[slot] = [0.0, *feature as f64, *threshold, l as f64, r as f64];
            }
        }
        slot
    }
    emit(&tree.root, &mut rows);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Tensor::from_vec(&[rows.len(), 5], flat)
}

pub fn tree_from_tensor(t: &Tensor, n_features: usize, cfg: &TreeConfig) -> Result<RegressionTree> {
    if t.shape().len() != 2 || t.shape()[1] != 5 || t.shape()[0] == 0 {
        return Err(Error::format("tree tensor must have shape [n, 5]"));
    }
    let n = t.shape()[0];
    fn parse(t: &Tensor, slot: usize, n: usize, depth: usize) -> Result<Node> {
        if slot >= n || depth > n {
            return Err(Error::format("tree tensor has out-of-range node references"));
        }
        if t.at(slot, 0) == 1.0 {
            Ok(Node::Leaf { value: t.at(slot, 2) })
        } else {
            let left = parse(t, t.at(slot, 3) as usize, n, depth + 1)?;
            let right = parse(t, t.at(slot, 4) as usize, n, depth + 1)?;
            Ok(Node::Split {
                feature: t.at(slot, 1) as usize,
                threshold: t.at(slot, 2),
                left: Box::new(left),
                right: Box::new(right),
            })
        }
    }
    Ok(RegressionTree {
        root: parse(t, 0, n, 0)?,
        n_features,
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
    })
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Independent brute-force splitter used by tests: SSE computed from
    //! scratch (two-pass mean then deviations) for every candidate split.

    pub fn sse(values: &[f64]) -> f64 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter().map(|v| (v - mean) * (v - mean)).sum()
    }

    /// Returns the brute-force best (feature, threshold) for a node, or None.
    pub fn best_split(
        xs: &[Vec<f64>],
        ys: &[f64],
        indices: &[usize],
        min_leaf: usize,
    ) -> Option<(usize, f64)> {
        if indices.len() < 2 * min_leaf {
            return None;
        }
        let p = xs[indices[0]].len();
        let mut best: Option<(usize, f64, f64)> = None;
        for f in 0..p {
            let mut values: Vec<f64> = indices.iter().map(|&i| xs[i][f]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for pair in values.windows(2) {
                let thr = 0.5 * (pair[0] + pair[1]);
                if thr <= pair[0] || thr >= pair[1] {
                    continue;
                }
                let left: Vec<f64> = indices.iter().filter(|&&i| xs[i][f] <= thr).map(|&i| ys[i]).collect();
                let right: Vec<f64> = indices.iter().filter(|&&i| xs[i][f] > thr).map(|&i| ys[i]).collect();
                if left.len() < min_leaf || right.len() < min_leaf {
                    continue;
                }
                let total = sse(&left) + sse(&right);
                let better = match best {
                    None => true,
                    Some((_, _, b)) => total < b - 1e-12,
                };
                if better {
                    best = Some((f, thr, total));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn constant_targets_single_leaf() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let ys = vec![4.2; 10];
        let tree = fit_tree(&xs, &ys, &TreeConfig { max_depth: 5, min_samples_leaf: 1 }).unwrap();
        assert_eq!(tree.root, Node::Leaf { value: 4.2 });
        assert_eq!(tree.predict(&[100.0]), 4.2);
    }

    #[test]
    fn step_function_splits_at_midpoint() {
        // feature values {1,2,3,4}, targets {0,0,10,10} -> threshold 2.5
        let xs: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let ys = vec![0.0, 0.0, 10.0, 10.0];
        let tree = fit_tree(&xs, &ys, &TreeConfig { max_depth: 4, min_samples_leaf: 1 }).unwrap();
        match &tree.root {
            Node::Split { feature, threshold, left, right } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
                assert_eq!(**left, Node::Leaf { value: 0.0 });
                assert_eq!(**right, Node::Leaf { value: 10.0 });
            }
            other => panic!("expected a split at the root, got {other:?}"),
        }
        assert_eq!(tree.predict(&[2.0]), 0.0);
        assert_eq!(tree.predict(&[2.6]), 10.0);
    }

    /// Walk the fitted tree asserting every split equals the brute-force
    /// oracle's choice on the same index subset.
    fn assert_matches_oracle(
        node: &Node,
        xs: &[Vec<f64>],
        ys: &[f64],
        indices: &[usize],
        depth: usize,
        cfg: &TreeConfig,
    ) {
        match node {
            Node::Leaf { value } => {
                let mean = indices.iter().map(|&i| ys[i]).sum::<f64>() / indices.len() as f64;
                assert!((value - mean).abs() < 1e-9, "leaf value {value} vs mean {mean}");
            }
            Node::Split { feature, threshold, left, right } => {
                let (of, ot) = oracle::best_split(xs, ys, indices, cfg.min_samples_leaf)
                    .expect("oracle found no split where the tree did");
                assert_eq!(*feature, of, "feature mismatch at depth {depth}");
                assert!(
                    (threshold - ot).abs() < 1e-12,
                    "threshold {threshold} vs oracle {ot} at depth {depth}"
                );
                let (li, ri): (Vec<usize>, Vec<usize>) =
                    indices.iter().partition(|&&i| xs[i][*feature] <= *threshold);
                assert_matches_oracle(left, xs, ys, &li, depth + 1, cfg);
                assert_matches_oracle(right, xs, ys, &ri, depth + 1, cfg);
            }
        }
    }

    #[test]
    fn matches_brute_force_oracle_on_random_data() {
        let mut rng = SeededRng::new(88);
        for trial in 0..5 {
            let n = 120 + trial * 20;
            let xs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..4).map(|_| rng.range_f64(-2.0, 2.0)).collect())
                .collect();
            let ys: Vec<f64> = xs
                .iter()
                .map(|x| {
                    let base = if x[0] > 0.3 { 2.0 } else { -1.0 };
                    base + 0.5 * x[2] + 0.1 * (x[1] * 4.0).sin()
                })
                .collect();
            let cfg = TreeConfig { max_depth: 4, min_samples_leaf: 5 };
            let tree = fit_tree(&xs, &ys, &cfg).unwrap();
            let indices: Vec<usize> = (0..n).collect();
            assert_matches_oracle(&tree.root, &xs, &ys, &indices, 0, &cfg);
        }
    }

    #[test]
    fn predictions_within_target_range() {
        let mut rng = SeededRng::new(12);
        let xs: Vec<Vec<f64>> = (0..150)
            .map(|_| (0..3).map(|_| rng.range_f64(0.0, 1.0)).collect())
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] * 3.0 - x[1]).collect();
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tree = fit_tree(&xs, &ys, &TreeConfig::default()).unwrap();
        for x in &xs {
            let p = tree.predict(x);
            assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }

    #[test]
    fn respects_depth_and_leaf_limits() {
        let mut rng = SeededRng::new(13);
        let xs: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.unit_f64()]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x[0] * 20.0).sin()).collect();
        let cfg = TreeConfig { max_depth: 3, min_samples_leaf: 10 };
        let tree = fit_tree(&xs, &ys, &cfg).unwrap();
        assert!(tree.depth() <= 3);
        assert!(tree.n_leaves() <= 8);
    }

    #[test]
    fn tensor_round_trip() {
        let mut rng = SeededRng::new(14);
        let xs: Vec<Vec<f64>> = (0..80)
            .map(|_| (0..3).map(|_| rng.range_f64(-1.0, 1.0)).collect())
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| if x[1] > 0.0 { 1.0 } else { 2.0 + x[0] }).collect();
        let cfg = TreeConfig { max_depth: 5, min_samples_leaf: 3 };
        let tree = fit_tree(&xs, &ys, &cfg).unwrap();
        let tensor = tree_to_tensor(&tree);
        let back = tree_from_tensor(&tensor, 3, &cfg).unwrap();
        assert_eq!(tree, back);
        for x in xs.iter().take(10) {
            assert_eq!(tree.predict(x), back.predict(x));
        }
    }
}

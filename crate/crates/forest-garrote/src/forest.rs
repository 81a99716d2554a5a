//! Random-forest regressor: CART regression trees on bootstrap samples with
//! random feature subsets, mtry tuned by out-of-bag error.
//!
//! Every node keeps two sets of statistics: the bootstrap-sample mean/count it
//! was fitted with (`node_mean`, `n_node`) and the mean/count over the
//! original n training observations routed through the tree after fitting
//! (`train_mean`, `n_train`). Predictions and rule extraction use the latter,
//! so the rule decomposition reproduces forest predictions exactly;
//! out-of-bag error uses the former to avoid leaking the held-out target.

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::data::{ColumnInfo, Dataset};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub var: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub split: Option<Split>,
    pub children: Option<(usize, usize)>,
    /// Mean of the bootstrap-sample targets reaching this node.
    pub node_mean: f64,
    /// Bootstrap-sample count at this node.
    pub n_node: usize,
    /// Mean of the original training targets routed to this node.
    pub train_mean: f64,
    /// Original training-sample count at this node.
    pub n_train: usize,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Route a row down the tree: a sample goes left iff `x[var] < threshold`.
    pub fn leaf_of(&self, x: ArrayView1<f64>) -> usize {
        let mut id = 0;
        while let Some((l, r)) = self.nodes[id].children {
            let s = self.nodes[id]
                .split
                .expect("internal node must carry a split");
            id = if x[s.var] < s.threshold { l } else { r };
        }
        id
    }

    /// Prediction from original-sample means: the deepest node on the routing
    /// path that contains at least one original training observation.
    pub fn predict(&self, x: ArrayView1<f64>) -> f64 {
        let mut id = 0;
        let mut value = self.nodes[0].train_mean;
        while let Some((l, r)) = self.nodes[id].children {
            let s = self.nodes[id].split.unwrap();
            id = if x[s.var] < s.threshold { l } else { r };
            if self.nodes[id].n_train > 0 {
                value = self.nodes[id].train_mean;
            }
        }
        value
    }

    /// Prediction from bootstrap leaf means (the fitting-time tree function).
    pub fn predict_bootstrap(&self, x: ArrayView1<f64>) -> f64 {
        self.nodes[self.leaf_of(x)].node_mean
    }

    pub fn max_depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for node in &self.nodes {
            if let Some(p) = node.parent {
                depth[node.id] = depth[p] + 1;
                max = max.max(depth[node.id]);
            }
        }
        max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub num_trees: usize,
    pub mtry: usize,
    pub min_node_size: usize,
    pub seed: u64,
    /// Test hook: `false` fits every tree on the full sample.
    pub bootstrap: bool,
}

impl ForestParams {
    pub fn default_for(p: usize) -> Self {
        ForestParams {
            num_trees: 500,
            mtry: p.div_ceil(3).max(1),
            min_node_size: 5,
            seed: 0,
            bootstrap: true,
        }
    }
}

/// Default mtry candidates for out-of-bag tuning.
pub fn default_mtry_candidates(p: usize) -> Vec<usize> {
    let mut cands = vec![p.div_ceil(3).max(1), p.div_ceil(2).max(1), p];
    cands.sort_unstable();
    cands.dedup();
    cands
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    pub columns: Vec<ColumnInfo>,
    /// Per tree, which original rows were in the bootstrap sample. Only used
    /// for out-of-bag error at fit time; not serialized.
    #[serde(skip, default)]
    pub in_bag: Vec<Vec<bool>>,
}

impl Forest {
    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> Result<f64> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: x.len(),
            });
        }
        let mut acc = NeumaierSum::new();
        for tree in &self.trees {
            acc.add(tree.predict(x));
        }
        Ok(acc.total() / self.trees.len() as f64)
    }

    pub fn predict_rows(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        let mut out = Array1::zeros(x.nrows());
        for (i, row) in x.rows().into_iter().enumerate() {
            out[i] = self.predict(row)?;
        }
        Ok(out)
    }

    /// Column indices that appear in some split of some tree.
    pub fn used_columns(&self) -> BTreeSet<usize> {
        self.trees
            .iter()
            .flat_map(|t| t.nodes.iter().filter_map(|n| n.split.map(|s| s.var)))
            .collect()
    }

    /// Original variables (dummies mapped back to their factor) used by the forest.
    pub fn used_original_variables(&self) -> BTreeSet<usize> {
        self.used_columns()
            .into_iter()
            .map(|c| self.columns[c].original_index)
            .collect()
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(Tree::max_depth).max().unwrap_or(0)
    }
}

struct NodeTask {
    node_id: usize,
    samples: Vec<usize>,
}

struct Grower<'a> {
    x: ArrayView2<'a, f64>,
    y: ArrayView1<'a, f64>,
    mtry: usize,
    min_node_size: usize,
}

impl<'a> Grower<'a> {
    fn mean_sse(&self, samples: &[usize]) -> (f64, f64) {
        let mut sum = NeumaierSum::new();
        for &i in samples {
            sum.add(self.y[i]);
        }
        let mean = sum.total() / samples.len() as f64;
        let mut sse = NeumaierSum::new();
        for &i in samples {
            let d = self.y[i] - mean;
            sse.add(d * d);
        }
        (mean, sse.total())
    }

    /// Best split of `samples` on column `var`, if any candidate leaves both
    /// children with at least `min_node_size` samples and strictly reduces SSE.
    fn best_split_on(&self, samples: &[usize], var: usize) -> Option<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = samples
            .iter()
            .map(|&i| (self.x[[i, var]], self.y[i]))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let n = pairs.len();
        if pairs[0].0 == pairs[n - 1].0 {
            return None; // constant column within the node
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut left_sum = 0.0;
        let mut best: Option<(f64, f64)> = None;
        for i in 0..n - 1 {
            left_sum += pairs[i].1;
            if pairs[i].0 == pairs[i + 1].0 {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < self.min_node_size || n_right < self.min_node_size {
                continue;
            }
            let right_sum = total - left_sum;
            let score =
                left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64;
            let mut threshold = 0.5 * (pairs[i].0 + pairs[i + 1].0);
            if threshold <= pairs[i].0 {
                threshold = pairs[i + 1].0;
            }
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, threshold));
            }
        }
        best.map(|(score, threshold)| {
            let gain = score - total * total / n as f64;
            (gain, threshold)
        })
    }

    fn grow(&self, root_samples: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut stack: Vec<NodeTask> = Vec::new();

        let (mean, _) = self.mean_sse(&root_samples);
        nodes.push(TreeNode {
            id: 0,
            parent: None,
            split: None,
            children: None,
            node_mean: mean,
            n_node: root_samples.len(),
            train_mean: 0.0,
            n_train: 0,
        });
        stack.push(NodeTask {
            node_id: 0,
            samples: root_samples,
        });

        let p = self.x.ncols();
        let mut cols: Vec<usize> = (0..p).collect();

        while let Some(task) = stack.pop() {
            let samples = task.samples;
            if samples.len() < 2 * self.min_node_size {
                continue;
            }
            let (mean, sse) = self.mean_sse(&samples);
            if sse <= samples.len() as f64 * 1e-14 * (1.0 + mean * mean) {
                continue; // pure enough
            }

            cols.shuffle(rng);
            let mut best: Option<(f64, usize, f64)> = None;
            for &var in cols.iter().take(self.mtry) {
                if let Some((gain, threshold)) = self.best_split_on(&samples, var) {
                    if gain > 1e-12 * sse && best.is_none_or(|(g, _, _)| gain > g) {
                        best = Some((gain, var, threshold));
                    }
                }
            }
            let Some((_, var, threshold)) = best else {
                continue;
            };

            let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples
                .into_iter()
                .partition(|&i| self.x[[i, var]] < threshold);
            debug_assert!(!left_samples.is_empty() && !right_samples.is_empty());

            let (lm, _) = self.mean_sse(&left_samples);
            let (rm, _) = self.mean_sse(&right_samples);
            let left_id = nodes.len();
            let right_id = nodes.len() + 1;
            nodes.push(TreeNode {
                id: left_id,
                parent: Some(task.node_id),
                split: None,
                children: None,
                node_mean: lm,
                n_node: left_samples.len(),
                train_mean: 0.0,
                n_train: 0,
            });
            nodes.push(TreeNode {
                id: right_id,
                parent: Some(task.node_id),
                split: None,
                children: None,
                node_mean: rm,
                n_node: right_samples.len(),
                train_mean: 0.0,
                n_train: 0,
            });
            nodes[task.node_id].split = Some(Split { var, threshold });
            nodes[task.node_id].children = Some((left_id, right_id));
            stack.push(NodeTask {
                node_id: left_id,
                samples: left_samples,
            });
            stack.push(NodeTask {
                node_id: right_id,
                samples: right_samples,
            });
        }

        Tree { nodes }
    }
}

/// Recompute per-node statistics over the original training rows.
fn reroute_train_stats(tree: &mut Tree, x: ArrayView2<f64>, y: ArrayView1<f64>) {
    let mut sums: Vec<NeumaierSum> = (0..tree.nodes.len()).map(|_| NeumaierSum::new()).collect();
    let mut counts = vec![0usize; tree.nodes.len()];
    for (i, row) in x.rows().into_iter().enumerate() {
        let mut id = 0;
        loop {
            sums[id].add(y[i]);
            counts[id] += 1;
            match tree.nodes[id].children {
                Some((l, r)) => {
                    let s = tree.nodes[id].split.unwrap();
                    id = if row[s.var] < s.threshold { l } else { r };
                }
                None => break,
            }
        }
    }
    for (node, (sum, count)) in tree.nodes.iter_mut().zip(sums.into_iter().zip(counts)) {
        node.n_train = count;
        node.train_mean = if count > 0 {
            sum.total() / count as f64
        } else {
            0.0
        };
    }
}

/// Fit a single CART regression tree on the given rows (no bootstrap), with
/// original-sample statistics recomputed over the same rows.
pub fn fit_tree(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    mtry: usize,
    min_node_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Tree> {
    if x.nrows() == 0 {
        return Err(Error::InvalidData("empty input".into()));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if min_node_size == 0 || x.nrows() < min_node_size {
        return Err(Error::InvalidParameter(format!(
            "min_node_size {} out of range for n={}",
            min_node_size,
            x.nrows()
        )));
    }
    if mtry == 0 || mtry > x.ncols() {
        return Err(Error::InvalidParameter(format!(
            "mtry {} out of range for p={}",
            mtry,
            x.ncols()
        )));
    }
    let grower = Grower {
        x,
        y,
        mtry,
        min_node_size,
    };
    let mut tree = grower.grow((0..x.nrows()).collect(), rng);
    reroute_train_stats(&mut tree, x, y);
    Ok(tree)
}

/// Fit a forest: `num_trees` trees on independent bootstrap samples, each
/// tree's RNG derived from `(seed, tree index)` so results are identical
/// regardless of thread scheduling.
pub fn fit_forest(d: &Dataset, params: &ForestParams) -> Result<Forest> {
    if params.num_trees == 0 {
        return Err(Error::InvalidParameter("num_trees must be >= 1".into()));
    }
    if params.mtry == 0 || params.mtry > d.p() {
        return Err(Error::InvalidParameter(format!(
            "mtry {} out of range for p={}",
            params.mtry,
            d.p()
        )));
    }
    if params.min_node_size == 0 || d.n() < params.min_node_size {
        return Err(Error::InvalidParameter(format!(
            "min_node_size {} out of range for n={}",
            params.min_node_size,
            d.n()
        )));
    }
    let n = d.n();
    let fitted: Vec<(Tree, Vec<bool>)> = (0..params.num_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(params.seed, "tree", t as u64);
            let samples: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut bag = vec![false; n];
            for &i in &samples {
                bag[i] = true;
            }
            let grower = Grower {
                x: d.x.view(),
                y: d.y.view(),
                mtry: params.mtry,
                min_node_size: params.min_node_size,
            };
            let mut tree = grower.grow(samples, &mut rng);
            reroute_train_stats(&mut tree, d.x.view(), d.y.view());
            (tree, bag)
        })
        .collect();

    let (trees, in_bag): (Vec<Tree>, Vec<Vec<bool>>) = fitted.into_iter().unzip();
    Ok(Forest {
        trees,
        params: *params,
        columns: d.columns.clone(),
        in_bag,
    })
}

/// Out-of-bag mean squared error: each observation is predicted only by
/// trees whose bootstrap excluded it, using bootstrap leaf means.
pub fn oob_error(f: &Forest, d: &Dataset) -> Result<f64> {
    let n = d.n();
    let mut err = NeumaierSum::new();
    let mut used = 0usize;
    for i in 0..n {
        let mut acc = NeumaierSum::new();
        let mut count = 0usize;
        for (tree, bag) in f.trees.iter().zip(&f.in_bag) {
            if !bag[i] {
                acc.add(tree.predict_bootstrap(d.x.row(i)));
                count += 1;
            }
        }
        if count == 0 {
            continue; // never out of bag; excluded from the average
        }
        let pred = acc.total() / count as f64;
        let r = pred - d.y[i];
        err.add(r * r);
        used += 1;
    }
    if used == 0 {
        return Err(Error::NoOobPredictions);
    }
    Ok(err.total() / used as f64)
}

/// Pick the mtry candidate minimizing out-of-bag MSE; ties break toward the
/// smaller value.
pub fn tune_mtry(d: &Dataset, candidates: &[usize], params: &ForestParams) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("empty mtry candidate list".into()));
    }
    let mut cands: Vec<usize> = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();
    for &c in &cands {
        if c == 0 || c > d.p() {
            return Err(Error::InvalidParameter(format!(
                "mtry candidate {} out of [1,{}]",
                c,
                d.p()
            )));
        }
    }
    if cands.len() == 1 {
        return Ok(cands[0]);
    }
    let mut best: Option<(f64, usize)> = None;
    for &c in &cands {
        let f = fit_forest(d, &ForestParams { mtry: c, ..*params })?;
        let e = oob_error(&f, d)?;
        if best.is_none_or(|(be, _)| e < be) {
            best = Some((e, c));
        }
    }
    Ok(best.unwrap().1)
}

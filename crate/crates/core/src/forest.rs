//! Bagged regression trees (random forest) for imputation.

use alloc::vec::Vec;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::exec::Executor;
use crate::rng::{self, domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    #[serde(default = "default_trees")]
    pub trees: usize,
    #[serde(default = "default_min_leaf")]
    pub min_leaf: usize,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    /// Train one model per indicator across all entities instead of one per
    /// entity and indicator.
    #[serde(default)]
    pub pooled: bool,
}

fn default_trees() -> usize {
    100
}
fn default_min_leaf() -> usize {
    2
}
fn default_rounds() -> usize {
    10
}
fn default_tol() -> f64 {
    1e-3
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: default_trees(),
            min_leaf: default_min_leaf(),
            max_rounds: default_rounds(),
            tol: default_tol(),
            seed: 0,
            pooled: false,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(CoreError::param("trees", "need at least one tree"));
        }
        if self.min_leaf == 0 {
            return Err(CoreError::param("min_leaf", "must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(CoreError::param("tol", "must be positive"));
        }
        Ok(())
    }

    /// Features tried at each split: `ceil(sqrt(nfeatures))`.
    pub fn mtry(nfeatures: usize) -> usize {
        (libm::ceil(libm::sqrt(nfeatures as f64)) as usize).clamp(1, nfeatures.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64, count: usize },
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

fn mean_of(targets: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| targets[i]).sum::<f64>() / idx.len() as f64
}

struct Builder<'a, R> {
    rows: &'a [Vec<f64>],
    targets: &'a [f64],
    min_leaf: usize,
    mtry: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: RngCore> Builder<'_, R> {
    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let id = self.nodes.len();
        let value = mean_of(self.targets, &idx);
        self.nodes.push(Node::Leaf {
            value,
            count: idx.len(),
        });
        if idx.len() < 2 * self.min_leaf {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][feature] <= threshold);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn pick_features(&mut self) -> Vec<usize> {
        let nf = self.rows[0].len();
        let mut all: Vec<usize> = (0..nf).collect();
        // Partial Fisher-Yates: the first `mtry` entries are the sample.
        for i in 0..self.mtry {
            let j = i + rng::index_below(self.rng, nf - i);
            all.swap(i, j);
        }
        all.truncate(self.mtry);
        all
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, f64)> {
        let total: f64 = idx.iter().map(|&i| self.targets[i]).sum();
        let n = idx.len() as f64;
        let base = total * total / n;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for feature in self.pick_features() {
            order.sort_by(|&a, &b| {
                self.rows[a][feature]
                    .total_cmp(&self.rows[b][feature])
                    .then(a.cmp(&b))
            });
            let mut left_sum = 0.0;
            for split in 1..order.len() {
                left_sum += self.targets[order[split - 1]];
                let lo = self.rows[order[split - 1]][feature];
                let hi = self.rows[order[split]][feature];
                if split < self.min_leaf || order.len() - split < self.min_leaf || lo == hi {
                    continue;
                }
                let nl = split as f64;
                let right_sum = total - left_sum;
                // Gain in between-group sum of squares.
                let gain = left_sum * left_sum / nl + right_sum * right_sum / (n - nl) - base;
                let threshold = lo + (hi - lo) / 2.0;
                if gain > 1e-12 * base.abs().max(1e-300) && best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Greedy variance-reduction tree on all given rows. Fewer than
/// `2 * min_leaf` rows give a single leaf.
pub fn train_regression_tree<R: RngCore>(
    rows: &[Vec<f64>],
    targets: &[f64],
    min_leaf: usize,
    rng: &mut R,
) -> Result<RegressionTree> {
    if rows.is_empty() || rows.len() != targets.len() {
        return Err(CoreError::InvalidInput("tree needs matching, non-empty rows and targets".into()));
    }
    let nf = rows[0].len();
    if nf == 0 {
        return Err(CoreError::InvalidInput("tree needs at least one feature".into()));
    }
    if rows.iter().any(|r| r.len() != nf) {
        return Err(CoreError::InvalidInput("ragged feature rows".into()));
    }
    let mut b = Builder {
        rows,
        targets,
        min_leaf: min_leaf.max(1),
        mtry: ForestParams::mtry(nf),
        rng,
        nodes: Vec::new(),
    };
    b.grow((0..rows.len()).collect());
    Ok(RegressionTree { nodes: b.nodes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<RegressionTree>,
}

/// Trains `params.trees` trees, each on a bootstrap resample drawn from
/// stream `(seed, tree index)`.
pub fn train_forest<E: Executor>(
    rows: &[Vec<f64>],
    targets: &[f64],
    params: &ForestParams,
    seed: u64,
    exec: &E,
) -> Result<Forest> {
    params.validate()?;
    let n = rows.len();
    let trees = exec.map(params.trees, |t| {
        let mut r = rng::stream(seed, domain::FOREST, t as u64);
        let pick: Vec<usize> = (0..n).map(|_| rng::index_below(&mut r, n)).collect();
        let sub_rows: Vec<Vec<f64>> = pick.iter().map(|&i| rows[i].clone()).collect();
        let sub_targets: Vec<f64> = pick.iter().map(|&i| targets[i]).collect();
        train_regression_tree(&sub_rows, &sub_targets, params.min_leaf, &mut r)
    });
    Ok(Forest {
        trees: trees.into_iter().collect::<Result<_>>()?,
    })
}

/// Mean of the tree predictions.
pub fn forest_predict(forest: &[RegressionTree], row: &[f64]) -> Result<f64> {
    if forest.is_empty() {
        return Err(CoreError::InvalidInput("empty forest".into()));
    }
    Ok(forest.iter().map(|t| t.predict(row)).sum::<f64>() / forest.len() as f64)
}

//! Second-order gradient boosting of regression trees on the logistic loss.
//!
//! Each round computes `g_i = p_i - y_i` and `h_i = p_i (1 - p_i)` at the
//! current logits and grows one tree level by level with an exact greedy
//! split search. A split's gain is
//!
//! ```text
//! ½ [ G_L²/(H_L+λ) + G_R²/(H_R+λ) - (G_L+G_R)²/(H_L+H_R+λ) ]
//! ```
//!
//! and a leaf stores `-G/(H+λ)`. Logits move by `η · leaf`.
//!
//! Numeric features are split on every midpoint between consecutive distinct
//! values. Categorical features are split into "in set / not in set": the
//! node's categories are ordered by `G_k/(H_k+λ)` and every prefix of that
//! order is tried. Ties between candidate splits go to the lowest feature
//! index, then the lowest threshold (first prefix).

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::bce_loss;
use crate::math::{logit, sigmoid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmHyper {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub min_child_weight: f64,
    /// Recorded for provenance; exact greedy boosting draws no random numbers.
    pub seed: u64,
}

impl Default for GbmHyper {
    fn default() -> Self {
        Self { rounds: 200, max_depth: 5, learning_rate: 0.1, lambda: 1.0, min_child_weight: 1.0, seed: 0 }
    }
}

impl GbmHyper {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::InvalidParameter("max_depth must be at least 1".to_string()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter("learning_rate must be positive".to_string()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter("lambda must be nonnegative".to_string()));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return Err(Error::InvalidParameter("min_child_weight must be nonnegative".to_string()));
        }
        Ok(())
    }
}

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).ok_or(Error::Empty("feature matrix has no rows"))?;
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch { context: format!("feature row {i}"), expected: cols, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// `x[feature] < threshold` goes left.
    Numeric {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// `x[feature]` in `left_categories` goes left; anything else (including
    /// categories unseen in training) goes right.
    Categorical {
        feature: usize,
        left_categories: Vec<u32>,
        left: usize,
        right: usize,
    },
}

/// A regression tree stored as an arena; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

fn as_category(x: f64) -> Option<u32> {
    (x >= 0.0 && x <= u32::MAX as f64 && libm::trunc(x) == x).then_some(x as u32)
}

impl Tree {
    pub fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Numeric { feature, threshold, left, right } => {
                    idx = if x[*feature] < *threshold { *left } else { *right };
                }
                Node::Categorical { feature, left_categories, left, right } => {
                    let hit = as_category(x[*feature]).is_some_and(|c| left_categories.binary_search(&c).is_ok());
                    idx = if hit { *left } else { *right };
                }
            }
        }
    }

    fn features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { .. } => None,
            Node::Numeric { feature, .. } | Node::Categorical { feature, .. } => Some(*feature),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub trees: Vec<Tree>,
    pub learning_rate: f64,
    pub base_logit: f64,
    pub feature_count: usize,
    pub categorical_features: Vec<usize>,
}

impl GbmModel {
    /// A model with no trees.
    pub fn constant(base_logit: f64, feature_count: usize, categorical_features: Vec<usize>, learning_rate: f64) -> Self {
        Self { trees: Vec::new(), learning_rate, base_logit, feature_count, categorical_features }
    }

    pub fn predict_logit(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                context: "gbm input".to_string(),
                expected: self.feature_count,
                found: x.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.leaf_value(x)).sum();
        Ok(self.base_logit + self.learning_rate * sum)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.predict_logit(x).map(sigmoid)
    }

    /// Checks the structural invariants of a (possibly deserialized) model.
    pub fn validate(&self) -> Result<()> {
        if !self.base_logit.is_finite() || !self.learning_rate.is_finite() {
            return Err(Error::NonFinite("gbm model parameters".to_string()));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return Err(Error::InvalidParameter(format!("tree {t} is empty")));
            }
            for node in &tree.nodes {
                match node {
                    Node::Leaf { value } if !value.is_finite() => {
                        return Err(Error::NonFinite(format!("leaf value in tree {t}")));
                    }
                    Node::Numeric { left, right, .. } | Node::Categorical { left, right, .. }
                        if *left >= tree.nodes.len() || *right >= tree.nodes.len() =>
                    {
                        return Err(Error::InvalidParameter(format!("dangling child in tree {t}")));
                    }
                    _ => {}
                }
            }
            if let Some(f) = tree.features().find(|&f| f >= self.feature_count) {
                return Err(Error::InvalidParameter(format!("tree {t} uses feature {f} of {}", self.feature_count)));
            }
        }
        Ok(())
    }
}

/// Gradient and hessian of the logistic loss with respect to the logit.
pub fn logistic_grad_hess(logit: f64, label: bool) -> (f64, f64) {
    let p = sigmoid(logit);
    let y = if label { 1.0 } else { 0.0 };
    (p - y, p * (1.0 - p))
}

/// `½ [G_L²/(H_L+λ) + G_R²/(H_R+λ) - G²/(H+λ)]`.
pub fn split_gain(left_grad: f64, left_hess: f64, right_grad: f64, right_hess: f64, lambda: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    let g = left_grad + right_grad;
    let h = left_hess + right_hess;
    0.5 * (score(left_grad, left_hess) + score(right_grad, right_hess) - score(g, h))
}

pub fn leaf_weight(grad: f64, hess: f64, lambda: f64) -> f64 {
    let w = -grad / (hess + lambda);
    if w.is_finite() {
        w
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    /// `x < threshold` goes left.
    Threshold(f64),
    /// Sorted category ids that go left.
    Categories(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub rule: SplitRule,
    pub gain: f64,
    pub left_grad: f64,
    pub left_hess: f64,
    pub right_grad: f64,
    pub right_hess: f64,
}

impl Split {
    pub fn goes_left(&self, x: &[f64]) -> bool {
        match &self.rule {
            SplitRule::Threshold(t) => x[self.feature] < *t,
            SplitRule::Categories(set) => as_category(x[self.feature]).is_some_and(|c| set.binary_search(&c).is_ok()),
        }
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

/// Training-time view of the data: presorted numeric columns and decoded
/// categorical columns.
struct Columns<'a> {
    data: &'a FeatureMatrix,
    is_categorical: Vec<bool>,
    sorted: Vec<Vec<u32>>,
    categories: Vec<Vec<u32>>,
    num_categories: Vec<usize>,
}

impl<'a> Columns<'a> {
    fn new(data: &'a FeatureMatrix, categorical: &[usize]) -> Result<Self> {
        let mut is_categorical = vec![false; data.cols()];
        for &f in categorical {
            *is_categorical.get_mut(f).ok_or_else(|| {
                Error::InvalidParameter(format!("categorical feature {f} out of {} columns", data.cols()))
            })? = true;
        }
        if data.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("feature matrix".to_string()));
        }
        let mut sorted = vec![Vec::new(); data.cols()];
        let mut categories = vec![Vec::new(); data.cols()];
        let mut num_categories = vec![0; data.cols()];
        for f in 0..data.cols() {
            if is_categorical[f] {
                let cats: Vec<u32> = (0..data.rows())
                    .map(|r| {
                        as_category(data.value(r, f)).ok_or_else(|| {
                            Error::InvalidParameter(format!("categorical feature {f} row {r} is not a category id"))
                        })
                    })
                    .collect::<Result<_>>()?;
                num_categories[f] = cats.iter().max().map_or(0, |&m| m as usize + 1);
                categories[f] = cats;
            } else {
                let mut order: Vec<u32> = (0..data.rows() as u32).collect();
                order.sort_by(|&a, &b| data.value(a as usize, f).total_cmp(&data.value(b as usize, f)).then(a.cmp(&b)));
                sorted[f] = order;
            }
        }
        Ok(Self { data, is_categorical, sorted, categories, num_categories })
    }
}

#[derive(Clone, Copy)]
struct NodeStats {
    grad: f64,
    hess: f64,
}

/// Best split for every active node. `slot[r]` maps a row to its active node
/// (or `usize::MAX` when the row sits in a finished leaf).
fn best_splits(
    cols: &Columns<'_>,
    slot: &[usize],
    stats: &[NodeStats],
    grad: &[f64],
    hess: &[f64],
    hyper: &GbmHyper,
) -> Vec<Option<Split>> {
    let n_active = stats.len();
    let mut best: Vec<Option<Split>> = vec![None; n_active];
    let lambda = hyper.lambda;
    let mcw = hyper.min_child_weight;
    let mut consider = |node: usize, candidate: Split| {
        let better = match &best[node] {
            None => candidate.gain > 0.0,
            Some(current) => candidate.gain > current.gain,
        };
        if better {
            best[node] = Some(candidate);
        }
    };

    for f in 0..cols.data.cols() {
        if cols.is_categorical[f] {
            let k = cols.num_categories[f];
            let mut acc = vec![(0.0f64, 0.0f64, 0usize); n_active * k];
            for (r, &c) in cols.categories[f].iter().enumerate() {
                let s = slot[r];
                if s == usize::MAX {
                    continue;
                }
                let cell = &mut acc[s * k + c as usize];
                cell.0 += grad[r];
                cell.1 += hess[r];
                cell.2 += 1;
            }
            for (node, total) in stats.iter().enumerate() {
                let cells = &acc[node * k..(node + 1) * k];
                let mut present: Vec<u32> = (0..k as u32).filter(|&c| cells[c as usize].2 > 0).collect();
                if present.len() < 2 {
                    continue;
                }
                let ratio = |c: u32| {
                    let (g, h, _) = cells[c as usize];
                    g / (h + lambda)
                };
                present.sort_by(|&a, &b| ratio(a).total_cmp(&ratio(b)).then(a.cmp(&b)));
                let (mut gl, mut hl) = (0.0, 0.0);
                for i in 0..present.len() - 1 {
                    let (g, h, _) = cells[present[i] as usize];
                    gl += g;
                    hl += h;
                    let (gr, hr) = (total.grad - gl, total.hess - hl);
                    if hl < mcw || hr < mcw {
                        continue;
                    }
                    let gain = split_gain(gl, hl, gr, hr, lambda);
                    let mut left: Vec<u32> = present[..=i].to_vec();
                    left.sort_unstable();
                    consider(node, Split {
                        feature: f,
                        rule: SplitRule::Categories(left),
                        gain,
                        left_grad: gl,
                        left_hess: hl,
                        right_grad: gr,
                        right_hess: hr,
                    });
                }
            }
        } else {
            // running left sums and last seen value per node
            let mut run = vec![(0.0f64, 0.0f64, f64::NAN); n_active];
            for &r in &cols.sorted[f] {
                let r = r as usize;
                let s = slot[r];
                if s == usize::MAX {
                    continue;
                }
                let x = cols.data.value(r, f);
                let (gl, hl, last) = run[s];
                if !last.is_nan() && x > last {
                    let total = stats[s];
                    let (gr, hr) = (total.grad - gl, total.hess - hl);
                    if hl >= mcw && hr >= mcw {
                        consider(s, Split {
                            feature: f,
                            rule: SplitRule::Threshold(midpoint(last, x)),
                            gain: split_gain(gl, hl, gr, hr, lambda),
                            left_grad: gl,
                            left_hess: hl,
                            right_grad: gr,
                            right_hess: hr,
                        });
                    }
                }
                run[s] = (gl + grad[r], hl + hess[r], x);
            }
        }
    }
    best
}

/// Best root split over all rows, exactly as the first level of a tree would
/// choose it.
pub fn find_root_split(
    data: &FeatureMatrix,
    categorical: &[usize],
    grad: &[f64],
    hess: &[f64],
    hyper: &GbmHyper,
) -> Result<Option<Split>> {
    let cols = Columns::new(data, categorical)?;
    let stats = NodeStats { grad: grad.iter().sum(), hess: hess.iter().sum() };
    let slot = vec![0; data.rows()];
    Ok(best_splits(&cols, &slot, &[stats], grad, hess, hyper).pop().flatten())
}

/// Grows one tree; returns it with the leaf value reached by every row.
fn grow_tree(cols: &Columns<'_>, grad: &[f64], hess: &[f64], hyper: &GbmHyper) -> (Tree, Vec<f64>) {
    let rows = cols.data.rows();
    let lambda = hyper.lambda;
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut node_of = vec![0usize; rows];
    let mut active: Vec<(usize, NodeStats)> =
        vec![(0, NodeStats { grad: grad.iter().sum(), hess: hess.iter().sum() })];

    for _depth in 0..hyper.max_depth {
        if active.is_empty() {
            break;
        }
        let mut slot_of_node = vec![usize::MAX; nodes.len()];
        for (i, (id, _)) in active.iter().enumerate() {
            slot_of_node[*id] = i;
        }
        let slot: Vec<usize> = node_of.iter().map(|&n| slot_of_node[n]).collect();
        let stats: Vec<NodeStats> = active.iter().map(|(_, s)| *s).collect();
        let splits = best_splits(cols, &slot, &stats, grad, hess, hyper);

        let mut next = Vec::new();
        let mut children = vec![None; active.len()];
        for (i, ((id, s), split)) in active.iter().zip(splits).enumerate() {
            let Some(split) = split else {
                nodes[*id] = Node::Leaf { value: leaf_weight(s.grad, s.hess, lambda) };
                continue;
            };
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            next.push((left, NodeStats { grad: split.left_grad, hess: split.left_hess }));
            next.push((right, NodeStats { grad: split.right_grad, hess: split.right_hess }));
            nodes[*id] = match &split.rule {
                SplitRule::Threshold(t) => Node::Numeric { feature: split.feature, threshold: *t, left, right },
                SplitRule::Categories(set) => {
                    Node::Categorical { feature: split.feature, left_categories: set.clone(), left, right }
                }
            };
            children[i] = Some((split, left, right));
        }
        for (r, node) in node_of.iter_mut().enumerate() {
            let s = slot[r];
            if s == usize::MAX {
                continue;
            }
            if let Some((split, left, right)) = &children[s] {
                *node = if split.goes_left(cols.data.row(r)) { *left } else { *right };
            }
        }
        active = next;
    }
    for (id, s) in active {
        nodes[id] = Node::Leaf { value: leaf_weight(s.grad, s.hess, lambda) };
    }
    let leaf_of_row = node_of
        .iter()
        .map(|&n| match nodes[n] {
            Node::Leaf { value } => value,
            _ => unreachable!("rows end in leaves"),
        })
        .collect();
    (Tree { nodes }, leaf_of_row)
}

/// Training loss after every round (index 0 is the loss before boosting).
pub type LossHistory = Vec<f64>;

/// Boosts `hyper.rounds` trees starting from a fixed `base_logit`.
pub fn boost_from(
    base_logit: f64,
    data: &FeatureMatrix,
    labels: &[bool],
    categorical: &[usize],
    hyper: &GbmHyper,
) -> Result<(GbmModel, LossHistory)> {
    hyper.validate()?;
    if data.rows() != labels.len() {
        return Err(Error::LengthMismatch { left: data.rows(), right: labels.len() });
    }
    if !base_logit.is_finite() {
        return Err(Error::NonFinite("base logit".to_string()));
    }
    let mut sorted_categorical = categorical.to_vec();
    sorted_categorical.sort_unstable();
    sorted_categorical.dedup();
    let cols = Columns::new(data, &sorted_categorical)?;

    let mut model = GbmModel::constant(base_logit, data.cols(), sorted_categorical, hyper.learning_rate);
    let mut logits = vec![base_logit; data.rows()];
    let mut history = Vec::with_capacity(hyper.rounds + 1);
    let loss_at = |logits: &[f64]| {
        let p: Vec<f64> = logits.iter().map(|&z| sigmoid(z)).collect();
        bce_loss(&p, labels)
    };
    history.push(loss_at(&logits)?);

    let mut grad = vec![0.0; data.rows()];
    let mut hess = vec![0.0; data.rows()];
    for _ in 0..hyper.rounds {
        for (i, (&z, &y)) in logits.iter().zip(labels).enumerate() {
            (grad[i], hess[i]) = logistic_grad_hess(z, y);
        }
        let (tree, leaf_of_row) = grow_tree(&cols, &grad, &hess, hyper);
        for (z, leaf) in logits.iter_mut().zip(&leaf_of_row) {
            *z += hyper.learning_rate * leaf;
        }
        model.trees.push(tree);
        history.push(loss_at(&logits)?);
    }
    Ok((model, history))
}

/// Trains from the log-odds of the label mean.
pub fn train_gbm(
    data: &FeatureMatrix,
    labels: &[bool],
    categorical: &[usize],
    hyper: &GbmHyper,
) -> Result<(GbmModel, LossHistory)> {
    if data.rows() != labels.len() {
        return Err(Error::LengthMismatch { left: data.rows(), right: labels.len() });
    }
    let first = *labels.first().ok_or(Error::Empty("no training rows"))?;
    if labels.iter().all(|&y| y == first) {
        return Err(Error::DegenerateLabels(first));
    }
    let mean = labels.iter().filter(|&&y| y).count() as f64 / labels.len() as f64;
    boost_from(logit(mean), data, labels, categorical, hyper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn zero_rounds_predicts_label_mean() {
        let data = matrix(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let labels = [true, false, false, false];
        let hyper = GbmHyper { rounds: 0, ..Default::default() };
        let (model, _) = train_gbm(&data, &labels, &[], &hyper).unwrap();
        for r in 0..4 {
            assert!((model.predict(data.row(r)).unwrap() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn single_row_newton_step() {
        let data = matrix(&[&[1.0]]);
        let hyper = GbmHyper { rounds: 1, max_depth: 1, learning_rate: 1.0, lambda: 1.0, ..Default::default() };
        let (model, _) = boost_from(0.0, &data, &[true], &[], &hyper).unwrap();
        assert_eq!(model.trees[0].nodes, vec![Node::Leaf { value: 0.4 }]);
        assert!((model.predict(&[1.0]).unwrap() - sigmoid(0.4)).abs() < 1e-12);
        assert!((model.predict(&[1.0]).unwrap() - 0.598688).abs() < 1e-6);
    }

    #[test]
    fn empty_model_predicts_half() {
        assert_eq!(GbmModel::constant(0.0, 3, vec![], 0.1).predict(&[1.0, 2.0, 3.0]).unwrap(), 0.5);
    }

    #[test]
    fn two_rows_split_on_separating_feature() {
        // feature 0 is constant, feature 1 separates
        let data = matrix(&[&[5.0, -1.0], &[5.0, 1.0]]);
        let hyper = GbmHyper { rounds: 1, max_depth: 1, min_child_weight: 0.0, ..Default::default() };
        let (model, _) = train_gbm(&data, &[false, true], &[], &hyper).unwrap();
        match &model.trees[0].nodes[0] {
            Node::Numeric { feature, threshold, .. } => {
                assert_eq!(*feature, 1);
                assert_eq!(*threshold, 0.0);
            }
            other => panic!("expected numeric split, got {other:?}"),
        }
    }

    #[test]
    fn categorical_split_groups_classes() {
        // categories 0 and 2 positive, 1 and 3 negative: one categorical split separates them
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 4) as f64]).collect();
        let labels: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        let data = FeatureMatrix::from_rows(&rows).unwrap();
        let hyper = GbmHyper { rounds: 1, max_depth: 1, ..Default::default() };
        let (model, _) = train_gbm(&data, &labels, &[0], &hyper).unwrap();
        match &model.trees[0].nodes[0] {
            Node::Categorical { left_categories, .. } => {
                assert!(left_categories == &vec![0, 2] || left_categories == &vec![1, 3]);
            }
            other => panic!("expected categorical split, got {other:?}"),
        }
        // unseen categories go right
        assert!(model.trees[0].leaf_value(&[17.0]).is_finite());
    }

    #[test]
    fn rejects_bad_training_input() {
        let data = matrix(&[&[0.0], &[1.0]]);
        assert_eq!(
            train_gbm(&data, &[true, true], &[], &GbmHyper::default()).unwrap_err(),
            Error::DegenerateLabels(true)
        );
        assert!(matches!(train_gbm(&data, &[true], &[], &GbmHyper::default()), Err(Error::LengthMismatch { .. })));
        let nan = matrix(&[&[f64::NAN], &[1.0]]);
        assert!(matches!(train_gbm(&nan, &[true, false], &[], &GbmHyper::default()), Err(Error::NonFinite(_))));
        let frac = matrix(&[&[0.5], &[1.0]]);
        assert!(train_gbm(&frac, &[true, false], &[0], &GbmHyper::default()).is_err());
        let bad = GbmHyper { max_depth: 0, ..Default::default() };
        assert!(train_gbm(&data, &[true, false], &[], &bad).is_err());
    }

    #[test]
    fn prediction_checks_width_and_serializes() {
        let data = matrix(&[&[0.0, 1.0], &[1.0, 0.0], &[2.0, 1.0], &[3.0, 0.0]]);
        let hyper = GbmHyper { rounds: 3, min_child_weight: 0.0, ..Default::default() };
        let (model, _) = train_gbm(&data, &[false, false, true, true], &[1], &hyper).unwrap();
        assert!(matches!(model.predict(&[1.0]), Err(Error::DimensionMismatch { .. })));
        model.validate().unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: GbmModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
    }
}

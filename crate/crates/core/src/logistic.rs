//! Multi-label logistic heads trained with full-batch gradient descent.
//!
//! Every class owns an independent head `(w_c, b_c)`. The objective is
//!
//! ```text
//! J = Σ_c [ mean_{t ∈ T_c} bce(σ(w_c·x_t + b_c), y_t) + ½·l2·‖w_c‖² ]
//! ```
//!
//! where `T_c` are the labelled targets of class `c`. A head with no targets
//! receives no gradient and keeps its zero initialisation.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::{dot, sigmoid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticHyper {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        Self { epochs: 2000, learning_rate: 2.0, l2: 1e-4 }
    }
}

impl LogisticHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter("learning_rate must be positive".to_string()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidParameter("l2 must be nonnegative".to_string()));
        }
        Ok(())
    }
}

/// A labelled `(example, class)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub example: usize,
    pub class_id: usize,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticHeads {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// Gradient of the objective, laid out like [`LogisticHeads`].
#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

impl LogisticHeads {
    pub fn zeros(num_classes: usize, dim: usize) -> Self {
        Self { weights: vec![vec![0.0; dim]; num_classes], bias: vec![0.0; num_classes] }
    }

    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn logit(&self, class_id: usize, x: &[f64]) -> f64 {
        dot(&self.weights[class_id], x) + self.bias[class_id]
    }

    pub fn predict(&self, class_id: usize, x: &[f64]) -> f64 {
        sigmoid(self.logit(class_id, x))
    }

    pub fn is_finite(&self) -> bool {
        self.bias.iter().chain(self.weights.iter().flatten()).all(|x| x.is_finite())
    }

    fn class_counts(&self, targets: &[Target]) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes()];
        for t in targets {
            counts[t.class_id] += 1;
        }
        counts
    }

    pub fn objective(&self, inputs: &[Vec<f64>], targets: &[Target], l2: f64) -> f64 {
        let counts = self.class_counts(targets);
        let mut per_class = vec![0.0; self.num_classes()];
        for t in targets {
            let z = self.logit(t.class_id, &inputs[t.example]);
            // -[y log σ(z) + (1-y) log(1-σ(z))] = softplus(z) - y z
            let y = if t.label { 1.0 } else { 0.0 };
            per_class[t.class_id] += softplus(z) - y * z;
        }
        let data: f64 = per_class
            .iter()
            .zip(&counts)
            .filter(|(_, &n)| n > 0)
            .map(|(s, &n)| s / n as f64)
            .sum();
        let penalty: f64 = self.weights.iter().map(|w| dot(w, w)).sum();
        data + 0.5 * l2 * penalty
    }

    pub fn gradient(&self, inputs: &[Vec<f64>], targets: &[Target], l2: f64) -> HeadGradient {
        let counts = self.class_counts(targets);
        let mut grad = HeadGradient {
            weights: self.weights.iter().map(|w| w.iter().map(|x| l2 * x).collect()).collect(),
            bias: vec![0.0; self.num_classes()],
        };
        for t in targets {
            let x = &inputs[t.example];
            let y = if t.label { 1.0 } else { 0.0 };
            let r = (self.predict(t.class_id, x) - y) / counts[t.class_id] as f64;
            for (g, xi) in grad.weights[t.class_id].iter_mut().zip(x) {
                *g += r * xi;
            }
            grad.bias[t.class_id] += r;
        }
        grad
    }

    /// Full-batch gradient descent from zero weights. Returns the heads and the
    /// objective after every epoch (index 0 is the initial objective).
    pub fn fit(
        inputs: &[Vec<f64>],
        targets: &[Target],
        num_classes: usize,
        dim: usize,
        hyper: &LogisticHyper,
    ) -> Result<(Self, Vec<f64>)> {
        hyper.validate()?;
        if targets.is_empty() {
            return Err(Error::Empty("no labelled targets"));
        }
        for t in targets {
            if t.class_id >= num_classes {
                return Err(Error::ClassOutOfRange { class_id: t.class_id, num_classes });
            }
            let found = inputs.get(t.example).map(Vec::len);
            if found != Some(dim) {
                return Err(Error::DimensionMismatch {
                    context: "logistic input".to_string(),
                    expected: dim,
                    found: found.unwrap_or(0),
                });
            }
        }

        let mut heads = Self::zeros(num_classes, dim);
        let mut history = Vec::with_capacity(hyper.epochs + 1);
        history.push(heads.objective(inputs, targets, hyper.l2));
        for epoch in 1..=hyper.epochs {
            let grad = heads.gradient(inputs, targets, hyper.l2);
            for (w, g) in heads.weights.iter_mut().zip(&grad.weights) {
                for (wi, gi) in w.iter_mut().zip(g) {
                    *wi -= hyper.learning_rate * gi;
                }
            }
            for (b, g) in heads.bias.iter_mut().zip(&grad.bias) {
                *b -= hyper.learning_rate * g;
            }
            let loss = heads.objective(inputs, targets, hyper.l2);
            if !loss.is_finite() || !heads.is_finite() {
                return Err(Error::NonFiniteLoss(epoch));
            }
            history.push(loss);
        }
        Ok((heads, history))
    }
}

//! Per-class logistic heads over segment encodings: one independent set of
//! weights per class, trained only on that class's segment labels.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{segment_encoding, Corpus, SegmentRef};
use crate::logistic::{LogisticHeads, LogisticHyper, Target};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub trained_epochs: usize,
}

impl BaselineModel {
    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn predict(&self, class_id: usize, encoding: &[f64]) -> Result<f64> {
        if class_id >= self.num_classes() {
            return Err(Error::ClassOutOfRange { class_id, num_classes: self.num_classes() });
        }
        if encoding.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "baseline input".to_string(),
                expected: self.dim(),
                found: encoding.len(),
            });
        }
        let heads = LogisticHeads { weights: self.weights.clone(), bias: self.bias.clone() };
        Ok(heads.predict(class_id, encoding))
    }
}

/// Distinct labelled segment encodings and one target per segment label.
pub fn segment_targets(corpus: &Corpus) -> Result<(Vec<Vec<f64>>, Vec<Target>)> {
    let mut index: BTreeMap<&SegmentRef, usize> = BTreeMap::new();
    let mut inputs = Vec::new();
    let mut targets = Vec::with_capacity(corpus.segment_labels().len());
    for label in corpus.segment_labels() {
        let example = match index.get(&label.segment) {
            Some(&i) => i,
            None => {
                inputs.push(segment_encoding(corpus, &label.segment)?);
                index.insert(&label.segment, inputs.len() - 1);
                inputs.len() - 1
            }
        };
        targets.push(Target { example, class_id: label.class_id, label: label.label });
    }
    Ok((inputs, targets))
}

pub fn train_baseline(corpus: &Corpus, hyper: &LogisticHyper) -> Result<(BaselineModel, Vec<f64>)> {
    if corpus.segment_labels().is_empty() {
        return Err(Error::Empty("corpus has no segment labels"));
    }
    let (inputs, targets) = segment_targets(corpus)?;
    let (heads, history) = LogisticHeads::fit(&inputs, &targets, corpus.num_classes(), corpus.dim(), hyper)?;
    Ok((BaselineModel { weights: heads.weights, bias: heads.bias, trained_epochs: hyper.epochs }, history))
}

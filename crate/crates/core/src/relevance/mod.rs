//! Pairwise relevance scoring: the cross-class boosted model, the per-class
//! logistic baseline and score averaging.

mod baseline;
pub mod gbm;

use alloc::vec::Vec;

pub use baseline::{train_baseline, BaselineModel};
pub use gbm::{boost_from, train_gbm, FeatureMatrix, GbmHyper, GbmModel, LossHistory};

use crate::features::{PairFeatureRow, CLASS_FEATURE};
use crate::{Error, Result};

const BCE_EPSILON: f64 = 1e-12;

/// Mean binary cross-entropy; probabilities are clamped to `[ε, 1-ε]`.
pub fn bce_loss(predictions: &[f64], labels: &[bool]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: labels.len() });
    }
    if predictions.is_empty() {
        return Err(Error::Empty("bce over zero predictions"));
    }
    let total: f64 = predictions
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
            if y {
                -libm::log(p)
            } else {
                -libm::log(1.0 - p)
            }
        })
        .sum();
    Ok(total / predictions.len() as f64)
}

/// Builds the boosting matrix for pair rows; the class id is categorical.
pub fn pair_matrix(rows: &[PairFeatureRow]) -> Result<FeatureMatrix> {
    let features: Vec<Vec<f64>> = rows.iter().map(PairFeatureRow::to_features).collect();
    FeatureMatrix::from_rows(&features)
}

/// Trains the cross-class relevance model on labelled pair rows.
pub fn train_relevance_model(
    rows: &[PairFeatureRow],
    labels: &[bool],
    hyper: &GbmHyper,
) -> Result<(GbmModel, LossHistory)> {
    let data = pair_matrix(rows)?;
    train_gbm(&data, labels, &[CLASS_FEATURE], hyper)
}

pub fn predict_relevance(model: &GbmModel, row: &PairFeatureRow) -> Result<f64> {
    model.predict(&row.to_features())
}

/// Element-wise mean of score lists aligned on the same keys.
pub fn ensemble_average<K: PartialEq + Clone>(lists: &[Vec<(K, f64)>]) -> Result<Vec<(K, f64)>> {
    let (first, rest) = lists.split_first().ok_or(Error::Empty("no score lists to average"))?;
    for list in rest {
        if list.len() != first.len() {
            return Err(Error::LengthMismatch { left: first.len(), right: list.len() });
        }
        if let Some(i) = list.iter().zip(first).position(|((a, _), (b, _))| a != b) {
            return Err(Error::MisalignedKeys(i));
        }
    }
    let n = lists.len() as f64;
    Ok(first
        .iter()
        .enumerate()
        .map(|(i, (key, _))| {
            let sum: f64 = lists.iter().map(|l| l[i].1).sum();
            (key.clone(), sum / n)
        })
        .collect())
}

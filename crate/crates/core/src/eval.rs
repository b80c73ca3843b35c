//! Ranked lists, average precision, mAP and recall at the list cap.
//!
//! For a class `c` with `N_c` relevant segments and a ranked list of length
//! `n`:
//!
//! ```text
//! AP_c = Σ_{i=1..n} Prec(i) · rel(i) / N_c
//! ```
//!
//! Relevant segments missing from the (capped) list add nothing to the
//! numerator but still count in `N_c`. mAP is the unweighted mean over classes
//! with `N_c > 0`; other classes are reported as skipped.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{GroundTruth, SegmentRef};
use crate::math::NeumaierSum;
use crate::{Error, Result};

/// Per-class submission cap.
pub const DEFAULT_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub class_id: usize,
    /// Descending by score; ties by `(video_id, start)` ascending.
    pub entries: Vec<(SegmentRef, f64)>,
    pub cap: usize,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = &SegmentRef> {
        self.entries.iter().map(|(s, _)| s)
    }
}

/// Sorts one class's scores and truncates to `cap`.
pub fn rank_segments(class_id: usize, mut scores: Vec<(SegmentRef, f64)>, cap: usize) -> Result<RankedList> {
    if let Some((s, _)) = scores.iter().find(|(_, x)| !x.is_finite()) {
        return Err(Error::NonFinite(alloc::format!("score of {s}")));
    }
    scores.sort_by(|(sa, a), (sb, b)| b.total_cmp(a).then_with(|| sa.cmp(sb)));
    let mut seen = BTreeSet::new();
    for (s, _) in &scores {
        if !seen.insert(s) {
            return Err(Error::DuplicateSegment(s.to_string()));
        }
    }
    scores.truncate(cap);
    Ok(RankedList { class_id, entries: scores, cap })
}

/// Average precision of `ranked` against `relevant`, with `n_c` the total
/// number of relevant segments for the class.
pub fn average_precision(ranked: &RankedList, relevant: &BTreeSet<SegmentRef>, n_c: usize) -> Result<f64> {
    if n_c == 0 {
        return Err(Error::InvalidParameter("average precision needs N_c >= 1".to_string()));
    }
    if relevant.len() > n_c {
        return Err(Error::InvalidParameter(alloc::format!(
            "N_c = {n_c} is smaller than the {} relevant segments",
            relevant.len()
        )));
    }
    let mut hits = 0usize;
    let mut sum = NeumaierSum::new();
    for (rank, segment) in ranked.segments().enumerate() {
        if relevant.contains(segment) {
            hits += 1;
            sum.add(hits as f64 / (rank + 1) as f64);
        }
    }
    Ok(sum.total() / n_c as f64)
}

/// Unweighted mean of AP over classes with `N_c > 0`; input is `(ap, n_c)`.
pub fn mean_average_precision(per_class: &[(f64, usize)]) -> Result<f64> {
    let evaluable: Vec<f64> = per_class.iter().filter(|(_, n)| *n > 0).map(|(ap, _)| *ap).collect();
    if evaluable.is_empty() {
        return Err(Error::Empty("no class has relevant segments"));
    }
    let sum: NeumaierSum = evaluable.iter().copied().collect();
    Ok(sum.total() / evaluable.len() as f64)
}

/// Fraction of the class's relevant segments present in the list.
pub fn recall_in_list(ranked: &RankedList, relevant: &BTreeSet<SegmentRef>) -> Option<f64> {
    if relevant.is_empty() {
        return None;
    }
    let hits = ranked.segments().filter(|s| relevant.contains(*s)).count();
    Some(hits as f64 / relevant.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_id: usize,
    pub segment: SegmentRef,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class_id: usize,
    pub ap: f64,
    pub n_c: usize,
    pub recall_at_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub map: f64,
    /// Classes with `N_c > 0`, ascending.
    pub per_class: Vec<ClassReport>,
    /// Classes with `N_c = 0`, excluded from the mean.
    pub classes_skipped: Vec<usize>,
}

/// Groups predictions by class, ranks them and scores every class against
/// the ground truth. When `known_videos` is given, predictions for other
/// videos are rejected.
pub fn evaluate(
    predictions: &[Prediction],
    truth: &GroundTruth,
    known_videos: Option<&BTreeSet<String>>,
    cap: usize,
) -> Result<EvalReport> {
    let num_classes = truth.num_classes();
    let mut per_class_scores: Vec<Vec<(SegmentRef, f64)>> = vec![Vec::new(); num_classes];
    for p in predictions {
        if p.class_id >= num_classes {
            return Err(Error::ClassOutOfRange { class_id: p.class_id, num_classes });
        }
        if known_videos.is_some_and(|known| !known.contains(&p.segment.video_id)) {
            return Err(Error::UnknownVideo(p.segment.video_id.clone()));
        }
        per_class_scores[p.class_id].push((p.segment.clone(), p.score));
    }

    let mut per_class = Vec::new();
    let mut classes_skipped = Vec::new();
    for (class_id, scores) in per_class_scores.into_iter().enumerate() {
        let relevant = truth.positives(class_id);
        let ranked = rank_segments(class_id, scores, cap)?;
        if relevant.is_empty() {
            classes_skipped.push(class_id);
            continue;
        }
        let ap = average_precision(&ranked, relevant, relevant.len())?;
        let recall_at_cap = recall_in_list(&ranked, relevant).expect("nonempty relevant set");
        per_class.push(ClassReport { class_id, ap, n_c: relevant.len(), recall_at_cap });
    }
    let pairs: Vec<(f64, usize)> = per_class.iter().map(|c| (c.ap, c.n_c)).collect();
    let map = mean_average_precision(&pairs)?;
    Ok(EvalReport { map, per_class, classes_skipped })
}

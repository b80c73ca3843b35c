//! Video-level candidate generation.
//!
//! A multi-label logistic model over mean-pooled video features scores every
//! `(video, class)` pair. For each class the top-K videos are kept and all of
//! their segments become candidates for that class.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{enumerate_segments, video_encoding, Corpus, GroundTruth, SegmentRef};
use crate::logistic::{LogisticHeads, LogisticHyper, Target};
use crate::math::NeumaierSum;
use crate::{Error, Result};

/// Default number of videos kept per class.
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoModel {
    /// One row of `dim` weights per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub trained_epochs: usize,
}

impl VideoModel {
    pub fn zeros(num_classes: usize, dim: usize) -> Self {
        let heads = LogisticHeads::zeros(num_classes, dim);
        Self { weights: heads.weights, bias: heads.bias, trained_epochs: 0 }
    }

    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn heads(&self) -> LogisticHeads {
        LogisticHeads { weights: self.weights.clone(), bias: self.bias.clone() }
    }
}

/// Video-level training examples: pooled inputs in corpus order and one
/// target per video label.
pub fn video_targets(corpus: &Corpus) -> (Vec<Vec<f64>>, Vec<Target>) {
    let inputs = corpus.videos().iter().map(video_encoding).collect();
    let targets = corpus
        .video_labels()
        .iter()
        .map(|l| Target {
            example: corpus.video_index(&l.video_id).expect("validated corpus"),
            class_id: l.class_id,
            label: l.label,
        })
        .collect();
    (inputs, targets)
}

/// Trains the video model; also returns the objective after every epoch.
pub fn train_video_model(corpus: &Corpus, hyper: &LogisticHyper) -> Result<(VideoModel, Vec<f64>)> {
    if corpus.video_labels().is_empty() {
        return Err(Error::Empty("corpus has no video labels"));
    }
    let (inputs, targets) = video_targets(corpus);
    let (heads, history) = LogisticHeads::fit(&inputs, &targets, corpus.num_classes(), corpus.dim(), hyper)?;
    let model = VideoModel { weights: heads.weights, bias: heads.bias, trained_epochs: hyper.epochs };
    Ok((model, history))
}

/// `V × C` matrix of video-level probabilities, rows in corpus video order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    video_ids: Vec<String>,
    index: BTreeMap<String, usize>,
    num_classes: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(video_ids: Vec<String>, num_classes: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != video_ids.len() * num_classes {
            return Err(Error::LengthMismatch { left: data.len(), right: video_ids.len() * num_classes });
        }
        let mut index = BTreeMap::new();
        for (i, id) in video_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVideo(id.clone()));
            }
        }
        Ok(Self { video_ids, index, num_classes, data })
    }

    pub fn video_ids(&self) -> &[String] {
        &self.video_ids
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, video: usize) -> &[f64] {
        &self.data[video * self.num_classes..(video + 1) * self.num_classes]
    }

    pub fn get(&self, video: usize, class_id: usize) -> f64 {
        self.data[video * self.num_classes + class_id]
    }

    pub fn score(&self, video_id: &str, class_id: usize) -> Option<f64> {
        if class_id >= self.num_classes {
            return None;
        }
        let idx = self.position(video_id)?;
        Some(self.get(idx, class_id))
    }

    pub fn position(&self, video_id: &str) -> Option<usize> {
        self.index.get(video_id).copied()
    }
}

pub fn predict_video_scores(model: &VideoModel, corpus: &Corpus) -> Result<ScoreMatrix> {
    if model.dim() != corpus.dim() {
        return Err(Error::DimensionMismatch {
            context: "video model".to_string(),
            expected: corpus.dim(),
            found: model.dim(),
        });
    }
    if model.num_classes() != corpus.num_classes() {
        return Err(Error::DimensionMismatch {
            context: "video model classes".to_string(),
            expected: corpus.num_classes(),
            found: model.num_classes(),
        });
    }
    let heads = model.heads();
    let mut data = Vec::with_capacity(corpus.videos().len() * model.num_classes());
    for video in corpus.videos() {
        let x = video_encoding(video);
        data.extend((0..model.num_classes()).map(|c| heads.predict(c, &x)));
    }
    let ids = corpus.videos().iter().map(|v| v.id().to_string()).collect();
    ScoreMatrix::new(ids, model.num_classes(), data)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassCandidates {
    /// Selected videos, best first.
    pub videos: Vec<String>,
    /// Candidate segments sorted by `(video_id, start)`.
    pub segments: Vec<SegmentRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub k: usize,
    pub per_class: Vec<ClassCandidates>,
}

impl CandidateSet {
    /// Rebuilds a candidate set from per-class segment lists (e.g. read back
    /// from disk). Selected videos are the distinct video ids in id order.
    pub fn from_segments(per_class: Vec<Vec<SegmentRef>>) -> Self {
        let per_class: Vec<ClassCandidates> = per_class
            .into_iter()
            .map(|mut segments| {
                segments.sort();
                segments.dedup();
                let mut videos: Vec<String> = segments.iter().map(|s| s.video_id.clone()).collect();
                videos.dedup();
                ClassCandidates { videos, segments }
            })
            .collect();
        let k = per_class.iter().map(|c| c.videos.len()).max().unwrap_or(0);
        Self { k, per_class }
    }

    /// Every segment of every video for every class: no pruning.
    pub fn all_pairs(corpus: &Corpus, length: usize, stride: usize) -> Result<Self> {
        let mut segments = corpus.all_segments(length, stride)?;
        segments.sort();
        let mut videos: Vec<String> = corpus.videos().iter().map(|v| v.id().to_string()).collect();
        videos.sort();
        let per_class = (0..corpus.num_classes())
            .map(|_| ClassCandidates { videos: videos.clone(), segments: segments.clone() })
            .collect();
        Ok(Self { k: corpus.videos().len(), per_class })
    }

    pub fn num_classes(&self) -> usize {
        self.per_class.len()
    }

    pub fn segments(&self, class_id: usize) -> &[SegmentRef] {
        &self.per_class[class_id].segments
    }

    pub fn contains(&self, class_id: usize, segment: &SegmentRef) -> bool {
        self.per_class
            .get(class_id)
            .is_some_and(|c| c.segments.binary_search(segment).is_ok())
    }

    /// Number of `(segment, class)` pairs.
    pub fn total_pairs(&self) -> usize {
        self.per_class.iter().map(|c| c.segments.len()).sum()
    }

    /// `(class, segment)` pairs ordered by class, then `(video_id, start)`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, &SegmentRef)> {
        self.per_class
            .iter()
            .enumerate()
            .flat_map(|(c, cand)| cand.segments.iter().map(move |s| (c, s)))
    }
}

/// Keeps, per class, the segments of the `k` highest-scoring videos. Ties are
/// broken by video id ascending; `k > V` is clamped to `V`.
pub fn select_candidates(
    scores: &ScoreMatrix,
    corpus: &Corpus,
    k: usize,
    length: usize,
    stride: usize,
) -> Result<CandidateSet> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".to_string()));
    }
    if scores.num_classes() != corpus.num_classes() {
        return Err(Error::DimensionMismatch {
            context: "score matrix classes".to_string(),
            expected: corpus.num_classes(),
            found: scores.num_classes(),
        });
    }
    // score row of every corpus video
    let mut rows = Vec::with_capacity(corpus.videos().len());
    for video in corpus.videos() {
        let row = scores
            .position(video.id())
            .ok_or_else(|| Error::MissingScore { video_id: video.id().to_string(), class_id: 0 })?;
        rows.push(row);
    }
    let v = corpus.videos().len();
    if k > v {
        log::warn!("k = {k} exceeds the {v} videos in the corpus; using k = {v}");
    }
    let k = k.min(v);

    let per_video_segments: Vec<Vec<SegmentRef>> = corpus
        .videos()
        .iter()
        .map(|video| enumerate_segments(video, length, stride))
        .collect::<Result<_>>()?;

    let mut per_class = Vec::with_capacity(corpus.num_classes());
    for c in 0..corpus.num_classes() {
        let mut order: Vec<usize> = (0..v).collect();
        order.sort_by(|&a, &b| {
            let (sa, sb) = (scores.get(rows[a], c), scores.get(rows[b], c));
            sb.total_cmp(&sa).then_with(|| corpus.videos()[a].id().cmp(corpus.videos()[b].id()))
        });
        order.truncate(k);
        let videos = order.iter().map(|&i| corpus.videos()[i].id().to_string()).collect();
        let mut segments: Vec<SegmentRef> =
            order.iter().flat_map(|&i| per_video_segments[i].iter().cloned()).collect();
        segments.sort();
        per_class.push(ClassCandidates { videos, segments });
    }
    Ok(CandidateSet { k, per_class })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecallReport {
    /// `None` for classes without ground-truth positives.
    pub per_class: Vec<Option<f64>>,
    /// Mean over classes with at least one positive.
    pub mean: f64,
}

/// Fraction of ground-truth positives of each class present in the candidates.
pub fn candidate_recall(candidates: &CandidateSet, truth: &GroundTruth) -> Result<RecallReport> {
    if truth.is_empty() {
        return Err(Error::Empty("ground truth has no positives"));
    }
    let per_class: Vec<Option<f64>> = (0..truth.num_classes())
        .map(|c| {
            let positives = truth.positives(c);
            if positives.is_empty() {
                return None;
            }
            let hit = positives.iter().filter(|s| candidates.contains(c, s)).count();
            Some(hit as f64 / positives.len() as f64)
        })
        .collect();
    let evaluable: NeumaierSum = per_class.iter().flatten().copied().collect();
    let n = per_class.iter().flatten().count();
    Ok(RecallReport { per_class, mean: evaluable.total() / n as f64 })
}

//! Class-conditioned pair features.
//!
//! A `(segment, class)` pair is described by the segment encoding, the class
//! id (a categorical feature), the video-level candidate score and two
//! similarity sums against the labelled exemplars of the class:
//!
//! ```text
//! sim_pos(x, c) = Σ_{u ≠ v} Σ_{s ∈ pos_c(u)} cos(x, s)
//! sim_neg(x, c) = Σ_{u ≠ v} Σ_{s ∈ neg_c(u)} cos(x, s)
//! ```
//!
//! where `v` is the segment's own video. Exemplars from the same video are
//! skipped, so a labelled segment never sees its own label.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::candgen::{CandidateSet, ScoreMatrix};
use crate::data::{segment_encoding, Corpus, SegmentRef};
use crate::math::{dot, norm};
use crate::{Error, Result};

/// Feature index of the class id in [`PairFeatureRow::to_features`].
pub const CLASS_FEATURE: usize = 0;
/// Numeric slots in front of the encoding.
pub const LEADING_FEATURES: usize = 6;

fn cosine_with_norms(a: &[f64], a_norm: f64, b: &[f64], b_norm: f64) -> f64 {
    if a_norm == 0.0 || b_norm == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (a_norm * b_norm)).clamp(-1.0, 1.0)
}

/// Cosine of the angle between `a` and `b`; 0 when either is the zero vector.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(cosine_with_norms(a, norm(a), b, norm(b)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar {
    pub video_id: String,
    pub encoding: Vec<f64>,
    norm: f64,
}

impl Exemplar {
    pub fn new(video_id: impl Into<String>, encoding: Vec<f64>) -> Self {
        let norm = norm(&encoding);
        Self { video_id: video_id.into(), encoding, norm }
    }
}

/// Encodings of the labelled positive and negative segments of every class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStore {
    dim: usize,
    positives: Vec<Vec<Exemplar>>,
    negatives: Vec<Vec<Exemplar>>,
}

impl LabeledStore {
    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        let mut store = Self {
            dim: corpus.dim(),
            positives: vec![Vec::new(); corpus.num_classes()],
            negatives: vec![Vec::new(); corpus.num_classes()],
        };
        for label in corpus.segment_labels() {
            let exemplar = Exemplar::new(label.segment.video_id.clone(), segment_encoding(corpus, &label.segment)?);
            let bucket = if label.label { &mut store.positives } else { &mut store.negatives };
            bucket[label.class_id].push(exemplar);
        }
        Ok(store)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positives(&self, class_id: usize) -> &[Exemplar] {
        &self.positives[class_id]
    }

    pub fn negatives(&self, class_id: usize) -> &[Exemplar] {
        &self.negatives[class_id]
    }

    /// Similarity features of an encoding that belongs to `video_id`.
    pub fn similarity(&self, video_id: &str, class_id: usize, encoding: &[f64]) -> Result<SimFeatures> {
        if class_id >= self.positives.len() {
            return Err(Error::ClassOutOfRange { class_id, num_classes: self.positives.len() });
        }
        if encoding.len() != self.dim {
            return Err(Error::LengthMismatch { left: encoding.len(), right: self.dim });
        }
        let enc_norm = norm(encoding);
        let sum = |exemplars: &[Exemplar]| {
            let mut total = 0.0;
            let mut count = 0;
            for e in exemplars.iter().filter(|e| e.video_id != video_id) {
                total += cosine_with_norms(encoding, enc_norm, &e.encoding, e.norm);
                count += 1;
            }
            (total, count)
        };
        let (sim_pos, pos_count) = sum(&self.positives[class_id]);
        let (sim_neg, neg_count) = sum(&self.negatives[class_id]);
        Ok(SimFeatures { sim_pos, sim_neg, pos_count, neg_count })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimFeatures {
    pub sim_pos: f64,
    pub sim_neg: f64,
    pub pos_count: usize,
    pub neg_count: usize,
}

pub fn sim_features(
    segment: &SegmentRef,
    class_id: usize,
    store: &LabeledStore,
    corpus: &Corpus,
) -> Result<SimFeatures> {
    let encoding = segment_encoding(corpus, segment)?;
    store.similarity(&segment.video_id, class_id, &encoding)
}

/// Model input for one `(segment, class)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatureRow {
    pub encoding: Vec<f64>,
    pub candidate_score: f64,
    pub class_id: usize,
    pub sim: SimFeatures,
}

impl PairFeatureRow {
    pub fn width(dim: usize) -> usize {
        dim + LEADING_FEATURES
    }

    /// `[class_id, candidate_score, sim_pos, sim_neg, pos_count, neg_count, enc_0, ..]`
    pub fn to_features(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::width(self.encoding.len()));
        out.extend_from_slice(&[
            self.class_id as f64,
            self.candidate_score,
            self.sim.sim_pos,
            self.sim.sim_neg,
            self.sim.pos_count as f64,
            self.sim.neg_count as f64,
        ]);
        out.extend_from_slice(&self.encoding);
        out
    }

    /// Same row with `sim_pos` and `sim_neg` zeroed (counts kept).
    pub fn without_sim(mut self) -> Self {
        self.sim.sim_pos = 0.0;
        self.sim.sim_neg = 0.0;
        self
    }
}

/// Names matching [`PairFeatureRow::to_features`].
pub fn feature_names(dim: usize) -> Vec<String> {
    let mut names: Vec<String> = ["class_id", "candidate_score", "sim_pos", "sim_neg", "pos_count", "neg_count"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend((0..dim).map(|i| alloc::format!("enc_{i}")));
    names
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub segment: SegmentRef,
    pub row: PairFeatureRow,
}

struct EncodingCache<'a> {
    corpus: &'a Corpus,
    cache: BTreeMap<SegmentRef, Vec<f64>>,
}

impl<'a> EncodingCache<'a> {
    fn new(corpus: &'a Corpus) -> Self {
        Self { corpus, cache: BTreeMap::new() }
    }

    fn get(&mut self, segment: &SegmentRef) -> Result<Vec<f64>> {
        if let Some(enc) = self.cache.get(segment) {
            return Ok(enc.clone());
        }
        let enc = segment_encoding(self.corpus, segment)?;
        self.cache.insert(segment.clone(), enc.clone());
        Ok(enc)
    }
}

fn pair_row(
    segment: &SegmentRef,
    class_id: usize,
    encoding: Vec<f64>,
    scores: &ScoreMatrix,
    store: &LabeledStore,
) -> Result<PairFeatureRow> {
    let candidate_score = scores.score(&segment.video_id, class_id).ok_or_else(|| Error::MissingScore {
        video_id: segment.video_id.clone(),
        class_id,
    })?;
    let sim = store.similarity(&segment.video_id, class_id, &encoding)?;
    Ok(PairFeatureRow { encoding, candidate_score, class_id, sim })
}

/// One row per candidate `(segment, class)` pair, ordered by class, then
/// `(video_id, start)`.
pub fn build_pair_rows(
    candidates: &CandidateSet,
    scores: &ScoreMatrix,
    store: &LabeledStore,
    corpus: &Corpus,
) -> Result<Vec<PairRow>> {
    if candidates.total_pairs() == 0 {
        return Err(Error::Empty("candidate set has no pairs"));
    }
    let mut cache = EncodingCache::new(corpus);
    let mut rows = Vec::with_capacity(candidates.total_pairs());
    for (class_id, segment) in candidates.pairs() {
        let encoding = cache.get(segment)?;
        let row = pair_row(segment, class_id, encoding, scores, store)?;
        rows.push(PairRow { segment: segment.clone(), row });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub segment: SegmentRef,
    pub row: PairFeatureRow,
    pub label: bool,
}

/// One labelled row per segment label, in corpus label order.
pub fn build_training_rows(corpus: &Corpus, store: &LabeledStore, scores: &ScoreMatrix) -> Result<Vec<TrainingRow>> {
    let labels = corpus.segment_labels();
    let first = labels.first().ok_or(Error::Empty("corpus has no segment labels"))?.label;
    if labels.iter().all(|l| l.label == first) {
        return Err(Error::DegenerateLabels(first));
    }
    let mut cache = EncodingCache::new(corpus);
    labels
        .iter()
        .map(|l| {
            let encoding = cache.get(&l.segment)?;
            let row = pair_row(&l.segment, l.class_id, encoding, scores, store)?;
            Ok(TrainingRow { segment: l.segment.clone(), row, label: l.label })
        })
        .collect()
}

//! Seeded synthetic corpora with clustered classes and sparse segment labels.
//!
//! Classes are grouped into clusters. Each cluster gets a random prototype and
//! each class prototype sits at a small random offset from its cluster's
//! prototype, so classes in one cluster look alike. Every video has one topic
//! class; each of its segments is either a positive for that class (frames
//! drawn around the class prototype) or background (zero-mean noise). Segment
//! labels are sampled from `(segment, class)` pairs where the class shares a
//! cluster with the video's topic, which makes sibling-class segments the
//! hard negatives.
//!
//! All randomness comes from ChaCha streams keyed by `(seed, entity)`, so the
//! output does not depend on generation order.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use crate::data::GroundTruth;
use crate::data::{enumerate_segments, Corpus, SegmentLabel, SegmentRef, Video, VideoLabel};
use crate::math::norm;
use crate::{Error, Result};

/// Class offsets are this fraction of the smallest inter-cluster distance
/// (must stay below 1/4).
const OFFSET_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub num_videos: usize,
    pub frames_per_video: usize,
    pub dim: usize,
    pub num_classes: usize,
    pub clusters: usize,
    pub noise_sigma: f64,
    pub positive_segment_rate: f64,
    pub label_rate: f64,
    pub segment_length: usize,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            num_videos: 500,
            frames_per_video: 25,
            dim: 16,
            num_classes: 20,
            clusters: 5,
            noise_sigma: 0.3,
            positive_segment_rate: 0.4,
            label_rate: 0.05,
            segment_length: 5,
            seed: 7,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.num_videos == 0 || self.dim == 0 || self.num_classes == 0 || self.clusters == 0 {
            return invalid("num_videos, dim, num_classes and clusters must be positive");
        }
        if self.segment_length == 0 || self.frames_per_video < self.segment_length {
            return invalid("frames_per_video must hold at least one segment");
        }
        if self.num_classes % self.clusters != 0 {
            return invalid("clusters must divide num_classes");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return invalid("noise_sigma must be a nonnegative real");
        }
        if !(self.positive_segment_rate > 0.0 && self.positive_segment_rate < 1.0) {
            return invalid("positive_segment_rate must lie in (0, 1)");
        }
        if !(self.label_rate > 0.0 && self.label_rate <= 1.0) {
            return invalid("label_rate must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn classes_per_cluster(&self) -> usize {
        self.num_classes / self.clusters
    }

    pub fn cluster_of(&self, class_id: usize) -> usize {
        class_id / self.classes_per_cluster()
    }

    pub fn segments_per_video(&self) -> usize {
        (self.frames_per_video - self.segment_length) / self.segment_length + 1
    }
}

/// Generator output.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub corpus: Corpus,
    pub ground_truth: GroundTruth,
    pub class_prototypes: Vec<Vec<f32>>,
    /// Topic class of every video, in corpus order.
    pub topics: Vec<usize>,
}

#[derive(Clone, Copy)]
#[repr(u8)]
enum Stream {
    ClusterPrototype = 1,
    ClassOffset = 2,
    VideoTopic = 3,
    SegmentDraw = 4,
    FrameNoise = 5,
    LabelPick = 6,
}

fn rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    debug_assert!(index < 1 << 56);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 56) | index);
    rng
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn video_id(index: usize, total: usize) -> String {
    let width = format!("{}", total.saturating_sub(1)).len();
    format!("v{index:0width$}")
}

fn class_prototypes(spec: &GeneratorSpec) -> Vec<Vec<f32>> {
    let clusters: Vec<Vec<f64>> = (0..spec.clusters)
        .map(|k| gaussian_vec(&mut rng(spec.seed, Stream::ClusterPrototype, k as u64), spec.dim))
        .collect();
    let mut min_distance = f64::INFINITY;
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            min_distance = min_distance.min(norm(&diff));
        }
    }
    if !min_distance.is_finite() {
        // single cluster: scale offsets to the prototype itself
        min_distance = norm(&clusters[0]);
    }
    let radius = OFFSET_FRACTION * min_distance;
    (0..spec.num_classes)
        .map(|c| {
            let mut r = rng(spec.seed, Stream::ClassOffset, c as u64);
            let direction = gaussian_vec(&mut r, spec.dim);
            let len = norm(&direction);
            let scale = if len > 0.0 { radius / len } else { 0.0 };
            clusters[spec.cluster_of(c)]
                .iter()
                .zip(&direction)
                .map(|(p, d)| (p + scale * d) as f32)
                .collect()
        })
        .collect()
}

/// Generates a corpus and its ground truth. Deterministic in `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Synthetic> {
    spec.validate()?;
    let prototypes = class_prototypes(spec);
    let segments_per_video = spec.segments_per_video();
    let length = spec.segment_length;
    let per_cluster = spec.classes_per_cluster();

    let mut videos = Vec::with_capacity(spec.num_videos);
    let mut topics = Vec::with_capacity(spec.num_videos);
    let mut positive_mask = Vec::with_capacity(spec.num_videos);
    for v in 0..spec.num_videos {
        let mut topic_rng = rng(spec.seed, Stream::VideoTopic, v as u64);
        let topic = (topic_rng.next_u64() % spec.num_classes as u64) as usize;
        let forced = (topic_rng.next_u64() % segments_per_video as u64) as usize;

        let mut positive: Vec<bool> = (0..segments_per_video)
            .map(|s| {
                let key = (v * segments_per_video + s) as u64;
                unit_f64(&mut rng(spec.seed, Stream::SegmentDraw, key)) < spec.positive_segment_rate
            })
            .collect();
        if !positive.iter().any(|&p| p) {
            positive[forced] = true;
        }

        let mut noise = rng(spec.seed, Stream::FrameNoise, v as u64);
        let mut data = Vec::with_capacity(spec.frames_per_video * spec.dim);
        for frame in 0..spec.frames_per_video {
            let segment = frame / length;
            let on_topic = segment < segments_per_video && positive[segment];
            for j in 0..spec.dim {
                let base = if on_topic { f64::from(prototypes[topic][j]) } else { 0.0 };
                let z: f64 = StandardNormal.sample(&mut noise);
                data.push((base + spec.noise_sigma * z) as f32);
            }
        }
        videos.push(Video::from_flat(video_id(v, spec.num_videos), spec.dim, data)?);
        topics.push(topic);
        positive_mask.push(positive);
    }

    let mut ground_truth = GroundTruth::new(spec.num_classes);
    let mut video_labels = Vec::with_capacity(spec.num_videos * spec.num_classes);
    for (v, video) in videos.iter().enumerate() {
        for (s, segment) in enumerate_segments(video, length, length)?.into_iter().enumerate() {
            if positive_mask[v][s] {
                ground_truth.insert(topics[v], segment)?;
            }
        }
        for c in 0..spec.num_classes {
            video_labels.push(VideoLabel {
                video_id: video.id().to_string(),
                class_id: c,
                label: c == topics[v],
            });
        }
    }

    // Cluster-local pairs are indexed (video, segment, class-within-cluster);
    // the `label_rate` fraction with the smallest keyed draws get labels.
    let total_pairs = spec.num_videos * segments_per_video * per_cluster;
    let wanted = libm::round(spec.label_rate * total_pairs as f64) as usize;
    let mut draws: Vec<(u64, usize)> = (0..total_pairs)
        .map(|i| (rng(spec.seed, Stream::LabelPick, i as u64).next_u64(), i))
        .collect();
    draws.sort_unstable();
    let mut picked: Vec<usize> = draws.into_iter().take(wanted).map(|(_, i)| i).collect();
    picked.sort_unstable();

    let segment_labels = picked
        .into_iter()
        .map(|i| {
            let v = i / (segments_per_video * per_cluster);
            let s = (i / per_cluster) % segments_per_video;
            let class_id = spec.cluster_of(topics[v]) * per_cluster + i % per_cluster;
            SegmentLabel {
                segment: SegmentRef::new(videos[v].id(), s * length, length),
                class_id,
                label: positive_mask[v][s] && class_id == topics[v],
            }
        })
        .collect();

    let corpus = Corpus::new(videos, spec.num_classes, video_labels, segment_labels)?
        .with_segment_length(length)?;
    Ok(Synthetic { corpus, ground_truth, class_prototypes: prototypes, topics })
}

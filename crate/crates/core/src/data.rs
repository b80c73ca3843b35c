//! Corpus data model: videos as frame-feature matrices, segment references,
//! video/segment labels, segment enumeration and mean pooling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default segment length in frames.
pub const DEFAULT_SEGMENT_LENGTH: usize = 5;

/// A video as a dense `frames × dim` matrix of 32-bit features.
#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    id: String,
    dim: usize,
    data: Vec<f32>,
}

impl Video {
    pub fn new(id: impl Into<String>, frames: Vec<Vec<f32>>) -> Result<Self> {
        let id = id.into();
        let dim = frames.first().map(Vec::len).ok_or_else(|| Error::EmptyVideo(id.clone()))?;
        let mut data = Vec::with_capacity(frames.len() * dim);
        for (i, frame) in frames.iter().enumerate() {
            if frame.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("video `{id}` frame {i}"),
                    expected: dim,
                    found: frame.len(),
                });
            }
            data.extend_from_slice(frame);
        }
        Self::from_flat(id, dim, data)
    }

    /// Builds a video from row-major frame data.
    pub fn from_flat(id: impl Into<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        let id = id.into();
        if dim == 0 || data.is_empty() {
            return Err(Error::EmptyVideo(id));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                context: format!("video `{id}` flat data"),
                expected: dim,
                found: data.len() % dim,
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("video `{id}` frames")));
        }
        Ok(Self { id, dim, data })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_frames(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn frame(&self, index: usize) -> &[f32] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn frames(&self) -> core::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.dim)
    }

    /// Frames `[start, start + length)`; `None` when the window leaves the video.
    pub fn window(&self, start: usize, length: usize) -> Option<core::slice::ChunksExact<'_, f32>> {
        let end = start.checked_add(length)?;
        if length == 0 || end > self.num_frames() {
            return None;
        }
        Some(self.data[start * self.dim..end * self.dim].chunks_exact(self.dim))
    }

    /// Same video with every feature multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        Self {
            id: self.id.clone(),
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }
}

/// A window of consecutive frames `[start, start + length)` inside a video.
///
/// Orders by `(video_id, start, length)`, which is the tie-break used for
/// every ranking in the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SegmentRef {
    pub video_id: String,
    pub start: usize,
    pub length: usize,
}

impl SegmentRef {
    pub fn new(video_id: impl Into<String>, start: usize, length: usize) -> Self {
        Self { video_id: video_id.into(), start, length }
    }

    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

impl fmt::Display for SegmentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}..{}]", self.video_id, self.start, self.end())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoLabel {
    pub video_id: String,
    pub class_id: usize,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLabel {
    pub segment: SegmentRef,
    pub class_id: usize,
    pub label: bool,
}

/// A validated, immutable corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    videos: Vec<Video>,
    index: BTreeMap<String, usize>,
    dim: usize,
    num_classes: usize,
    video_labels: Vec<VideoLabel>,
    segment_labels: Vec<SegmentLabel>,
    segment_length: usize,
}

impl Corpus {
    /// Validates and assembles a corpus. Label order is preserved.
    pub fn new(
        videos: Vec<Video>,
        num_classes: usize,
        video_labels: Vec<VideoLabel>,
        segment_labels: Vec<SegmentLabel>,
    ) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::InvalidParameter("num_classes must be positive".to_string()));
        }
        let dim = videos.first().map(Video::dim).ok_or(Error::Empty("corpus has no videos"))?;
        let mut index = BTreeMap::new();
        for (i, video) in videos.iter().enumerate() {
            if video.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("video `{}`", video.id()),
                    expected: dim,
                    found: video.dim(),
                });
            }
            if index.insert(video.id().to_string(), i).is_some() {
                return Err(Error::DuplicateVideo(video.id().to_string()));
            }
        }

        let check_class = |class_id: usize| {
            if class_id >= num_classes {
                Err(Error::ClassOutOfRange { class_id, num_classes })
            } else {
                Ok(())
            }
        };

        let mut seen_video = BTreeSet::new();
        for label in &video_labels {
            if !index.contains_key(&label.video_id) {
                return Err(Error::UnknownVideo(label.video_id.clone()));
            }
            check_class(label.class_id)?;
            if !seen_video.insert((label.video_id.as_str(), label.class_id)) {
                return Err(Error::DuplicateLabel(format!(
                    "for video `{}` class {}",
                    label.video_id, label.class_id
                )));
            }
        }

        let mut seen_segment = BTreeSet::new();
        for label in &segment_labels {
            let video = index
                .get(&label.segment.video_id)
                .map(|&i| &videos[i])
                .ok_or_else(|| Error::UnknownVideo(label.segment.video_id.clone()))?;
            check_bounds(video, &label.segment)?;
            check_class(label.class_id)?;
            if !seen_segment.insert((&label.segment, label.class_id)) {
                return Err(Error::DuplicateLabel(format!(
                    "for segment {} class {}",
                    label.segment, label.class_id
                )));
            }
        }
        drop(seen_video);
        drop(seen_segment);

        Ok(Self {
            videos,
            index,
            dim,
            num_classes,
            video_labels,
            segment_labels,
            segment_length: DEFAULT_SEGMENT_LENGTH,
        })
    }

    pub fn with_segment_length(mut self, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidParameter("segment length must be at least 1".to_string()));
        }
        self.segment_length = length;
        Ok(self)
    }

    pub fn videos(&self) -> &[Video] {
        &self.videos
    }

    pub fn video(&self, id: &str) -> Option<&Video> {
        self.index.get(id).map(|&i| &self.videos[i])
    }

    pub fn video_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn video_labels(&self) -> &[VideoLabel] {
        &self.video_labels
    }

    pub fn segment_labels(&self) -> &[SegmentLabel] {
        &self.segment_labels
    }

    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    /// Copy of the corpus with all frame features multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        Self {
            videos: self.videos.iter().map(|v| v.scaled(factor)).collect(),
            ..self.clone()
        }
    }

    /// Copy of the corpus with a different segment label set.
    pub fn with_segment_labels(&self, segment_labels: Vec<SegmentLabel>) -> Result<Self> {
        Self::new(self.videos.clone(), self.num_classes, self.video_labels.clone(), segment_labels)?
            .with_segment_length(self.segment_length)
    }

    /// All segments of every video, in video order.
    pub fn all_segments(&self, length: usize, stride: usize) -> Result<Vec<SegmentRef>> {
        let mut out = Vec::new();
        for video in &self.videos {
            out.extend(enumerate_segments(video, length, stride)?);
        }
        Ok(out)
    }
}

fn check_bounds(video: &Video, segment: &SegmentRef) -> Result<()> {
    if segment.length == 0 || segment.start.saturating_add(segment.length) > video.num_frames() {
        return Err(Error::SegmentOutOfBounds {
            video_id: segment.video_id.clone(),
            start: segment.start,
            length: segment.length,
            frames: video.num_frames(),
        });
    }
    Ok(())
}

/// Full windows of `length` frames starting at `0, stride, 2*stride, ...`.
/// A trailing partial window is dropped.
pub fn enumerate_segments(video: &Video, length: usize, stride: usize) -> Result<Vec<SegmentRef>> {
    if length == 0 || stride == 0 {
        return Err(Error::InvalidParameter(format!(
            "segment length ({length}) and stride ({stride}) must be at least 1"
        )));
    }
    let frames = video.num_frames();
    if frames < length {
        return Ok(Vec::new());
    }
    Ok((0..=frames - length)
        .step_by(stride)
        .map(|start| SegmentRef::new(video.id(), start, length))
        .collect())
}

/// Element-wise mean of the rows, accumulated in `f64`.
pub fn mean_pool<'a, T, I>(rows: I) -> Result<Vec<f64>>
where
    T: Copy + Into<f64> + 'a,
    I: IntoIterator<Item = &'a [T]>,
{
    let mut rows = rows.into_iter();
    let first = rows.next().ok_or(Error::Empty("mean_pool over zero rows"))?;
    let mut acc: Vec<f64> = first.iter().map(|&x| x.into()).collect();
    let mut n = 1usize;
    for row in rows {
        if row.len() != acc.len() {
            return Err(Error::DimensionMismatch {
                context: "mean_pool row".to_string(),
                expected: acc.len(),
                found: row.len(),
            });
        }
        for (a, &x) in acc.iter_mut().zip(row) {
            *a += x.into();
        }
        n += 1;
    }
    let n = n as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(acc)
}

/// Mean of every frame of the video.
pub fn video_encoding(video: &Video) -> Vec<f64> {
    mean_pool(video.frames()).expect("videos have at least one frame")
}

/// Mean-pooled frame features of the segment.
pub fn segment_encoding(corpus: &Corpus, segment: &SegmentRef) -> Result<Vec<f64>> {
    let video = corpus
        .video(&segment.video_id)
        .ok_or_else(|| Error::UnknownVideo(segment.video_id.clone()))?;
    check_bounds(video, segment)?;
    mean_pool(video.window(segment.start, segment.length).expect("bounds checked"))
}

/// True-positive `(segment, class)` pairs, grouped by class.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    positives: Vec<BTreeSet<SegmentRef>>,
}

impl GroundTruth {
    pub fn new(num_classes: usize) -> Self {
        Self { positives: vec![BTreeSet::new(); num_classes] }
    }

    /// Adds a pair; returns `false` if it was already present.
    pub fn insert(&mut self, class_id: usize, segment: SegmentRef) -> Result<bool> {
        let num_classes = self.positives.len();
        let set = self
            .positives
            .get_mut(class_id)
            .ok_or(Error::ClassOutOfRange { class_id, num_classes })?;
        Ok(set.insert(segment))
    }

    pub fn num_classes(&self) -> usize {
        self.positives.len()
    }

    pub fn positives(&self, class_id: usize) -> &BTreeSet<SegmentRef> {
        &self.positives[class_id]
    }

    pub fn contains(&self, class_id: usize, segment: &SegmentRef) -> bool {
        self.positives.get(class_id).is_some_and(|s| s.contains(segment))
    }

    pub fn len(&self) -> usize {
        self.positives.iter().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pairs ordered by class, then segment.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &SegmentRef)> {
        self.positives
            .iter()
            .enumerate()
            .flat_map(|(c, set)| set.iter().map(move |s| (c, s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn video(id: &str, frames: Vec<Vec<f32>>) -> Video {
        Video::new(id, frames).unwrap()
    }

    fn blank(id: &str, frames: usize) -> Video {
        Video::from_flat(id, 2, vec![0.0; frames * 2]).unwrap()
    }

    #[test]
    fn minimal_corpus() {
        let corpus = Corpus::new(vec![video("a", vec![vec![1.0, 2.0], vec![3.0, 4.0]])], 1, vec![], vec![]).unwrap();
        assert_eq!(corpus.videos()[0].num_frames(), 2);
        assert_eq!(corpus.dim(), 2);
    }

    #[test]
    fn rejects_out_of_bounds_segment_label() {
        let label = SegmentLabel { segment: SegmentRef::new("a", 8, 5), class_id: 0, label: true };
        let err = Corpus::new(vec![blank("a", 10)], 1, vec![], vec![label]).unwrap_err();
        assert!(matches!(err, Error::SegmentOutOfBounds { .. }));
        assert!(err.to_string().contains("segment out of bounds"));
    }

    #[test]
    fn rejects_duplicate_segment_label() {
        let label = SegmentLabel { segment: SegmentRef::new("a", 0, 5), class_id: 0, label: true };
        let err = Corpus::new(vec![blank("a", 10)], 1, vec![], vec![label.clone(), label]).unwrap_err();
        assert!(err.to_string().contains("duplicate label"));
    }

    #[test]
    fn rejects_bad_references() {
        let unknown = VideoLabel { video_id: "zz".into(), class_id: 0, label: true };
        assert!(matches!(
            Corpus::new(vec![blank("a", 5)], 1, vec![unknown], vec![]),
            Err(Error::UnknownVideo(_))
        ));
        let class = VideoLabel { video_id: "a".into(), class_id: 3, label: true };
        assert!(matches!(
            Corpus::new(vec![blank("a", 5)], 3, vec![class], vec![]),
            Err(Error::ClassOutOfRange { class_id: 3, num_classes: 3 })
        ));
        let dup = VideoLabel { video_id: "a".into(), class_id: 0, label: true };
        assert!(matches!(
            Corpus::new(vec![blank("a", 5)], 1, vec![dup.clone(), dup], vec![]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn rejects_dimension_mismatch_and_non_finite() {
        let a = blank("a", 3);
        let b = Video::from_flat("b", 3, vec![0.0; 9]).unwrap();
        assert!(matches!(Corpus::new(vec![a, b], 1, vec![], vec![]), Err(Error::DimensionMismatch { .. })));
        assert!(Video::new("x", vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(matches!(Video::new("x", vec![vec![f32::NAN]]), Err(Error::NonFinite(_))));
        assert!(matches!(Video::new("x", vec![]), Err(Error::EmptyVideo(_))));
    }

    #[test]
    fn enumeration_examples() {
        let starts = |frames, length, stride| -> Vec<usize> {
            enumerate_segments(&blank("v", frames), length, stride)
                .unwrap()
                .into_iter()
                .map(|s| s.start)
                .collect()
        };
        assert_eq!(starts(12, 5, 5), vec![0, 5]);
        assert_eq!(starts(5, 5, 5), vec![0]);
        assert!(starts(4, 5, 1).is_empty());
        assert!(enumerate_segments(&blank("v", 4), 0, 1).is_err());
        assert!(enumerate_segments(&blank("v", 4), 1, 0).is_err());
    }

    #[test]
    fn mean_pool_examples() {
        let rows: [&[f64]; 2] = [&[1.0, 2.0], &[3.0, 4.0]];
        assert_eq!(mean_pool(rows).unwrap(), vec![2.0, 3.0]);
        let single: [&[f64]; 1] = [&[5.0, 7.0]];
        assert_eq!(mean_pool(single).unwrap(), vec![5.0, 7.0]);
        let three: [&[f64]; 3] = [&[1.0, 1.0], &[2.0, 2.0], &[6.0, 6.0]];
        assert_eq!(mean_pool(three).unwrap(), vec![3.0, 3.0]);
        let none: [&[f64]; 0] = [];
        assert!(matches!(mean_pool(none), Err(Error::Empty(_))));
    }

    #[test]
    fn segment_encoding_examples() {
        let v = video("v", vec![vec![0.0, 0.0], vec![2.0, 2.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 2.0], vec![3.0, 9.0]]);
        let corpus = Corpus::new(vec![v], 1, vec![], vec![]).unwrap();
        assert_eq!(segment_encoding(&corpus, &SegmentRef::new("v", 0, 2)).unwrap(), vec![1.0, 1.0]);
        assert_eq!(segment_encoding(&corpus, &SegmentRef::new("v", 5, 1)).unwrap(), vec![3.0, 9.0]);
        assert_eq!(segment_encoding(&corpus, &SegmentRef::new("v", 2, 3)).unwrap(), vec![1.0, 1.0]);
        assert!(matches!(
            segment_encoding(&corpus, &SegmentRef::new("v", 4, 3)),
            Err(Error::SegmentOutOfBounds { .. })
        ));
    }
}

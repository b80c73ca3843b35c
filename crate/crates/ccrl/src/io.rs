//! Readers and writers for every on-disk artifact.
//!
//! Corpus files are JSON lines (videos) and CSV (labels); models and reports
//! are JSON. Every reader reports the offending line on malformed input.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ccrl_core::eval::Prediction;
use ccrl_core::features::{feature_names, LEADING_FEATURES};
use ccrl_core::{
    CandidateSet, Corpus, GroundTruth, PairFeatureRow, SegmentLabel, SegmentRef, SimFeatures, Video, VideoLabel,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const VIDEO_LABELS_HEADER: [&str; 3] = ["video_id", "class_id", "label"];
pub const SEGMENT_LABELS_HEADER: [&str; 5] = ["video_id", "start", "length", "class_id", "label"];
pub const GROUND_TRUTH_HEADER: [&str; 4] = ["video_id", "start", "length", "class_id"];
pub const CANDIDATES_HEADER: [&str; 4] = ["class_id", "video_id", "start", "length"];
pub const PREDICTIONS_HEADER: [&str; 5] = ["class_id", "video_id", "start", "length", "score"];

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn parse_label(path: &Path, line: usize, value: u8) -> Result<bool> {
    match value {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(Error::parse(path, line, format!("label must be 0 or 1, got {other}"))),
    }
}

// ---------------------------------------------------------------------------
// videos

#[derive(Deserialize)]
struct VideoLine {
    id: String,
    frames: Vec<Vec<f32>>,
}

#[derive(Serialize)]
struct VideoLineRef<'a> {
    id: &'a str,
    frames: Vec<&'a [f32]>,
}

/// Reads a JSON-lines videos file. Blank lines are skipped.
pub fn read_videos(path: &Path) -> Result<Vec<Video>> {
    let mut videos = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let number = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: VideoLine = serde_json::from_str(&line).map_err(|e| Error::parse(path, number, e))?;
        if !ids.insert(record.id.clone()) {
            return Err(Error::parse(path, number, ccrl_core::Error::DuplicateVideo(record.id)));
        }
        let video = Video::new(record.id, record.frames).map_err(|e| Error::parse(path, number, e))?;
        if let Some(first) = videos.first().map(Video::dim).filter(|&d| d != video.dim()) {
            let err = ccrl_core::Error::DimensionMismatch {
                context: format!("video `{}`", video.id()),
                expected: first,
                found: video.dim(),
            };
            return Err(Error::parse(path, number, err));
        }
        videos.push(video);
    }
    Ok(videos)
}

pub fn write_videos(path: &Path, videos: &[Video]) -> Result<()> {
    let mut out = create(path)?;
    for video in videos {
        let record = VideoLineRef { id: video.id(), frames: video.frames().collect() };
        serde_json::to_writer(&mut out, &record).map_err(|e| Error::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// CSV helpers

/// Deserializes every record of a CSV file with exactly `header`, paired
/// with its 1-based line number.
fn read_csv<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<(usize, T)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| Error::parse(path, 1, e))?.clone();
    if headers.iter().ne(header.iter().copied()) {
        return Err(Error::parse(path, 1, format!("expected header `{}`", header.join(","))));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let value = record.deserialize(Some(&headers)).map_err(|e| Error::parse(path, line, e))?;
        out.push((line, value));
    }
    Ok(out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn write_row<I, S>(writer: &mut csv::Writer<BufWriter<File>>, path: &Path, row: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    writer.write_record(row).map_err(|e| Error::io(path, e.into()))
}

fn finish(mut writer: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    writer.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// labels and corpus

#[derive(Deserialize)]
struct VideoLabelLine {
    video_id: String,
    class_id: usize,
    label: u8,
}

#[derive(Deserialize)]
struct SegmentLabelLine {
    video_id: String,
    start: usize,
    length: usize,
    class_id: usize,
    label: u8,
}

/// Video labels with their line numbers.
pub fn read_video_labels(path: &Path) -> Result<Vec<(usize, VideoLabel)>> {
    read_csv::<VideoLabelLine>(path, &VIDEO_LABELS_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let label = parse_label(path, line, r.label)?;
            Ok((line, VideoLabel { video_id: r.video_id, class_id: r.class_id, label }))
        })
        .collect()
}

/// Segment labels with their line numbers.
pub fn read_segment_labels(path: &Path) -> Result<Vec<(usize, SegmentLabel)>> {
    read_csv::<SegmentLabelLine>(path, &SEGMENT_LABELS_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let label = parse_label(path, line, r.label)?;
            let segment = SegmentRef::new(r.video_id, r.start, r.length);
            Ok((line, SegmentLabel { segment, class_id: r.class_id, label }))
        })
        .collect()
}

pub fn write_video_labels(path: &Path, labels: &[VideoLabel]) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, VIDEO_LABELS_HEADER)?;
    for l in labels {
        write_row(&mut w, path, [l.video_id.clone(), l.class_id.to_string(), u8::from(l.label).to_string()])?;
    }
    finish(w, path)
}

pub fn write_segment_labels(path: &Path, labels: &[SegmentLabel]) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, SEGMENT_LABELS_HEADER)?;
    for l in labels {
        let s = &l.segment;
        write_row(
            &mut w,
            path,
            [
                s.video_id.clone(),
                s.start.to_string(),
                s.length.to_string(),
                l.class_id.to_string(),
                u8::from(l.label).to_string(),
            ],
        )?;
    }
    finish(w, path)
}

fn check_class(path: &Path, line: usize, class_id: usize, num_classes: usize) -> Result<()> {
    if class_id >= num_classes {
        return Err(Error::parse(path, line, ccrl_core::Error::ClassOutOfRange { class_id, num_classes }));
    }
    Ok(())
}

fn check_segment(path: &Path, line: usize, segment: &SegmentRef, videos: &BTreeMap<&str, &Video>) -> Result<()> {
    let video = videos
        .get(segment.video_id.as_str())
        .ok_or_else(|| Error::parse(path, line, ccrl_core::Error::UnknownVideo(segment.video_id.clone())))?;
    if segment.length == 0 || video.window(segment.start, segment.length).is_none() {
        let err = ccrl_core::Error::SegmentOutOfBounds {
            video_id: segment.video_id.clone(),
            start: segment.start,
            length: segment.length,
            frames: video.num_frames(),
        };
        return Err(Error::parse(path, line, err));
    }
    Ok(())
}

/// Loads and validates a corpus. Label errors point at the offending line.
pub fn load_corpus(
    videos_path: &Path,
    video_labels_path: &Path,
    segment_labels_path: &Path,
    num_classes: usize,
) -> Result<Corpus> {
    let videos = read_videos(videos_path)?;
    let by_id: BTreeMap<&str, &Video> = videos.iter().map(|v| (v.id(), v)).collect();

    let video_labels = read_video_labels(video_labels_path)?;
    let mut seen = BTreeSet::new();
    for (line, l) in &video_labels {
        let path = video_labels_path;
        if !by_id.contains_key(l.video_id.as_str()) {
            return Err(Error::parse(path, *line, ccrl_core::Error::UnknownVideo(l.video_id.clone())));
        }
        check_class(path, *line, l.class_id, num_classes)?;
        if !seen.insert((l.video_id.as_str(), l.class_id)) {
            let what = format!("for video `{}` class {}", l.video_id, l.class_id);
            return Err(Error::parse(path, *line, ccrl_core::Error::DuplicateLabel(what)));
        }
    }

    let segment_labels = read_segment_labels(segment_labels_path)?;
    let mut seen = BTreeSet::new();
    for (line, l) in &segment_labels {
        let path = segment_labels_path;
        check_segment(path, *line, &l.segment, &by_id)?;
        check_class(path, *line, l.class_id, num_classes)?;
        if !seen.insert((&l.segment, l.class_id)) {
            let what = format!("for segment {} class {}", l.segment, l.class_id);
            return Err(Error::parse(path, *line, ccrl_core::Error::DuplicateLabel(what)));
        }
    }

    let video_labels = video_labels.into_iter().map(|(_, l)| l).collect();
    let segment_labels = segment_labels.into_iter().map(|(_, l)| l).collect();
    Corpus::new(videos, num_classes, video_labels, segment_labels).map_err(|e| Error::invalid(videos_path, e))
}

/// Writes the three corpus files.
pub fn write_corpus(
    corpus: &Corpus,
    videos_path: &Path,
    video_labels_path: &Path,
    segment_labels_path: &Path,
) -> Result<()> {
    write_videos(videos_path, corpus.videos())?;
    write_video_labels(video_labels_path, corpus.video_labels())?;
    write_segment_labels(segment_labels_path, corpus.segment_labels())
}

// ---------------------------------------------------------------------------
// ground truth and candidates

#[derive(Deserialize)]
struct SegmentClassLine {
    video_id: String,
    start: usize,
    length: usize,
    class_id: usize,
}

#[derive(Deserialize)]
struct CandidateLine {
    class_id: usize,
    video_id: String,
    start: usize,
    length: usize,
}

pub fn read_ground_truth(path: &Path, num_classes: usize) -> Result<GroundTruth> {
    let mut truth = GroundTruth::new(num_classes);
    for (line, r) in read_csv::<SegmentClassLine>(path, &GROUND_TRUTH_HEADER)? {
        check_class(path, line, r.class_id, num_classes)?;
        let segment = SegmentRef::new(r.video_id, r.start, r.length);
        let what = format!("for segment {segment} class {}", r.class_id);
        if !truth.insert(r.class_id, segment).map_err(|e| Error::parse(path, line, e))? {
            return Err(Error::parse(path, line, ccrl_core::Error::DuplicateLabel(what)));
        }
    }
    Ok(truth)
}

/// Rows ordered by class, then segment.
pub fn write_ground_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, GROUND_TRUTH_HEADER)?;
    for (class_id, s) in truth.iter() {
        write_row(&mut w, path, [s.video_id.clone(), s.start.to_string(), s.length.to_string(), class_id.to_string()])?;
    }
    finish(w, path)
}

pub fn read_candidates(path: &Path, num_classes: usize) -> Result<CandidateSet> {
    let mut per_class = vec![Vec::new(); num_classes];
    let mut seen = BTreeSet::new();
    for (line, r) in read_csv::<CandidateLine>(path, &CANDIDATES_HEADER)? {
        check_class(path, line, r.class_id, num_classes)?;
        let segment = SegmentRef::new(r.video_id, r.start, r.length);
        if !seen.insert((r.class_id, segment.clone())) {
            return Err(Error::parse(path, line, ccrl_core::Error::DuplicateSegment(segment.to_string())));
        }
        per_class[r.class_id].push(segment);
    }
    Ok(CandidateSet::from_segments(per_class))
}

pub fn write_candidates(path: &Path, candidates: &CandidateSet) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, CANDIDATES_HEADER)?;
    for (class_id, s) in candidates.pairs() {
        write_row(&mut w, path, [class_id.to_string(), s.video_id.clone(), s.start.to_string(), s.length.to_string()])?;
    }
    finish(w, path)
}

// ---------------------------------------------------------------------------
// pair features

/// One line of a features file.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub segment: SegmentRef,
    pub row: PairFeatureRow,
    pub label: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub dim: usize,
    pub records: Vec<FeatureRecord>,
}

impl FeatureTable {
    pub fn is_labelled(&self) -> bool {
        self.records.first().is_some_and(|r| r.label.is_some())
    }

    pub fn rows(&self) -> Vec<PairFeatureRow> {
        self.records.iter().map(|r| r.row.clone()).collect()
    }

    /// Labels of every record, or `None` if any record is unlabelled.
    pub fn labels(&self) -> Option<Vec<bool>> {
        self.records.iter().map(|r| r.label).collect()
    }
}

fn features_header(dim: usize, labelled: bool) -> Vec<String> {
    let mut header: Vec<String> = ["video_id", "start", "length"].iter().map(|s| s.to_string()).collect();
    // class_id leads the model layout; the file keeps it after the segment
    header.extend(feature_names(dim));
    if labelled {
        header.push("label".to_string());
    }
    header
}

/// Writes rows of width `dim`; either every record has a label or none has.
pub fn write_features(path: &Path, dim: usize, records: &[FeatureRecord]) -> Result<()> {
    let labelled = records.first().is_some_and(|r| r.label.is_some());
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, features_header(dim, labelled))?;
    for r in records {
        if r.row.encoding.len() != dim {
            let err = ccrl_core::Error::DimensionMismatch {
                context: format!("feature row for {}", r.segment),
                expected: dim,
                found: r.row.encoding.len(),
            };
            return Err(Error::invalid(path, err));
        }
        if r.label.is_some() != labelled {
            return Err(Error::Config(format!("{}: mixed labelled and unlabelled rows", path.display())));
        }
        let sim = &r.row.sim;
        let mut fields = vec![
            r.segment.video_id.clone(),
            r.segment.start.to_string(),
            r.segment.length.to_string(),
            r.row.class_id.to_string(),
            r.row.candidate_score.to_string(),
            sim.sim_pos.to_string(),
            sim.sim_neg.to_string(),
            sim.pos_count.to_string(),
            sim.neg_count.to_string(),
        ];
        fields.extend(r.row.encoding.iter().map(f64::to_string));
        if let Some(label) = r.label {
            fields.push(u8::from(label).to_string());
        }
        write_row(&mut w, path, fields)?;
    }
    finish(w, path)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, record: &csv::StringRecord, i: usize, name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(i).ok_or_else(|| Error::parse(path, line, format!("missing column `{name}`")))?;
    raw.parse().map_err(|e| Error::parse(path, line, format!("column `{name}`: {e}")))
}

pub fn read_features(path: &Path) -> Result<FeatureTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| Error::parse(path, 1, e))?.clone();
    let labelled = headers.iter().last() == Some("label");
    let fixed = 3 + LEADING_FEATURES;
    let width = headers.len() - usize::from(labelled);
    if width < fixed {
        return Err(Error::parse(path, 1, "too few columns for a features file"));
    }
    let dim = width - fixed;
    if headers.iter().ne(features_header(dim, labelled).iter().map(String::as_str)) {
        let expected = features_header(dim, labelled).join(",");
        return Err(Error::parse(path, 1, format!("expected header `{expected}`")));
    }

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let f = |i: usize| headers.get(i).unwrap_or_default();
        let float = |i: usize| -> Result<f64> {
            let x: f64 = field(path, line, &record, i, f(i))?;
            if !x.is_finite() {
                return Err(Error::parse(path, line, format!("column `{}` is not finite", f(i))));
            }
            Ok(x)
        };
        let segment = SegmentRef::new(
            field::<String>(path, line, &record, 0, f(0))?,
            field(path, line, &record, 1, f(1))?,
            field(path, line, &record, 2, f(2))?,
        );
        let sim = SimFeatures {
            sim_pos: float(5)?,
            sim_neg: float(6)?,
            pos_count: field(path, line, &record, 7, f(7))?,
            neg_count: field(path, line, &record, 8, f(8))?,
        };
        let row = PairFeatureRow {
            class_id: field(path, line, &record, 3, f(3))?,
            candidate_score: float(4)?,
            sim,
            encoding: (fixed..width).map(float).collect::<Result<_>>()?,
        };
        let label = if labelled {
            let raw: u8 = field(path, line, &record, width, "label")?;
            Some(parse_label(path, line, raw)?)
        } else {
            None
        };
        records.push(FeatureRecord { segment, row, label });
    }
    Ok(FeatureTable { dim, records })
}

// ---------------------------------------------------------------------------
// predictions

/// Sorts into file order: class ascending, score descending, then segment.
pub fn sort_predictions(predictions: &mut [Prediction]) {
    predictions.sort_by(|a, b| {
        a.class_id
            .cmp(&b.class_id)
            .then_with(|| b.score.total_cmp(&a.score))
            .then_with(|| a.segment.cmp(&b.segment))
    });
}

pub fn write_predictions(path: &Path, predictions: &[Prediction]) -> Result<()> {
    let mut sorted = predictions.to_vec();
    sort_predictions(&mut sorted);
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, PREDICTIONS_HEADER)?;
    for p in &sorted {
        let s = &p.segment;
        write_row(
            &mut w,
            path,
            [p.class_id.to_string(), s.video_id.clone(), s.start.to_string(), s.length.to_string(), p.score.to_string()],
        )?;
    }
    finish(w, path)
}

#[derive(Deserialize)]
struct PredictionLine {
    class_id: usize,
    video_id: String,
    start: usize,
    length: usize,
    score: f64,
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    read_csv::<PredictionLine>(path, &PREDICTIONS_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            if !r.score.is_finite() {
                return Err(Error::parse(path, line, "score is not finite"));
            }
            let segment = SegmentRef::new(r.video_id, r.start, r.length);
            Ok(Prediction { class_id: r.class_id, segment, score: r.score })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// JSON documents (models, reports, configs)

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|e| Error::parse(path, e.line(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::io(path, e.into()))?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

//! Two-stage temporal concept localization.
//!
//! A video-level multi-label logistic model ranks videos per class and keeps
//! the segments of the top-K videos as candidates. A single gradient-boosted
//! relevance model then scores `(segment, class)` pairs from the segment
//! encoding, the class identity, the video-level candidate score and
//! similarity features against the labelled exemplars of the class. Ranked
//! lists are scored with per-class average precision and recall.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, orchestration and
//! the command line live in the `ccrl` crate.
#![no_std]

extern crate alloc;

pub mod candgen;
pub mod data;
mod error;
pub mod eval;
pub mod features;
pub mod logistic;
pub mod math;
pub mod relevance;
pub mod synth;

pub use error::{Error, Result};

pub use candgen::{CandidateSet, RecallReport, ScoreMatrix, VideoModel};
pub use data::{Corpus, SegmentLabel, SegmentRef, Video, VideoLabel};
pub use eval::{ClassReport, EvalReport, RankedList};
pub use features::{LabeledStore, PairFeatureRow, SimFeatures};
pub use logistic::LogisticHyper;
pub use relevance::{BaselineModel, GbmHyper, GbmModel};
pub use synth::{GeneratorSpec, GroundTruth};

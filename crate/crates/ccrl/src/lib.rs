//! File formats, pipeline stages and the command line around `ccrl-core`.

pub mod config;
mod error;
pub mod io;
pub mod pipeline;

pub use config::{Artifacts, CorpusPaths, Mode, PipelineConfig};
pub use error::{Error, Result, Stage, StageExt};
pub use pipeline::{RunOutput, RunSummary};

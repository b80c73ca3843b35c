use std::fmt;
use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage, used to tag errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Generate,
    LoadCorpus,
    TrainVideo,
    Candidates,
    BuildFeatures,
    TrainCcrl,
    TrainBaseline,
    Predict,
    Evaluate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Generate => "generate",
            Stage::LoadCorpus => "load-corpus",
            Stage::TrainVideo => "train-video",
            Stage::Candidates => "candidates",
            Stage::BuildFeatures => "build-features",
            Stage::TrainCcrl => "train-ccrl",
            Stage::TrainBaseline => "train-baseline",
            Stage::Predict => "predict",
            Stage::Evaluate => "evaluate",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Invalid { path: PathBuf, source: ccrl_core::Error },
    #[error(transparent)]
    Core(#[from] ccrl_core::Error),
    #[error("{0}")]
    Config(String),
    #[error("[{stage}] {source}")]
    Stage { stage: Stage, source: Box<Error> },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, line: usize, message: impl fmt::Display) -> Self {
        Error::Parse { path: path.to_path_buf(), line, message: message.to_string() }
    }

    pub fn invalid(path: &Path, source: ccrl_core::Error) -> Self {
        Error::Invalid { path: path.to_path_buf(), source }
    }

    /// Attaches `stage` unless the error already carries one.
    pub fn in_stage(self, stage: Stage) -> Self {
        match self {
            tagged @ Error::Stage { .. } => tagged,
            other => Error::Stage { stage, source: Box::new(other) },
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T, E: Into<Error>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.into().in_stage(stage))
    }
}

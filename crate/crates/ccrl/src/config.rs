use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ccrl_core::candgen::DEFAULT_K;
use ccrl_core::data::DEFAULT_SEGMENT_LENGTH;
use ccrl_core::eval::DEFAULT_CAP;
use ccrl_core::{GbmHyper, GeneratorSpec, LogisticHyper};
use serde::{Deserialize, Serialize};

use crate::{io, Error, Result};

/// Whether relevance scoring is restricted to the candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    WithCg,
    /// Score every (segment, class) pair.
    WithoutCg,
}

/// Existing corpus files, used instead of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusPaths {
    pub videos: PathBuf,
    pub video_labels: PathBuf,
    pub segment_labels: PathBuf,
    pub ground_truth: PathBuf,
    pub num_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory for every artifact the pipeline writes.
    pub out_dir: PathBuf,
    /// Read the corpus from disk; when absent it is generated.
    pub corpus: Option<CorpusPaths>,
    pub generator: GeneratorSpec,
    pub k: usize,
    pub segment_length: usize,
    pub stride: usize,
    pub video: LogisticHyper,
    pub baseline: LogisticHyper,
    pub gbm: GbmHyper,
    pub cap: usize,
    /// Copied into the generator and the booster by [`PipelineConfig::resolved`].
    pub seed: u64,
    pub mode: Mode,
    /// When false, `sim_pos` and `sim_neg` are zeroed in every feature row.
    pub sim_features: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let generator = GeneratorSpec::default();
        Self {
            out_dir: PathBuf::from("out"),
            corpus: None,
            seed: generator.seed,
            generator,
            k: DEFAULT_K,
            segment_length: DEFAULT_SEGMENT_LENGTH,
            stride: DEFAULT_SEGMENT_LENGTH,
            video: LogisticHyper::default(),
            baseline: LogisticHyper { l2: 1e-2, ..LogisticHyper::default() },
            gbm: GbmHyper::default(),
            cap: DEFAULT_CAP,
            mode: Mode::WithCg,
            sim_features: true,
        }
    }
}

/// Fixed artifact names inside the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn videos(&self) -> PathBuf {
        self.file("videos.jsonl")
    }
    pub fn video_labels(&self) -> PathBuf {
        self.file("video_labels.csv")
    }
    pub fn segment_labels(&self) -> PathBuf {
        self.file("segment_labels.csv")
    }
    pub fn ground_truth(&self) -> PathBuf {
        self.file("ground_truth.csv")
    }
    pub fn video_model(&self) -> PathBuf {
        self.file("video_model.json")
    }
    pub fn candidates(&self) -> PathBuf {
        self.file("candidates.csv")
    }
    pub fn train_features(&self) -> PathBuf {
        self.file("train_features.csv")
    }
    pub fn features(&self) -> PathBuf {
        self.file("features.csv")
    }
    pub fn ccrl_model(&self) -> PathBuf {
        self.file("ccrl_model.json")
    }
    pub fn baseline_model(&self) -> PathBuf {
        self.file("baseline_model.json")
    }
    pub fn predictions(&self) -> PathBuf {
        self.file("predictions.csv")
    }
    pub fn baseline_predictions(&self) -> PathBuf {
        self.file("baseline_predictions.csv")
    }
    pub fn ensemble_predictions(&self) -> PathBuf {
        self.file("ensemble_predictions.csv")
    }
    pub fn report(&self) -> PathBuf {
        self.file("report.json")
    }
    pub fn baseline_report(&self) -> PathBuf {
        self.file("baseline_report.json")
    }
    pub fn ensemble_report(&self) -> PathBuf {
        self.file("ensemble_report.json")
    }
    pub fn summary(&self) -> PathBuf {
        self.file("summary.json")
    }
    pub fn config(&self) -> PathBuf {
        self.file("config.json")
    }

    /// Everything the pipeline writes besides the corpus files.
    pub fn outputs(&self) -> Vec<PathBuf> {
        vec![
            self.video_model(),
            self.candidates(),
            self.train_features(),
            self.features(),
            self.ccrl_model(),
            self.baseline_model(),
            self.predictions(),
            self.baseline_predictions(),
            self.ensemble_predictions(),
            self.report(),
            self.baseline_report(),
            self.ensemble_report(),
            self.summary(),
            self.config(),
        ]
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        io::read_json(path)
    }

    pub fn artifacts(&self) -> Artifacts {
        Artifacts::new(&self.out_dir)
    }

    /// Corpus file locations: the configured ones, or generated files in the
    /// output directory.
    pub fn corpus_paths(&self) -> CorpusPaths {
        match &self.corpus {
            Some(paths) => paths.clone(),
            None => {
                let a = self.artifacts();
                CorpusPaths {
                    videos: a.videos(),
                    video_labels: a.video_labels(),
                    segment_labels: a.segment_labels(),
                    ground_truth: a.ground_truth(),
                    num_classes: self.generator.num_classes,
                }
            }
        }
    }

    /// Propagates the seed and segment length into the generator and the
    /// booster, then validates.
    pub fn resolved(&self) -> Result<Self> {
        let mut config = self.clone();
        config.generator.seed = config.seed;
        config.generator.segment_length = config.segment_length;
        config.gbm.seed = config.seed;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::Config(msg));
        if self.k == 0 {
            return invalid("k must be at least 1".into());
        }
        if self.segment_length == 0 || self.stride == 0 {
            return invalid("segment_length and stride must be at least 1".into());
        }
        if self.cap == 0 {
            return invalid("cap must be at least 1".into());
        }
        if self.corpus.is_none() {
            self.generator.validate()?;
        }
        self.video.validate()?;
        self.baseline.validate()?;
        self.gbm.validate()?;

        let paths = self.corpus_paths();
        let mut seen = BTreeSet::new();
        let inputs = [paths.videos, paths.video_labels, paths.segment_labels, paths.ground_truth];
        for path in inputs.into_iter().chain(self.artifacts().outputs()) {
            if !seen.insert(path.clone()) {
                return invalid(format!("path {} is used twice", path.display()));
            }
        }
        Ok(())
    }
}

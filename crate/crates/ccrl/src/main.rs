use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use ccrl::pipeline;
use ccrl::{io, Error, Mode, PipelineConfig, Result, Stage, StageExt};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccrl", version, about = "Two-stage temporal concept localization")]
struct Cli {
    /// JSON pipeline config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for default artifact paths.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Corpus file locations. Unset paths fall back to the config, then to the
/// output directory.
#[derive(Args, Default)]
struct CorpusArgs {
    #[arg(long)]
    videos: Option<PathBuf>,
    #[arg(long)]
    video_labels: Option<PathBuf>,
    #[arg(long)]
    segment_labels: Option<PathBuf>,
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    #[arg(long)]
    num_classes: Option<usize>,
}

#[derive(Args)]
struct LogisticArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus and its ground truth.
    Generate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        num_videos: Option<usize>,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long)]
        positive_rate: Option<f64>,
        #[arg(long)]
        label_rate: Option<f64>,
        #[arg(long)]
        length: Option<usize>,
    },
    /// Train the video-level model.
    TrainVideo {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        hyper: LogisticArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select candidate segments from the top-K videos per class.
    Candidates {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        length: Option<usize>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write labelled training rows and candidate pair rows.
    BuildFeatures {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        candidates: Option<PathBuf>,
        /// Zero the sim_pos and sim_neg columns.
        #[arg(long)]
        no_sim: bool,
        #[arg(long)]
        train_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the boosted relevance model on labelled feature rows.
    TrainCcrl {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        min_child_weight: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the per-class logistic baseline on segment labels.
    TrainBaseline {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        hyper: LogisticArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a features file; with both models, average them.
    Predict {
        #[arg(long)]
        features: Option<PathBuf>,
        /// Relevance model JSON.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Baseline model JSON.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a predictions file against the ground truth.
    Evaluate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage end to end.
    Run {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        no_sim: bool,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl CorpusArgs {
    fn apply(self, config: &mut PipelineConfig) {
        let given = self.videos.is_some()
            || self.video_labels.is_some()
            || self.segment_labels.is_some()
            || self.ground_truth.is_some()
            || self.num_classes.is_some();
        if !given {
            return;
        }
        let mut paths = config.corpus_paths();
        set(&mut paths.videos, self.videos);
        set(&mut paths.video_labels, self.video_labels);
        set(&mut paths.segment_labels, self.segment_labels);
        set(&mut paths.ground_truth, self.ground_truth);
        set(&mut paths.num_classes, self.num_classes);
        config.generator.num_classes = paths.num_classes;
        config.corpus = Some(paths);
    }
}

impl LogisticArgs {
    fn apply(self, hyper: &mut ccrl_core::LogisticHyper) {
        set(&mut hyper.epochs, self.epochs);
        set(&mut hyper.learning_rate, self.lr);
        set(&mut hyper.l2, self.l2);
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    set(&mut config.seed, cli.seed);
    set(&mut config.out_dir, cli.out_dir.clone());
    Ok(config)
}

fn execute(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli).stage(Stage::Config)?;
    let a = config.artifacts();
    let resolved = |config: &PipelineConfig| config.resolved().stage(Stage::Config);
    let corpus = |config: &PipelineConfig| pipeline::load_corpus(&config.corpus_paths(), config.segment_length);

    match cli.command {
        Command::Generate {
            corpus: paths,
            num_videos,
            frames,
            dim,
            clusters,
            noise_sigma,
            positive_rate,
            label_rate,
            length,
        } => {
            let spec = &mut config.generator;
            set(&mut spec.num_videos, num_videos);
            set(&mut spec.frames_per_video, frames);
            set(&mut spec.dim, dim);
            set(&mut spec.clusters, clusters);
            set(&mut spec.noise_sigma, noise_sigma);
            set(&mut spec.positive_segment_rate, positive_rate);
            set(&mut spec.label_rate, label_rate);
            set(&mut config.segment_length, length);
            set(&mut config.generator.num_classes, paths.num_classes);
            paths.apply(&mut config);
            let config = resolved(&config)?;
            pipeline::generate(&config.generator, &config.corpus_paths())?;
            println!("{}", config.corpus_paths().videos.display());
        }
        Command::TrainVideo { corpus: paths, hyper, out } => {
            paths.apply(&mut config);
            hyper.apply(&mut config.video);
            let config = resolved(&config)?;
            let out = out.unwrap_or_else(|| a.video_model());
            pipeline::train_video(&corpus(&config)?, &config.video, &out)?;
            println!("{}", out.display());
        }
        Command::Candidates { corpus: paths, model, k, length, stride, mode, out } => {
            paths.apply(&mut config);
            set(&mut config.k, k);
            set(&mut config.segment_length, length);
            set(&mut config.stride, stride);
            set(&mut config.mode, mode);
            let config = resolved(&config)?;
            let model = model.unwrap_or_else(|| a.video_model());
            let out = out.unwrap_or_else(|| a.candidates());
            let c = config.clone();
            pipeline::candidates(&corpus(&c)?, &model, c.k, c.segment_length, c.stride, c.mode, &out)?;
            println!("{}", out.display());
        }
        Command::BuildFeatures { corpus: paths, model, candidates, no_sim, train_out, out } => {
            paths.apply(&mut config);
            config.sim_features &= !no_sim;
            let config = resolved(&config)?;
            let model = model.unwrap_or_else(|| a.video_model());
            let candidates = candidates.unwrap_or_else(|| a.candidates());
            let train_out = train_out.unwrap_or_else(|| a.train_features());
            let out = out.unwrap_or_else(|| a.features());
            let corpus = corpus(&config)?;
            pipeline::build_features(&corpus, &model, &candidates, config.sim_features, &train_out, &out)?;
            println!("{}\n{}", train_out.display(), out.display());
        }
        Command::TrainCcrl { features, rounds, depth, lr, lambda, min_child_weight, out } => {
            let gbm = &mut config.gbm;
            set(&mut gbm.rounds, rounds);
            set(&mut gbm.max_depth, depth);
            set(&mut gbm.learning_rate, lr);
            set(&mut gbm.lambda, lambda);
            set(&mut gbm.min_child_weight, min_child_weight);
            let config = resolved(&config)?;
            let features = features.unwrap_or_else(|| a.train_features());
            let out = out.unwrap_or_else(|| a.ccrl_model());
            pipeline::train_ccrl(&features, &config.gbm, &out)?;
            println!("{}", out.display());
        }
        Command::TrainBaseline { corpus: paths, hyper, out } => {
            paths.apply(&mut config);
            hyper.apply(&mut config.baseline);
            let config = resolved(&config)?;
            let out = out.unwrap_or_else(|| a.baseline_model());
            pipeline::train_baseline(&corpus(&config)?, &config.baseline, &out)?;
            println!("{}", out.display());
        }
        Command::Predict { features, model, baseline, out } => {
            let features = features.unwrap_or_else(|| a.features());
            let model = match (&model, &baseline) {
                (None, None) => Some(a.ccrl_model()),
                _ => model,
            };
            let out = out.unwrap_or_else(|| a.predictions());
            pipeline::predict(&features, model.as_deref(), baseline.as_deref(), &out)?;
            println!("{}", out.display());
        }
        Command::Evaluate { corpus: paths, predictions, cap, out } => {
            paths.apply(&mut config);
            set(&mut config.cap, cap);
            let config = resolved(&config)?;
            let paths = config.corpus_paths();
            let known: Option<BTreeSet<String>> = if paths.videos.exists() {
                let videos = io::read_videos(&paths.videos).stage(Stage::Evaluate)?;
                Some(videos.iter().map(|v| v.id().to_string()).collect())
            } else {
                None
            };
            let predictions = predictions.unwrap_or_else(|| a.predictions());
            let report = pipeline::evaluate(
                &predictions,
                &paths.ground_truth,
                paths.num_classes,
                known.as_ref(),
                config.cap,
                out.as_deref(),
            )?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?);
        }
        Command::Run { k, mode, no_sim } => {
            set(&mut config.k, k);
            set(&mut config.mode, mode);
            config.sim_features &= !no_sim;
            let output = pipeline::run(&config)?;
            println!("{}", serde_json::to_string_pretty(&output.summary).map_err(|e| Error::Config(e.to_string()))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ccrl: {e}");
            ExitCode::FAILURE
        }
    }
}

//! Pipeline stages. Each stage reads its inputs from disk and writes its
//! artifact, so any stage can be rerun from saved files; [`run`] chains them.

use std::collections::BTreeSet;
use std::path::Path;

use ccrl_core::candgen::{candidate_recall, predict_video_scores, select_candidates, train_video_model};
use ccrl_core::eval::{self, Prediction};
use ccrl_core::features::{build_pair_rows, build_training_rows};
use ccrl_core::relevance::{ensemble_average, predict_relevance, train_baseline as fit_baseline, train_relevance_model};
use ccrl_core::synth::{self, Synthetic};
use ccrl_core::{
    BaselineModel, CandidateSet, Corpus, EvalReport, GbmHyper, GbmModel, GeneratorSpec, LabeledStore,
    LogisticHyper, SegmentRef, VideoModel,
};
use serde::{Deserialize, Serialize};

use crate::config::{CorpusPaths, Mode, PipelineConfig};
use crate::error::{Stage, StageExt};
use crate::io::{self, FeatureRecord};
use crate::{Error, Result};

/// Generates a synthetic corpus and writes the three corpus files plus the
/// ground truth.
pub fn generate(spec: &GeneratorSpec, paths: &CorpusPaths) -> Result<Synthetic> {
    let run = || -> Result<Synthetic> {
        let synthetic = synth::generate(spec)?;
        io::write_corpus(&synthetic.corpus, &paths.videos, &paths.video_labels, &paths.segment_labels)?;
        io::write_ground_truth(&paths.ground_truth, &synthetic.ground_truth)?;
        log::info!(
            "generated {} videos, {} segment labels, {} ground-truth positives",
            synthetic.corpus.videos().len(),
            synthetic.corpus.segment_labels().len(),
            synthetic.ground_truth.len()
        );
        Ok(synthetic)
    };
    run().stage(Stage::Generate)
}

pub fn load_corpus(paths: &CorpusPaths, segment_length: usize) -> Result<Corpus> {
    let run = || -> Result<Corpus> {
        let corpus = io::load_corpus(&paths.videos, &paths.video_labels, &paths.segment_labels, paths.num_classes)?;
        Ok(corpus.with_segment_length(segment_length)?)
    };
    run().stage(Stage::LoadCorpus)
}

pub fn read_video_model(path: &Path) -> Result<VideoModel> {
    io::read_json(path)
}

pub fn train_video(corpus: &Corpus, hyper: &LogisticHyper, out: &Path) -> Result<VideoModel> {
    let run = || -> Result<VideoModel> {
        let (model, history) = train_video_model(corpus, hyper)?;
        log::info!("video model: loss {:.6} -> {:.6}", history[0], history[history.len() - 1]);
        io::write_json(out, &model)?;
        read_video_model(out)
    };
    run().stage(Stage::TrainVideo)
}

/// Selects top-`k` candidates per class, or every pair in
/// [`Mode::WithoutCg`].
pub fn candidates(
    corpus: &Corpus,
    video_model: &Path,
    k: usize,
    length: usize,
    stride: usize,
    mode: Mode,
    out: &Path,
) -> Result<CandidateSet> {
    let run = || -> Result<CandidateSet> {
        let set = match mode {
            Mode::WithCg => {
                let model = read_video_model(video_model)?;
                let scores = predict_video_scores(&model, corpus)?;
                select_candidates(&scores, corpus, k, length, stride)?
            }
            Mode::WithoutCg => CandidateSet::all_pairs(corpus, length, stride)?,
        };
        log::info!("{} candidate pairs", set.total_pairs());
        io::write_candidates(out, &set)?;
        io::read_candidates(out, corpus.num_classes())
    };
    run().stage(Stage::Candidates)
}

/// Writes labelled training rows and unlabelled candidate-pair rows. With
/// `sim_features` off, `sim_pos` and `sim_neg` are zeroed in both files.
pub fn build_features(
    corpus: &Corpus,
    video_model: &Path,
    candidates_path: &Path,
    sim_features: bool,
    train_out: &Path,
    pairs_out: &Path,
) -> Result<(usize, usize)> {
    let run = || -> Result<(usize, usize)> {
        let model = read_video_model(video_model)?;
        let scores = predict_video_scores(&model, corpus)?;
        let candidates = io::read_candidates(candidates_path, corpus.num_classes())?;
        let store = LabeledStore::from_corpus(corpus)?;
        let strip = |row: ccrl_core::PairFeatureRow| if sim_features { row } else { row.without_sim() };

        let training: Vec<FeatureRecord> = build_training_rows(corpus, &store, &scores)?
            .into_iter()
            .map(|t| FeatureRecord { segment: t.segment, row: strip(t.row), label: Some(t.label) })
            .collect();
        io::write_features(train_out, corpus.dim(), &training)?;

        let pairs: Vec<FeatureRecord> = build_pair_rows(&candidates, &scores, &store, corpus)?
            .into_iter()
            .map(|p| FeatureRecord { segment: p.segment, row: strip(p.row), label: None })
            .collect();
        io::write_features(pairs_out, corpus.dim(), &pairs)?;
        log::info!("{} training rows, {} pair rows", training.len(), pairs.len());
        Ok((training.len(), pairs.len()))
    };
    run().stage(Stage::BuildFeatures)
}

pub fn read_ccrl_model(path: &Path) -> Result<GbmModel> {
    let model: GbmModel = io::read_json(path)?;
    model.validate().map_err(|e| Error::invalid(path, e))?;
    Ok(model)
}

pub fn train_ccrl(train_features: &Path, hyper: &GbmHyper, out: &Path) -> Result<GbmModel> {
    let run = || -> Result<GbmModel> {
        let table = io::read_features(train_features)?;
        let labels = table
            .labels()
            .ok_or_else(|| Error::Config(format!("{} has no label column", train_features.display())))?;
        let (model, history) = train_relevance_model(&table.rows(), &labels, hyper)?;
        log::info!("relevance model: {} trees, loss {:.6}", model.trees.len(), history.last().copied().unwrap_or(0.0));
        io::write_json(out, &model)?;
        read_ccrl_model(out)
    };
    run().stage(Stage::TrainCcrl)
}

pub fn read_baseline_model(path: &Path) -> Result<BaselineModel> {
    io::read_json(path)
}

pub fn train_baseline(corpus: &Corpus, hyper: &LogisticHyper, out: &Path) -> Result<BaselineModel> {
    let run = || -> Result<BaselineModel> {
        let (model, _) = fit_baseline(corpus, hyper)?;
        io::write_json(out, &model)?;
        read_baseline_model(out)
    };
    run().stage(Stage::TrainBaseline)
}

/// Scores every row of a features file with the relevance model, the
/// baseline, or (given both) their average.
pub fn predict(features: &Path, ccrl: Option<&Path>, baseline: Option<&Path>, out: &Path) -> Result<Vec<Prediction>> {
    let run = || -> Result<Vec<Prediction>> {
        let table = io::read_features(features)?;
        let mut lists: Vec<Vec<((usize, SegmentRef), f64)>> = Vec::new();
        if let Some(path) = ccrl {
            let model = read_ccrl_model(path)?;
            let scores = table
                .records
                .iter()
                .map(|r| Ok(((r.row.class_id, r.segment.clone()), predict_relevance(&model, &r.row)?)))
                .collect::<Result<_>>()?;
            lists.push(scores);
        }
        if let Some(path) = baseline {
            let model = read_baseline_model(path)?;
            let scores = table
                .records
                .iter()
                .map(|r| Ok(((r.row.class_id, r.segment.clone()), model.predict(r.row.class_id, &r.row.encoding)?)))
                .collect::<Result<_>>()?;
            lists.push(scores);
        }
        if lists.is_empty() {
            return Err(Error::Config("predict needs a relevance model, a baseline model, or both".into()));
        }
        let predictions: Vec<Prediction> = ensemble_average(&lists)?
            .into_iter()
            .map(|((class_id, segment), score)| Prediction { class_id, segment, score })
            .collect();
        io::write_predictions(out, &predictions)?;
        io::read_predictions(out)
    };
    run().stage(Stage::Predict)
}

/// Scores a predictions file. `known_videos`, when given, rejects
/// predictions for videos outside the corpus.
pub fn evaluate(
    predictions: &Path,
    ground_truth: &Path,
    num_classes: usize,
    known_videos: Option<&BTreeSet<String>>,
    cap: usize,
    out: Option<&Path>,
) -> Result<EvalReport> {
    let run = || -> Result<EvalReport> {
        let predictions = io::read_predictions(predictions)?;
        let truth = io::read_ground_truth(ground_truth, num_classes)?;
        let report = eval::evaluate(&predictions, &truth, known_videos, cap)?;
        if let Some(out) = out {
            io::write_json(out, &report)?;
        }
        Ok(report)
    };
    run().stage(Stage::Evaluate)
}

/// Headline numbers from one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub k: usize,
    pub sim_features: bool,
    pub training_rows: usize,
    pub pair_rows: usize,
    pub all_pairs: usize,
    /// Mean over classes with at least one relevant segment.
    pub candidate_recall: f64,
    pub map: f64,
    pub baseline_map: f64,
    pub ensemble_map: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub report: EvalReport,
    pub baseline_report: EvalReport,
    pub ensemble_report: EvalReport,
}

/// Runs every stage in order, each reading the previous stage's artifact.
pub fn run(config: &PipelineConfig) -> Result<RunOutput> {
    let config = config.resolved().stage(Stage::Config)?;
    let a = config.artifacts();
    std::fs::create_dir_all(&a.dir).map_err(|e| Error::io(&a.dir, e)).stage(Stage::Config)?;
    io::write_json(&a.config(), &config).stage(Stage::Config)?;

    let paths = config.corpus_paths();
    if config.corpus.is_none() {
        generate(&config.generator, &paths)?;
    }
    let corpus = load_corpus(&paths, config.segment_length)?;
    let known: BTreeSet<String> = corpus.videos().iter().map(|v| v.id().to_string()).collect();

    train_video(&corpus, &config.video, &a.video_model())?;
    let candidate_set = candidates(
        &corpus,
        &a.video_model(),
        config.k,
        config.segment_length,
        config.stride,
        config.mode,
        &a.candidates(),
    )?;
    let truth = io::read_ground_truth(&paths.ground_truth, corpus.num_classes()).stage(Stage::Candidates)?;
    let recall = candidate_recall(&candidate_set, &truth).stage(Stage::Candidates)?;
    log::info!("candidate recall {:.4}", recall.mean);

    let (training_rows, pair_rows) = build_features(
        &corpus,
        &a.video_model(),
        &a.candidates(),
        config.sim_features,
        &a.train_features(),
        &a.features(),
    )?;
    train_ccrl(&a.train_features(), &config.gbm, &a.ccrl_model())?;
    train_baseline(&corpus, &config.baseline, &a.baseline_model())?;

    predict(&a.features(), Some(&a.ccrl_model()), None, &a.predictions())?;
    predict(&a.features(), None, Some(&a.baseline_model()), &a.baseline_predictions())?;
    predict(&a.features(), Some(&a.ccrl_model()), Some(&a.baseline_model()), &a.ensemble_predictions())?;

    let score = |predictions: &Path, out: &Path| {
        evaluate(predictions, &paths.ground_truth, corpus.num_classes(), Some(&known), config.cap, Some(out))
    };
    let report = score(&a.predictions(), &a.report())?;
    let baseline_report = score(&a.baseline_predictions(), &a.baseline_report())?;
    let ensemble_report = score(&a.ensemble_predictions(), &a.ensemble_report())?;

    let all_pairs = corpus.all_segments(config.segment_length, config.stride).stage(Stage::Candidates)?.len()
        * corpus.num_classes();
    let summary = RunSummary {
        mode: config.mode,
        k: config.k,
        sim_features: config.sim_features,
        training_rows,
        pair_rows,
        all_pairs,
        candidate_recall: recall.mean,
        map: report.map,
        baseline_map: baseline_report.map,
        ensemble_map: ensemble_report.map,
    };
    io::write_json(&a.summary(), &summary).stage(Stage::Evaluate)?;
    log::info!("mAP {:.4} (baseline {:.4}, ensemble {:.4})", summary.map, summary.baseline_map, summary.ensemble_map);
    Ok(RunOutput { summary, report, baseline_report, ensemble_report })
}


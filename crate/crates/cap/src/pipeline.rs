//! End-to-end run: cluster, score, refine, extract a path, decode, evaluate.
//!
//! Per-sequence stages run on the rayon pool; results are collected in
//! corpus order, so output does not depend on the thread count.

use std::path::Path;

use cap_core::cooccur::{build_cooccurrence, occurrence_ratios, refine_scores, select_salience_pool};
use cap_core::temporal::single_occurrence_path;
use cap_core::{
    argmax_decode, build_histograms, evaluate, extract_path, fit_clusters, score_sequence, viterbi_decode,
    ClusterModel, CooccurrenceStats, Corpus, Error as CoreError, GroundTruth, MetricsReport, SaliencePool,
    ScoreMatrix, Segmentation, TemporalHistogram, TemporalPath,
};
use rayon::prelude::*;

use crate::config::{PathMode, PipelineConfig};
use crate::error::{AtStage, PipelineError, Stage};
use crate::labels::write_segmentations;
use crate::report::format_report;
use crate::store::{save_json, PoolArtifact, TemporalArtifact};

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub model: ClusterModel,
    pub stats: Option<CooccurrenceStats>,
    /// Salience pool per sequence, in corpus order; empty when refinement is off.
    pub pools: Vec<SaliencePool>,
    pub histograms: Vec<TemporalHistogram>,
    /// `None` when decoding fell back to argmax.
    pub path: Option<TemporalPath>,
    pub segmentations: Vec<Segmentation>,
    pub report: Option<MetricsReport>,
}

pub fn score_corpus(model: &ClusterModel, corpus: &Corpus) -> Result<Vec<ScoreMatrix>, CoreError> {
    corpus.sequences().par_iter().map(|seq| score_sequence(model, seq)).collect()
}

/// Salience pools and refined scores for every sequence.
pub fn refine_corpus(
    model: &ClusterModel,
    scores: &[ScoreMatrix],
    stats: &CooccurrenceStats,
    cfg: &cap_core::RefineConfig,
) -> Result<(Vec<SaliencePool>, Vec<ScoreMatrix>), CoreError> {
    let refined: Vec<(SaliencePool, ScoreMatrix)> = scores
        .par_iter()
        .map(|s| {
            let ratios = occurrence_ratios(model, s.sequence_id())?;
            let pool = select_salience_pool(&ratios, stats, cfg);
            let r = refine_scores(s, &pool, cfg)?;
            Ok((pool, r))
        })
        .collect::<Result<_, CoreError>>()?;
    Ok(refined.into_iter().unzip())
}

pub fn decode_corpus(
    scores: &[ScoreMatrix],
    path: Option<&TemporalPath>,
    cfg: &cap_core::DecodeConfig,
) -> Result<Vec<Segmentation>, CoreError> {
    scores
        .par_iter()
        .map(|s| match path {
            Some(p) => viterbi_decode(s, p, cfg),
            None => Ok(argmax_decode(s)),
        })
        .collect()
}

/// Path for the configured mode; `None` for `Off` or when no bin clears theta.
pub fn select_path(
    histograms: &[TemporalHistogram],
    cfg: &PipelineConfig,
) -> Result<Option<TemporalPath>, CoreError> {
    let path = match cfg.path_mode {
        PathMode::Off => return Ok(None),
        PathMode::Multi => extract_path(histograms, &cfg.path),
        PathMode::Single => single_occurrence_path(histograms, &cfg.path),
    };
    match path {
        Ok(p) => Ok(Some(p)),
        Err(CoreError::EmptyPath { theta }) => {
            log::warn!("no histogram bin exceeds theta = {theta}; falling back to argmax decoding");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Runs every stage on an in-memory corpus. Ground truth, when given, is
/// checked against the corpus and used for the metrics report.
pub fn run_pipeline(
    corpus: &Corpus,
    gt: Option<&GroundTruth>,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    cfg.validate().at(Stage::Load)?;
    if let Some(gt) = gt {
        gt.check_against(corpus).at(Stage::Load)?;
    }

    log::info!("clustering {} frames into {} clusters", corpus.total_frames(), cfg.kmeans.k);
    let model = fit_clusters(corpus, &cfg.kmeans).at(Stage::Cluster)?;
    let mut scores = score_corpus(&model, corpus).at(Stage::Score)?;

    let (stats, pools) = if cfg.use_cooccurrence {
        let stats = build_cooccurrence(&model, corpus, &cfg.refine).at(Stage::Cooccurrence)?;
        let (pools, refined) = refine_corpus(&model, &scores, &stats, &cfg.refine).at(Stage::Refine)?;
        log::info!(
            "refined scores; mean pool size {:.2}",
            pools.iter().map(SaliencePool::len).sum::<usize>() as f64 / pools.len().max(1) as f64
        );
        scores = refined;
        (Some(stats), pools)
    } else {
        (None, Vec::new())
    };

    let histograms = build_histograms(&model, corpus, &cfg.path).at(Stage::Histogram)?;
    let path = select_path(&histograms, cfg).at(Stage::Path)?;
    match &path {
        Some(p) => log::info!("temporal path {:?}", p.steps()),
        None => log::info!("decoding by per-frame argmax"),
    }
    let segmentations = decode_corpus(&scores, path.as_ref(), &cfg.decode).at(Stage::Decode)?;

    let report = gt
        .map(|gt| evaluate(&segmentations, gt, model.k()))
        .transpose()
        .at(Stage::Eval)?;

    Ok(PipelineOutput {
        model,
        stats,
        pools,
        histograms,
        path,
        segmentations,
        report,
    })
}

/// Writes every artifact of a run into `dir`:
/// `model.json`, `cooccurrence.json` and `pools.json` (when refinement ran),
/// `temporal.json`, `segmentations/<id>.txt` and `metrics.txt`.
pub fn write_outputs(
    dir: &Path,
    corpus: &Corpus,
    output: &PipelineOutput,
    cfg: &PipelineConfig,
) -> Result<(), PipelineError> {
    save_json(&output.model, &dir.join("model.json")).at(Stage::Write)?;
    if let Some(stats) = &output.stats {
        save_json(stats, &dir.join("cooccurrence.json")).at(Stage::Write)?;
        let pools: PoolArtifact = corpus
            .iter()
            .zip(&output.pools)
            .map(|(seq, pool)| (seq.id().to_string(), pool.clone()))
            .collect();
        save_json(&pools, &dir.join("pools.json")).at(Stage::Write)?;
    }
    let temporal = TemporalArtifact {
        bin_count: cfg.path.bin_count,
        theta: cfg.path.theta,
        histograms: output.histograms.clone(),
        path: output.path.clone(),
    };
    save_json(&temporal, &dir.join("temporal.json")).at(Stage::Write)?;
    write_segmentations(&dir.join("segmentations"), &output.segmentations).at(Stage::Write)?;
    if let Some(report) = &output.report {
        let path = dir.join("metrics.txt");
        std::fs::write(&path, format_report(report))
            .map_err(crate::error::LoadError::io(&path))
            .at(Stage::Write)?;
    }
    Ok(())
}

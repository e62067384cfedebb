//! Expected-births estimation by k-fold cross-validation over detection logs,
//! and replay of the logs through the filter.

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::logs::{sequence_frames, DetectionLogSequence, LogInputConfig};
use super::montecarlo::{pool, TrialMetrics, TrialOutcome};
use crate::birth::{build_model, BirthModelKind};
use crate::error::{Error, Result};
use crate::metrics::tracking_delay;
use crate::tracker::run_frames;

/// Sequence statistics used by the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceCounts {
    pub n_targets: usize,
    pub steps: usize,
}

impl From<&DetectionLogSequence> for SequenceCounts {
    fn from(s: &DetectionLogSequence) -> Self {
        Self {
            n_targets: s.n_targets(),
            steps: s.duration_steps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldEstimate {
    pub fold: usize,
    /// Indices of the held-out sequences.
    pub held_out: Vec<usize>,
    pub train_targets: usize,
    pub train_steps: usize,
    pub expected_births: f64,
}

/// Fold of sequence `index` (round-robin in input order).
pub fn fold_of(index: usize, folds: usize) -> usize {
    index % folds
}

/// For each fold, the duration-weighted birth rate of the other folds:
/// `sum(N_seq) / sum(steps)` over the training sequences.
pub fn estimate_expected_births(sequences: &[SequenceCounts], folds: usize) -> Result<Vec<FoldEstimate>> {
    if folds < 2 {
        return Err(Error::Config(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    (0..folds)
        .map(|k| {
            let (mut n, mut steps) = (0usize, 0usize);
            let mut held_out = Vec::new();
            for (i, s) in sequences.iter().enumerate() {
                if fold_of(i, folds) == k {
                    held_out.push(i);
                } else {
                    n += s.n_targets;
                    steps += s.steps;
                }
            }
            if steps == 0 {
                return Err(Error::Config(format!("training data for fold {k} is empty")));
            }
            Ok(FoldEstimate {
                fold: k,
                held_out,
                train_targets: n,
                train_steps: steps,
                expected_births: n as f64 / steps as f64,
            })
        })
        .collect()
}

/// Replays every sequence through each model using its fold's estimate.
/// Outcomes are ordered by sequence, then model.
pub fn run_on_logs(
    cfg: &ExperimentConfig,
    sequences: &[DetectionLogSequence],
    models: &[BirthModelKind],
) -> Result<(Vec<FoldEstimate>, Vec<TrialOutcome>)> {
    let counts: Vec<SequenceCounts> = sequences.iter().map(SequenceCounts::from).collect();
    let folds = estimate_expected_births(&counts, cfg.replay.folds)?;
    let built: Vec<_> = models
        .iter()
        .map(|&k| build_model(k, &cfg.soa, &cfg.baselines))
        .collect();
    let run_seq = |(i, seq): (usize, &DetectionLogSequence)| -> Result<Vec<TrialOutcome>> {
        let n_hat = folds[fold_of(i, cfg.replay.folds)].expected_births;
        let input = LogInputConfig {
            fov: cfg.replay.fov,
            detection_sigma: cfg.replay.detection_sigma,
            classes: cfg.replay.classes.clone(),
            birth_labels: cfg.replay.birth_labels.clone(),
            expected_births: n_hat,
            confidences: cfg.confidence,
            gate: cfg.metrics.gate,
        };
        let frames = sequence_frames(seq, &input);
        let fov = seq.frames.first().and_then(|f| f.fov).unwrap_or(cfg.replay.fov);
        let kappa = cfg.replay.clutter_rate / fov.area();
        let dt = seq.dt(cfg.replay.dt);
        built
            .iter()
            .map(|model| {
                let log = run_frames(frames.iter().cloned(), cfg.filter, dt, kappa, model.as_ref())?;
                let delays = tracking_delay(&log, cfg.metrics.gate)?;
                let metrics = TrialMetrics::from_log(&log, &delays, cfg, cfg.metrics.replay_ospa_cutoff)?;
                Ok(TrialOutcome {
                    trial: seq.id.clone(),
                    seed: None,
                    birth_model: model.kind(),
                    clutter_rate: cfg.replay.clutter_rate,
                    expected_births: n_hat,
                    metrics,
                    delays,
                })
            })
            .collect()
    };
    let nested: Vec<Result<Vec<TrialOutcome>>> =
        pool(cfg.jobs)?.install(|| sequences.par_iter().enumerate().map(run_seq).collect());
    let mut out = Vec::new();
    for r in nested {
        out.extend(r?);
    }
    Ok((folds, out))
}

//! Sensitivity of initiation delay to the assumed number of births.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::montecarlo::{run_monte_carlo_with, TrialOutcome};
use crate::birth::BirthModelKind;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub birth_model: BirthModelKind,
    pub offset: i64,
    pub expected_births: f64,
    /// Mean over trials of the per-trial mean delay (s).
    pub mean_delay: f64,
    /// Spread of the per-trial mean delays at this setting (s).
    pub delay_std: f64,
    /// Trials that contributed a delay.
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub birth_model: BirthModelKind,
    pub settings: usize,
    pub mean_of_means: f64,
    /// Standard deviation of the per-setting mean delays.
    pub std_of_means: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
    pub outcomes: Vec<TrialOutcome>,
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Aggregates per-setting outcomes into sweep rows and per-model spreads.
pub fn summarize_sweep(
    outcomes: &[TrialOutcome],
    settings: &[(i64, f64)],
    models: &[BirthModelKind],
) -> (Vec<SweepRow>, Vec<SweepSummary>) {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &model in models {
        let mut means = Vec::new();
        for &(offset, n_hat) in settings {
            let delays: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.birth_model == model && o.expected_births == n_hat)
                .filter_map(|o| o.metrics.mean_delay)
                .collect();
            let (mean, std) = mean_std(&delays);
            means.push(mean);
            rows.push(SweepRow {
                birth_model: model,
                offset,
                expected_births: n_hat,
                mean_delay: mean,
                delay_std: std,
                trials: delays.len(),
            });
        }
        let finite: Vec<f64> = means.iter().copied().filter(|m| m.is_finite()).collect();
        let (mean_of_means, _) = mean_std(&finite);
        summary.push(SweepSummary {
            birth_model: model,
            settings: settings.len(),
            mean_of_means,
            std_of_means: population_std(&finite),
        });
    }
    (rows, summary)
}

/// Standard deviation with divisor `n`; zero for constant input.
pub fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    if values.iter().all(|v| *v == values[0]) {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Runs the Monte Carlo experiment at every sweep setting for the sweep's
/// models (same seeds at every setting). Settings that share an
/// expected-births value (the floor) are simulated once and reported under
/// each of their offsets.
pub fn sweep_birth_weight(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let scenario = cfg.load_scenario()?;
    let settings = cfg.sweep.settings();
    let models = if cfg.sweep.models.is_empty() {
        cfg.models()
    } else {
        cfg.sweep.models.clone()
    };
    let rate = cfg.clutter_rates.first().copied().unwrap_or(scenario.clutter_rate);
    let trials = cfg.sweep.trials.unwrap_or(cfg.trials);
    let mut outcomes = Vec::new();
    let mut done: Vec<f64> = Vec::new();
    for &(_, n_hat) in &settings {
        if done.contains(&n_hat) {
            continue;
        }
        done.push(n_hat);
        outcomes.extend(run_monte_carlo_with(cfg, &scenario, &models, &[rate], n_hat, trials)?);
    }
    let (rows, summary) = summarize_sweep(&outcomes, &settings, &models);
    Ok(SweepResult {
        rows,
        summary,
        outcomes,
    })
}

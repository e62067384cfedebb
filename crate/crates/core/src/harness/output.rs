//! CSV result tables and the run manifest.
//!
//! Every file starts with a header row; the column sets are versioned by
//! [`SCHEMA_VERSION`], recorded in `manifest.json`. Missing values (for
//! example the mean delay of a trial in which no target was detected) are
//! written as empty fields.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::crossval::FoldEstimate;
use super::montecarlo::TrialOutcome;
use super::sweep::{mean_std, SweepResult};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const TRIALS_HEADER: [&str; 8] = [
    "experiment",
    "birth_model",
    "trial",
    "seed",
    "clutter_rate",
    "expected_births",
    "metric",
    "value",
];
pub const SUMMARY_HEADER: [&str; 8] = [
    "experiment",
    "birth_model",
    "clutter_rate",
    "expected_births",
    "metric",
    "n",
    "mean",
    "std",
];
pub const DELAYS_HEADER: [&str; 10] = [
    "experiment",
    "birth_model",
    "trial",
    "clutter_rate",
    "expected_births",
    "target_id",
    "detect_step",
    "track_step",
    "delay",
    "censored",
];
pub const COMPONENTS_HEADER: [&str; 7] = [
    "experiment",
    "birth_model",
    "trial",
    "clutter_rate",
    "expected_births",
    "mean_components",
    "mean_retained_components",
];
pub const SWEEP_HEADER: [&str; 6] = [
    "birth_model",
    "offset",
    "expected_births",
    "mean_delay",
    "delay_std",
    "trials",
];
pub const SWEEP_SUMMARY_HEADER: [&str; 4] = ["birth_model", "settings", "mean_of_means", "std_of_means"];
pub const CROSSVAL_HEADER: [&str; 5] = ["fold", "held_out", "train_targets", "train_steps", "expected_births"];

fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

fn writer(dir: &Path, name: &str, header: &[&str]) -> Result<csv::Writer<std::fs::File>> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    Ok(w)
}

pub fn write_trials(dir: &Path, experiment: &str, outcomes: &[TrialOutcome]) -> Result<()> {
    let mut w = writer(dir, "trials.csv", &TRIALS_HEADER)?;
    for o in outcomes {
        for (metric, value) in o.metrics.named() {
            w.write_record([
                experiment.to_string(),
                o.birth_model.to_string(),
                o.trial.clone(),
                o.seed.map(|s| s.to_string()).unwrap_or_default(),
                num(o.clutter_rate),
                num(o.expected_births),
                metric.to_string(),
                num(value),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One summary row per (model, clutter rate, expected births, metric).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub birth_model: String,
    pub clutter_rate: f64,
    pub expected_births: f64,
    pub metric: &'static str,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

pub fn summarize(outcomes: &[TrialOutcome]) -> Vec<SummaryRow> {
    let mut groups: Vec<(String, f64, f64)> = Vec::new();
    for o in outcomes {
        let key = (o.birth_model.to_string(), o.clutter_rate, o.expected_births);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut rows = Vec::new();
    for (model, lambda, n_hat) in groups {
        let members: Vec<&TrialOutcome> = outcomes
            .iter()
            .filter(|o| o.birth_model.as_str() == model && o.clutter_rate == lambda && o.expected_births == n_hat)
            .collect();
        let mut by_metric: BTreeMap<usize, (&'static str, Vec<f64>)> = BTreeMap::new();
        for o in &members {
            for (i, (name, v)) in o.metrics.named().into_iter().enumerate() {
                let e = by_metric.entry(i).or_insert((name, Vec::new()));
                if v.is_finite() {
                    e.1.push(v);
                }
            }
        }
        for (_, (metric, values)) in by_metric {
            let (mean, std) = mean_std(&values);
            rows.push(SummaryRow {
                birth_model: model.clone(),
                clutter_rate: lambda,
                expected_births: n_hat,
                metric,
                n: values.len(),
                mean,
                std,
            });
        }
    }
    rows
}

pub fn write_summary(dir: &Path, experiment: &str, outcomes: &[TrialOutcome]) -> Result<()> {
    let mut w = writer(dir, "summary.csv", &SUMMARY_HEADER)?;
    for r in summarize(outcomes) {
        w.write_record([
            experiment.to_string(),
            r.birth_model,
            num(r.clutter_rate),
            num(r.expected_births),
            r.metric.to_string(),
            r.n.to_string(),
            num(r.mean),
            num(r.std),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_delays(dir: &Path, experiment: &str, outcomes: &[TrialOutcome]) -> Result<()> {
    let mut w = writer(dir, "delays.csv", &DELAYS_HEADER)?;
    for o in outcomes {
        for d in &o.delays.targets {
            w.write_record([
                experiment.to_string(),
                o.birth_model.to_string(),
                o.trial.clone(),
                num(o.clutter_rate),
                num(o.expected_births),
                d.id.to_string(),
                d.detect_step.to_string(),
                d.track_step.map(|k| k.to_string()).unwrap_or_default(),
                num(d.delay),
                d.censored.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_components(dir: &Path, experiment: &str, outcomes: &[TrialOutcome]) -> Result<()> {
    let mut w = writer(dir, "components.csv", &COMPONENTS_HEADER)?;
    for o in outcomes {
        w.write_record([
            experiment.to_string(),
            o.birth_model.to_string(),
            o.trial.clone(),
            num(o.clutter_rate),
            num(o.expected_births),
            num(o.metrics.mean_components),
            num(o.metrics.mean_retained_components),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// trials, summary, delays and components tables for one experiment.
pub fn write_outcomes(dir: &Path, experiment: &str, outcomes: &[TrialOutcome]) -> Result<()> {
    write_trials(dir, experiment, outcomes)?;
    write_summary(dir, experiment, outcomes)?;
    write_delays(dir, experiment, outcomes)?;
    write_components(dir, experiment, outcomes)
}

pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<()> {
    let mut w = writer(dir, "sweep.csv", &SWEEP_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.birth_model.to_string(),
            r.offset.to_string(),
            num(r.expected_births),
            num(r.mean_delay),
            num(r.delay_std),
            r.trials.to_string(),
        ])?;
    }
    w.flush()?;
    let mut w = writer(dir, "sweep_summary.csv", &SWEEP_SUMMARY_HEADER)?;
    for s in &result.summary {
        w.write_record([
            s.birth_model.to_string(),
            s.settings.to_string(),
            num(s.mean_of_means),
            num(s.std_of_means),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_crossval(dir: &Path, folds: &[FoldEstimate]) -> Result<()> {
    let mut w = writer(dir, "crossval.csv", &CROSSVAL_HEADER)?;
    for f in folds {
        let held: Vec<String> = f.held_out.iter().map(|i| i.to_string()).collect();
        w.write_record([
            f.fold.to_string(),
            held.join(";"),
            f.train_targets.to_string(),
            f.train_steps.to_string(),
            num(f.expected_births),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub files: Vec<&'a str>,
    pub config: &'a C,
}

pub fn write_manifest<C: Serialize>(dir: &Path, command: &str, files: Vec<&str>, config: &C) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let m = Manifest {
        schema_version: SCHEMA_VERSION,
        command,
        files,
        config,
    };
    let text = serde_json::to_string_pretty(&m).map_err(|e| Error::Schema(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

//! Experiment orchestration: Monte Carlo runs on the simulator, the
//! expected-births sweep, cross-validated estimation on detection logs and
//! log replay, plus the CSV writers.

pub mod config;
pub mod crossval;
pub mod logs;
pub mod montecarlo;
pub mod output;
pub mod sweep;

pub use config::{ExperimentConfig, MetricParams, ReplayParams, SweepParams};
pub use crossval::{estimate_expected_births, fold_of, run_on_logs, FoldEstimate, SequenceCounts};
pub use logs::{load_logs, parse_jsonl, scans_to_sequence, write_jsonl, DetectionLogSequence, LogFrame};
pub use montecarlo::{
    baselines_for, run_filter_on_scans, run_monte_carlo, run_monte_carlo_with, TrialMetrics, TrialOutcome,
};
pub use sweep::{population_std, sweep_birth_weight, SweepResult, SweepRow, SweepSummary};

//! Monte Carlo trials on the simulator.

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::birth::{build_model, BaselineParams, BirthModel, BirthModelKind, FixedComponent};
use crate::error::Result;
use crate::metrics::{
    cardinality_error, mean_ospa, precision, tracking_delay, DelayReport, TrialLog, TruthRecord, TruthSet,
};
use crate::sim::{build_birth_context, simulate, trial_rng, ContextConfig, Scan, Scenario};
use crate::tracker::{run_frames, FrameInput};

/// Metrics of one filter run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrialMetrics {
    /// Against the targets visible at each step.
    pub cardinality_error: f64,
    pub ospa: f64,
    /// Against every present target, occluded ones included.
    pub cardinality_error_present: f64,
    pub ospa_present: f64,
    /// Mean initiation delay over detected targets, censored ones at their
    /// bound; `None` when no target was detected.
    pub mean_delay: Option<f64>,
    pub delay_std: Option<f64>,
    pub tracked_targets: usize,
    pub censored_targets: usize,
    pub undetected_targets: usize,
    pub precision: f64,
    pub precision_no_estimates: bool,
    pub estimates: usize,
    pub mean_components: f64,
    pub mean_retained_components: f64,
}

impl TrialMetrics {
    pub fn from_log(log: &TrialLog, delays: &DelayReport, cfg: &ExperimentConfig, ospa_cutoff: f64) -> Result<Self> {
        let ospa_params = crate::metrics::OspaParams::new(ospa_cutoff, cfg.metrics.ospa_order)?;
        let prec = precision(log, cfg.metrics.precision_radius);
        let n = log.steps.len().max(1) as f64;
        Ok(Self {
            cardinality_error: cardinality_error(log, TruthSet::Visible),
            ospa: mean_ospa(log, &ospa_params, TruthSet::Visible),
            cardinality_error_present: cardinality_error(log, TruthSet::Present),
            ospa_present: mean_ospa(log, &ospa_params, TruthSet::Present),
            mean_delay: delays.mean(),
            delay_std: delays.std(),
            tracked_targets: delays.targets.len() - delays.censored(),
            censored_targets: delays.censored(),
            undetected_targets: delays.undetected,
            precision: prec.value,
            precision_no_estimates: prec.no_estimates,
            estimates: prec.estimates,
            mean_components: log.mean_component_count(),
            mean_retained_components: log.steps.iter().map(|s| s.retained_count as f64).sum::<f64>() / n,
        })
    }

    /// `(name, value)` pairs in the column order of `trials.csv`.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("cardinality_error", self.cardinality_error),
            ("ospa", self.ospa),
            ("cardinality_error_present", self.cardinality_error_present),
            ("ospa_present", self.ospa_present),
            ("mean_delay", self.mean_delay.unwrap_or(f64::NAN)),
            ("delay_std", self.delay_std.unwrap_or(f64::NAN)),
            ("tracked_targets", self.tracked_targets as f64),
            ("censored_targets", self.censored_targets as f64),
            ("undetected_targets", self.undetected_targets as f64),
            ("precision", self.precision),
            ("estimates", self.estimates as f64),
            ("mean_components", self.mean_components),
            ("mean_retained_components", self.mean_retained_components),
        ]
    }
}

/// One (trial, model, clutter rate, expected births) run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Trial index, or sequence id for replays.
    pub trial: String,
    pub seed: Option<u64>,
    pub birth_model: BirthModelKind,
    pub clutter_rate: f64,
    pub expected_births: f64,
    pub metrics: TrialMetrics,
    pub delays: DelayReport,
}

/// Frames for the filter from simulated scans.
pub fn scan_frames<'s>(
    scans: &'s [Scan],
    scenario: &'s Scenario,
    context: &'s ContextConfig,
) -> impl Iterator<Item = FrameInput> + 's {
    let sr = scenario.noise.sigma_range;
    let sb = scenario.noise.sigma_bearing();
    scans.iter().enumerate().map(move |(k, scan)| FrameInput {
        context: build_birth_context(scan, &scenario.fov, k.checked_sub(1).map(|j| &scans[j]), context),
        detections: scan.cartesian(sr, sb),
        truth: scan
            .truth
            .iter()
            .filter(|t| t.state.is_present())
            .map(|t| TruthRecord {
                id: t.id,
                position: t.state.position(),
                visible: t.visible,
                detected: t.detected,
            })
            .collect(),
    })
}

/// Runs one model over already simulated scans.
pub fn run_filter_on_scans(
    scans: &[Scan],
    scenario: &Scenario,
    model: &dyn BirthModel,
    cfg: &ExperimentConfig,
    expected_births: f64,
) -> Result<TrialLog> {
    let context = ContextConfig::for_scenario(scenario, expected_births, cfg.confidence);
    run_frames(
        scan_frames(scans, scenario, &context),
        cfg.filter,
        scenario.dt,
        scenario.clutter_intensity(),
        model,
    )
}

/// Baseline parameters for runs on `scenario`. Without configured standard
/// components, the standard model is given the places a map alone suggests
/// for births: every building door and every point where a sidewalk leaves
/// the workspace.
pub fn baselines_for(cfg: &ExperimentConfig, scenario: &Scenario) -> BaselineParams {
    let mut b = cfg.baselines.clone();
    if b.standard_components.is_empty() {
        let site = |x: f64, y: f64, sigma: f64| FixedComponent {
            x,
            y,
            sigma,
            weight: 1.0,
        };
        let door_sigma = scenario.doors.radius.max(1.0);
        let ws = &scenario.workspace;
        let eps = 1e-9;
        let mut sites: Vec<FixedComponent> = scenario
            .buildings
            .iter()
            .flat_map(|bd| &bd.doors)
            .map(|d| site(d[0], d[1], door_sigma))
            .collect();
        for r in &scenario.sidewalks {
            let (cx, cy) = (0.5 * (r.x_min + r.x_max), 0.5 * (r.y_min + r.y_max));
            let (hw, hh) = (0.5 * r.width(), 0.5 * r.height());
            if r.x_min <= ws.x_min + eps {
                sites.push(site(r.x_min, cy, hh.max(1.0)));
            }
            if r.x_max >= ws.x_max - eps {
                sites.push(site(r.x_max, cy, hh.max(1.0)));
            }
            if r.y_min <= ws.y_min + eps {
                sites.push(site(cx, r.y_min, hw.max(1.0)));
            }
            if r.y_max >= ws.y_max - eps {
                sites.push(site(cx, r.y_max, hw.max(1.0)));
            }
        }
        b.standard_components = sites;
    }
    b
}

/// The seed of trial `t`.
pub fn trial_seed(cfg: &ExperimentConfig, t: usize) -> u64 {
    cfg.base_seed.wrapping_add(t as u64)
}

/// A thread pool honoring `jobs` (0 = all cores).
pub fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| crate::error::Error::Config(format!("cannot start worker pool: {e}")))
}

/// Simulates `trials` trials (seed `base_seed + t`) per clutter rate and runs
/// every model in `models` on the same scans. Results are ordered by clutter
/// rate, trial, then model, independent of scheduling.
pub fn run_monte_carlo_with(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    models: &[BirthModelKind],
    clutter_rates: &[f64],
    expected_births: f64,
    trials: usize,
) -> Result<Vec<TrialOutcome>> {
    let baselines = baselines_for(cfg, scenario);
    let built: Vec<Box<dyn BirthModel>> = models.iter().map(|&k| build_model(k, &cfg.soa, &baselines)).collect();
    let jobs: Vec<(f64, usize)> = clutter_rates
        .iter()
        .flat_map(|&l| (0..trials).map(move |t| (l, t)))
        .collect();
    let run_one = |&(lambda, t): &(f64, usize)| -> Result<Vec<TrialOutcome>> {
        let mut sc = scenario.clone();
        sc.clutter_rate = lambda;
        let seed = trial_seed(cfg, t);
        let scans = simulate(&sc, &mut trial_rng(seed));
        built
            .iter()
            .map(|model| {
                let log = run_filter_on_scans(&scans, &sc, model.as_ref(), cfg, expected_births)?;
                let delays = tracking_delay(&log, cfg.metrics.gate)?;
                let metrics = TrialMetrics::from_log(&log, &delays, cfg, cfg.metrics.ospa_cutoff)?;
                Ok(TrialOutcome {
                    trial: t.to_string(),
                    seed: Some(seed),
                    birth_model: model.kind(),
                    clutter_rate: lambda,
                    expected_births,
                    metrics,
                    delays,
                })
            })
            .collect()
    };
    let nested: Vec<Result<Vec<TrialOutcome>>> = pool(cfg.jobs)?.install(|| jobs.par_iter().map(run_one).collect());
    let mut out = Vec::with_capacity(jobs.len() * models.len());
    for r in nested {
        out.extend(r?);
    }
    Ok(out)
}

/// The configured Monte Carlo experiment.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    let scenario = cfg.load_scenario()?;
    let rates = if cfg.clutter_rates.is_empty() {
        vec![scenario.clutter_rate]
    } else {
        cfg.clutter_rates.clone()
    };
    run_monte_carlo_with(cfg, &scenario, &cfg.models(), &rates, cfg.expected_births, cfg.trials)
}

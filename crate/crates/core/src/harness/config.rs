//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::birth::{BaselineParams, BirthModelKind, SoaParams, SourceConfidence};
use crate::error::{Error, Result};
use crate::geometry::FieldOfView;
use crate::metrics::OspaParams;
use crate::sim::{toml_error, Scenario};
use crate::tracker::FilterParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricParams {
    pub ospa_cutoff: f64,
    pub ospa_order: f64,
    /// OSPA cutoff used when replaying detection logs.
    pub replay_ospa_cutoff: f64,
    /// Distance within which an estimate counts as tracking a target (m).
    pub gate: f64,
    pub precision_radius: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            ospa_cutoff: 100.0,
            ospa_order: 1.0,
            replay_ospa_cutoff: 10.0,
            gate: 2.0,
            precision_radius: 2.0,
        }
    }
}

impl MetricParams {
    pub fn ospa(&self) -> Result<OspaParams> {
        OspaParams::new(self.ospa_cutoff, self.ospa_order)
    }

    pub fn replay_ospa(&self) -> Result<OspaParams> {
        OspaParams::new(self.replay_ospa_cutoff, self.ospa_order)
    }
}

/// Expected-births sweep: `N = max((center + offset) / divisor, floor)` for
/// every integer offset in `-half_width..=half_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub center: f64,
    pub half_width: u32,
    pub divisor: f64,
    pub floor: f64,
    /// Trials per sweep setting; falls back to `trials` when absent.
    pub trials: Option<usize>,
    pub models: Vec<BirthModelKind>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            center: 6.0,
            half_width: 10,
            divisor: 100.0,
            floor: 1e-4,
            trials: None,
            models: vec![BirthModelKind::Soa, BirthModelKind::Uniform],
        }
    }
}

impl SweepParams {
    pub fn settings(&self) -> Vec<(i64, f64)> {
        let h = self.half_width as i64;
        (-h..=h)
            .map(|o| (o, ((self.center + o as f64) / self.divisor).max(self.floor)))
            .collect()
    }
}

/// Detection-log replay and cross-validation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplayParams {
    /// JSONL file or a directory of `*.jsonl` files.
    pub logs: Option<PathBuf>,
    pub folds: usize,
    /// Sensor footprint for frames that do not carry one.
    pub fov: FieldOfView,
    /// Expected false detections per frame.
    pub clutter_rate: f64,
    /// Position standard deviation for detections without their own (m).
    pub detection_sigma: f64,
    /// Frame period when the timestamps cannot provide one (s).
    pub dt: f64,
    /// Detection classes to track; empty keeps all.
    pub classes: Vec<String>,
    pub birth_labels: Vec<String>,
}

impl Default for ReplayParams {
    fn default() -> Self {
        Self {
            logs: None,
            folds: 7,
            fov: FieldOfView::full_circle(80.0),
            clutter_rate: 3.0,
            detection_sigma: 0.5,
            dt: 0.1,
            classes: Vec::new(),
            birth_labels: vec!["sidewalk".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario file; the bundled intersection when absent.
    pub scenario: Option<PathBuf>,
    pub birth_model: BirthModelKind,
    /// Models run side by side on the same simulated scans. Defaults to
    /// `[birth_model]`.
    pub compare: Vec<BirthModelKind>,
    pub trials: usize,
    pub base_seed: u64,
    /// Clutter rates to run; the scenario's rate when empty.
    pub clutter_rates: Vec<f64>,
    pub expected_births: f64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub filter: FilterParams,
    pub soa: SoaParams,
    pub confidence: SourceConfidence,
    pub baselines: BaselineParams,
    pub metrics: MetricParams,
    pub sweep: SweepParams,
    pub replay: ReplayParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            birth_model: BirthModelKind::Soa,
            compare: Vec::new(),
            trials: 100,
            base_seed: 1,
            clutter_rates: Vec::new(),
            expected_births: 0.06,
            output_dir: PathBuf::from("results"),
            jobs: 0,
            filter: FilterParams::default(),
            soa: SoaParams::default(),
            // The simulator's sidewalk labels are exact, so the semantic
            // source is trusted more than the geometric ones.
            confidence: SourceConfidence {
                occlusion: 1.0,
                semantic: 3.0,
                fov: 1.0,
            },
            baselines: BaselineParams::default(),
            metrics: MetricParams::default(),
            sweep: SweepParams::default(),
            replay: ReplayParams::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating referenced files.
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| toml_error(e, text, path))
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.scenario.as_mut() {
            fix(p);
        }
        if let Some(p) = self.replay.logs.as_mut() {
            fix(p);
        }
    }

    pub fn models(&self) -> Vec<BirthModelKind> {
        if self.compare.is_empty() {
            vec![self.birth_model]
        } else {
            self.compare.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.expected_births >= 0.0) || !self.expected_births.is_finite() {
            return Err(Error::Config(format!(
                "expected_births must be finite and nonnegative, got {}",
                self.expected_births
            )));
        }
        if self.clutter_rates.iter().any(|l| !(*l >= 0.0)) {
            return Err(Error::Config("clutter rates must be nonnegative".into()));
        }
        for p in self.scenario.iter().chain(self.replay.logs.iter()) {
            if !p.exists() {
                return Err(Error::Config(format!("referenced file {} does not exist", p.display())));
            }
        }
        if self.replay.folds < 2 {
            return Err(Error::Config("cross-validation needs at least 2 folds".into()));
        }
        if !(self.sweep.divisor > 0.0) || !(self.sweep.floor > 0.0) {
            return Err(Error::Config("sweep divisor and floor must be positive".into()));
        }
        self.filter.validate()?;
        self.soa.validate()?;
        self.metrics.ospa()?;
        self.metrics.replay_ospa()?;
        if !(self.metrics.gate > 0.0) || !(self.metrics.precision_radius > 0.0) {
            return Err(Error::Config("gate and precision radius must be positive".into()));
        }
        self.replay.fov.validate()?;
        Ok(())
    }

    pub fn load_scenario(&self) -> Result<Scenario> {
        match &self.scenario {
            Some(p) => Scenario::load(p),
            None => Ok(Scenario::default()),
        }
    }
}

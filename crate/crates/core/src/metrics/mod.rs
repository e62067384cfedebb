//! Random-finite-set evaluation: OSPA, cardinality error, track-initiation
//! delay and precision.

pub mod assignment;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gm::Position;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OspaParams {
    pub cutoff: f64,
    pub order: f64,
}

impl OspaParams {
    pub fn new(cutoff: f64, order: f64) -> Result<Self> {
        if !(cutoff > 0.0) || !(order >= 1.0) {
            return Err(Error::Config(format!(
                "OSPA needs cutoff > 0 and order >= 1 (got c={cutoff}, p={order})"
            )));
        }
        Ok(Self { cutoff, order })
    }
}

fn canonical_key(points: &[Position]) -> Vec<(u64, u64)> {
    let mut k: Vec<(u64, u64)> = points.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
    k.sort_unstable();
    k
}

/// OSPA distance between two finite point sets. Both empty gives 0.
pub fn ospa(x: &[Position], y: &[Position], params: &OspaParams) -> f64 {
    // Equal-size sets are oriented canonically so that `ospa(x, y)` and
    // `ospa(y, x)` run the identical computation and agree bit for bit.
    let x_first = match x.len().cmp(&y.len()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => canonical_key(x) <= canonical_key(y),
    };
    let (small, large) = if x_first { (x, y) } else { (y, x) };
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return 0.0;
    }
    let c = params.cutoff;
    let p = params.order;
    let cost: Vec<f64> = small
        .iter()
        .flat_map(|a| large.iter().map(move |b| (a - b).norm().min(c).powf(p)))
        .collect();
    let (_, loc) = assignment::solve(&cost, m, n);
    let total = loc + c.powf(p) * (n - m) as f64;
    (total / n as f64).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub id: u32,
    pub position: Position,
    pub visible: bool,
    pub detected: bool,
}

/// One step of a trial. `truth` lists the targets that count toward the true
/// cardinality (alive and outside buildings).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub truth: Vec<TruthRecord>,
    pub estimates: Vec<Position>,
    pub measurement_count: usize,
    /// Component count of the posterior before pruning.
    pub component_count: usize,
    /// Component count carried to the next step.
    pub retained_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub dt: f64,
    pub steps: Vec<StepRecord>,
}

impl TrialLog {
    pub fn first_detected(&self, id: u32) -> Option<usize> {
        self.steps
            .iter()
            .position(|s| s.truth.iter().any(|t| t.id == id && t.detected))
    }

    pub fn first_visible(&self, id: u32) -> Option<usize> {
        self.steps
            .iter()
            .position(|s| s.truth.iter().any(|t| t.id == id && t.visible))
    }

    /// Target ids in order of first appearance.
    pub fn target_ids(&self) -> Vec<u32> {
        let mut ids = Vec::new();
        for s in &self.steps {
            for t in &s.truth {
                if !ids.contains(&t.id) {
                    ids.push(t.id);
                }
            }
        }
        ids
    }

    pub fn mean_component_count(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.component_count as f64).sum::<f64>() / self.steps.len() as f64
    }
}

/// Which true targets a step is scored against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSet {
    /// Targets the sensor can currently see.
    #[default]
    Visible,
    /// Every alive target outside a building, occluded or not.
    Present,
}

impl TruthSet {
    pub fn positions(self, step: &StepRecord) -> Vec<Position> {
        step.truth
            .iter()
            .filter(|t| self == TruthSet::Present || t.visible)
            .map(|t| t.position)
            .collect()
    }
}

/// Mean over steps of `|#estimates - #truth|`.
pub fn cardinality_error(log: &TrialLog, truth: TruthSet) -> f64 {
    if log.steps.is_empty() {
        return 0.0;
    }
    let sum: f64 = log
        .steps
        .iter()
        .map(|s| (s.estimates.len() as f64 - truth.positions(s).len() as f64).abs())
        .sum();
    sum / log.steps.len() as f64
}

/// Mean over steps of the OSPA distance between estimates and truth.
pub fn mean_ospa(log: &TrialLog, params: &OspaParams, truth: TruthSet) -> f64 {
    if log.steps.is_empty() {
        return 0.0;
    }
    let sum: f64 = log
        .steps
        .iter()
        .map(|s| ospa(&s.estimates, &truth.positions(s), params))
        .sum();
    sum / log.steps.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetDelay {
    pub id: u32,
    pub detect_step: usize,
    /// First step at or after detection with an estimate inside the gate.
    pub track_step: Option<usize>,
    /// Seconds. For censored targets, the time from detection to the last step.
    pub delay: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub targets: Vec<TargetDelay>,
    /// Targets never detected during the trial.
    pub undetected: usize,
}

impl DelayReport {
    /// Mean delay over all detected targets, censored ones at their bound.
    pub fn mean(&self) -> Option<f64> {
        if self.targets.is_empty() {
            return None;
        }
        Some(self.targets.iter().map(|t| t.delay).sum::<f64>() / self.targets.len() as f64)
    }

    pub fn std(&self) -> Option<f64> {
        let mean = self.mean()?;
        let n = self.targets.len() as f64;
        Some((self.targets.iter().map(|t| (t.delay - mean).powi(2)).sum::<f64>() / n).sqrt())
    }

    pub fn censored(&self) -> usize {
        self.targets.iter().filter(|t| t.censored).count()
    }
}

/// Time from each target's first detection to the first estimate within
/// `gate` meters of it.
pub fn tracking_delay(log: &TrialLog, gate: f64) -> Result<DelayReport> {
    if !(gate > 0.0) {
        return Err(Error::Config(format!("delay gate must be positive, got {gate}")));
    }
    let mut report = DelayReport::default();
    let last = log.steps.len().saturating_sub(1);
    let g2 = gate * gate;
    for id in log.target_ids() {
        let Some(kd) = log.first_detected(id) else {
            report.undetected += 1;
            continue;
        };
        let kt = (kd..log.steps.len()).find(|&k| {
            let step = &log.steps[k];
            step.truth
                .iter()
                .find(|t| t.id == id)
                .is_some_and(|t| step.estimates.iter().any(|e| (e - t.position).norm_squared() <= g2))
        });
        let (delay, censored) = match kt {
            Some(kt) => ((kt - kd) as f64 * log.dt, false),
            None => ((last - kd) as f64 * log.dt, true),
        };
        report.targets.push(TargetDelay {
            id,
            detect_step: kd,
            track_step: kt,
            delay,
            censored,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub value: f64,
    pub estimates: usize,
    /// Set when there were no estimates and `value` defaults to 1.
    pub no_estimates: bool,
}

/// Fraction of all estimates within `radius` of some true target.
pub fn precision(log: &TrialLog, radius: f64) -> Precision {
    let r2 = radius * radius;
    let mut total = 0usize;
    let mut hits = 0usize;
    for s in &log.steps {
        for e in &s.estimates {
            total += 1;
            if s.truth.iter().any(|t| (t.position - e).norm_squared() <= r2) {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Precision {
            value: 1.0,
            estimates: 0,
            no_estimates: true,
        };
    }
    Precision {
        value: hits as f64 / total as f64,
        estimates: total,
        no_estimates: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector2;

    fn p(x: f64, y: f64) -> Position {
        Vector2::new(x, y)
    }

    fn truth(id: u32, x: f64, detected: bool) -> TruthRecord {
        TruthRecord {
            id,
            position: p(x, 0.0),
            visible: detected,
            detected,
        }
    }

    #[test]
    fn ospa_basics() {
        let params = OspaParams::new(100.0, 1.0).unwrap();
        let x = [p(1.0, 2.0), p(-3.0, 4.0)];
        assert_eq!(ospa(&x, &x, &params), 0.0);
        assert_eq!(ospa(&[p(0.0, 0.0)], &[], &params), 100.0);
        assert_eq!(ospa(&[], &[], &params), 0.0);
        // one matched at distance 3, one missing
        let d = ospa(&[p(0.0, 0.0)], &[p(3.0, 0.0), p(50.0, 50.0)], &params);
        assert_relative_eq!(d, (3.0 + 100.0) / 2.0);
        assert!(OspaParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn ospa_order_two_with_cutoff() {
        let params = OspaParams::new(10.0, 2.0).unwrap();
        let d = ospa(&[p(0.0, 0.0), p(100.0, 0.0)], &[p(0.0, 4.0), p(0.0, 500.0)], &params);
        assert_relative_eq!(d, ((16.0 + 100.0) / 2.0f64).sqrt(), epsilon = 1e-12);
    }

    fn three_step_log() -> TrialLog {
        TrialLog {
            dt: 0.1,
            steps: vec![
                StepRecord {
                    truth: vec![truth(1, 0.0, true), truth(2, 10.0, false)],
                    estimates: vec![],
                    ..Default::default()
                },
                StepRecord {
                    truth: vec![truth(1, 0.0, true), truth(2, 10.0, true)],
                    estimates: vec![p(0.5, 0.0)],
                    ..Default::default()
                },
                StepRecord {
                    truth: vec![truth(1, 0.0, true)],
                    estimates: vec![p(0.0, 0.0), p(30.0, 0.0), p(40.0, 0.0)],
                    ..Default::default()
                },
            ],
        }
    }

    #[test]
    fn cardinality_by_hand() {
        // visible: |0-1| + |1-2| + |3-1| = 4; present: |0-2| + |1-2| + |3-1| = 5
        assert_relative_eq!(cardinality_error(&three_step_log(), TruthSet::Visible), 4.0 / 3.0);
        assert_relative_eq!(cardinality_error(&three_step_log(), TruthSet::Present), 5.0 / 3.0);
        let perfect = TrialLog {
            dt: 0.1,
            steps: vec![StepRecord {
                truth: vec![truth(1, 0.0, true)],
                estimates: vec![p(0.0, 0.0)],
                ..Default::default()
            }],
        };
        assert_eq!(cardinality_error(&perfect, TruthSet::Visible), 0.0);
        let blind = TrialLog {
            dt: 0.1,
            steps: vec![StepRecord {
                truth: (0..6).map(|i| truth(i, i as f64, true)).collect(),
                ..Default::default()
            }],
        };
        assert_eq!(cardinality_error(&blind, TruthSet::Present), 6.0);
    }

    #[test]
    fn delays() {
        let log = three_step_log();
        let r = tracking_delay(&log, 2.0).unwrap();
        assert_eq!(r.targets.len(), 2);
        assert_relative_eq!(r.targets[0].delay, 0.1);
        assert!(!r.targets[0].censored);
        // target 2 is detected at step 1 and never tracked
        assert!(r.targets[1].censored);
        assert_relative_eq!(r.targets[1].delay, 0.1);
        assert!(tracking_delay(&log, 0.0).is_err());
    }

    #[test]
    fn delay_index_arithmetic() {
        let mut steps = Vec::new();
        for k in 0..12 {
            steps.push(StepRecord {
                truth: vec![truth(7, 3.0, k >= 5)],
                estimates: if k >= 9 { vec![p(3.5, 0.5)] } else { vec![] },
                ..Default::default()
            });
        }
        let log = TrialLog { dt: 0.1, steps };
        let r = tracking_delay(&log, 2.0).unwrap();
        assert_eq!(r.targets[0].detect_step, 5);
        assert_eq!(r.targets[0].track_step, Some(9));
        assert_relative_eq!(r.targets[0].delay, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn undetected_targets_are_counted() {
        let log = TrialLog {
            dt: 0.1,
            steps: vec![StepRecord {
                truth: vec![truth(1, 0.0, false)],
                estimates: vec![p(0.0, 0.0)],
                ..Default::default()
            }],
        };
        let r = tracking_delay(&log, 2.0).unwrap();
        assert!(r.targets.is_empty());
        assert_eq!(r.undetected, 1);
        assert_eq!(r.mean(), None);
    }

    #[test]
    fn precision_counts() {
        let mk = |est: Vec<Position>| TrialLog {
            dt: 0.1,
            steps: vec![StepRecord {
                truth: vec![truth(1, 0.0, true), truth(2, 10.0, true)],
                estimates: est,
                ..Default::default()
            }],
        };
        assert_eq!(precision(&mk(vec![p(0.0, 0.0), p(10.0, 1.0)]), 2.0).value, 1.0);
        assert_eq!(precision(&mk(vec![p(60.0, 0.0), p(0.0, 50.0)]), 2.0).value, 0.0);
        let mixed = precision(&mk(vec![p(0.0, 0.0), p(10.0, 0.0), p(0.5, 0.5), p(5.0, 0.0)]), 2.0);
        assert_eq!(mixed.value, 0.75);
        let none = precision(&mk(vec![]), 2.0);
        assert!(none.no_estimates);
        assert_eq!(none.value, 1.0);
    }
}

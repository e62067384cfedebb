//! The per-scan GM-PHD loop: birth, predict, update, prune/merge, extract.

use serde::{Deserialize, Serialize};

use crate::birth::{BirthContext, BirthModel};
use crate::error::{Error, Result};
use crate::gm::{
    cap, expected_cardinality, extract_states, merge, predict, update_pruned, Detection, GaussianMixture,
    MeasurementModel, MotionModel, StateVector,
};
use crate::metrics::{StepRecord, TrialLog, TruthRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterParams {
    pub survival_prob: f64,
    pub detection_prob: f64,
    pub prune_threshold: f64,
    pub merge_threshold: f64,
    pub max_components: usize,
    pub extraction_threshold: f64,
    /// White-noise acceleration of the constant-velocity model (m/s^2).
    pub accel_sigma: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            survival_prob: 0.99,
            detection_prob: 0.98,
            prune_threshold: 1e-5,
            merge_threshold: 4.0,
            max_components: 300,
            extraction_threshold: 0.5,
            accel_sigma: 1.0,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.survival_prob) || !prob(self.detection_prob) {
            return Err(Error::Config(format!(
                "survival/detection probabilities must lie in [0, 1] (got {}, {})",
                self.survival_prob, self.detection_prob
            )));
        }
        if !(self.prune_threshold > 0.0) || !(self.merge_threshold > 0.0) || self.max_components == 0 {
            return Err(Error::Config(
                "prune/merge thresholds and the component cap must be positive".into(),
            ));
        }
        if !(self.extraction_threshold > 0.0 && self.extraction_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "extraction threshold must lie in (0, 1], got {}",
                self.extraction_threshold
            )));
        }
        if !(self.accel_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "accel_sigma must be nonnegative, got {}",
                self.accel_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub estimates: Vec<StateVector>,
    /// Posterior size before pruning, `J_pred * (1 + |Z|)`.
    pub component_count: usize,
    /// Posterior size after pruning, merging and capping.
    pub retained_count: usize,
    pub expected_cardinality: f64,
}

pub struct Tracker<'a> {
    pub params: FilterParams,
    pub motion: MotionModel,
    pub measurement: MeasurementModel,
    birth: &'a dyn BirthModel,
    posterior: GaussianMixture,
}

impl<'a> Tracker<'a> {
    pub fn new(params: FilterParams, dt: f64, clutter_intensity: f64, birth: &'a dyn BirthModel) -> Self {
        Self {
            params,
            motion: MotionModel::constant_velocity(dt, params.accel_sigma, params.survival_prob),
            measurement: MeasurementModel::position(params.detection_prob, clutter_intensity),
            birth,
            posterior: GaussianMixture::new(),
        }
    }

    pub fn posterior(&self) -> &GaussianMixture {
        &self.posterior
    }

    pub fn step(&mut self, ctx: &BirthContext, detections: &[Detection]) -> Result<StepOutput> {
        let birth = self.birth.birth_intensity(ctx)?;
        let predicted = predict(&self.posterior, &self.motion, &birth)?;
        let (updated, component_count) =
            update_pruned(&predicted, detections, &self.measurement, self.params.prune_threshold)?;
        let merged = merge(&updated, self.params.merge_threshold)?;
        self.posterior = cap(merged, self.params.max_components);
        Ok(StepOutput {
            estimates: extract_states(&self.posterior, self.params.extraction_threshold),
            component_count,
            retained_count: self.posterior.len(),
            expected_cardinality: expected_cardinality(&self.posterior),
        })
    }
}

/// Everything the filter sees at one step, plus the truth used for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInput {
    pub context: BirthContext,
    pub detections: Vec<Detection>,
    pub truth: Vec<TruthRecord>,
}

/// Runs one filter over a sequence of frames.
pub fn run_frames<I>(
    frames: I,
    params: FilterParams,
    dt: f64,
    clutter_intensity: f64,
    birth: &dyn BirthModel,
) -> Result<TrialLog>
where
    I: IntoIterator<Item = FrameInput>,
{
    let mut tracker = Tracker::new(params, dt, clutter_intensity, birth);
    let mut steps = Vec::new();
    for frame in frames {
        let out = tracker.step(&frame.context, &frame.detections)?;
        steps.push(StepRecord {
            truth: frame.truth,
            estimates: out.estimates.iter().map(|m| m.xy()).collect(),
            measurement_count: frame.detections.len(),
            component_count: out.component_count,
            retained_count: out.retained_count,
        });
    }
    Ok(TrialLog { dt, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birth::{BirthModelKind, LabeledPoint};
    use crate::geometry::{EgoPose, FieldOfView};
    use crate::gm::Position;
    use nalgebra::{Matrix2, Vector2};

    struct NoBirth;
    impl BirthModel for NoBirth {
        fn kind(&self) -> BirthModelKind {
            BirthModelKind::StandardGm
        }
        fn birth_intensity(&self, _: &BirthContext) -> Result<GaussianMixture> {
            Ok(GaussianMixture::new())
        }
    }

    fn frame(z: &[Position]) -> FrameInput {
        let mut context = BirthContext::empty(EgoPose::new(0.0, 0.0, 0.0), FieldOfView::full_circle(100.0));
        context.labeled_points.push(LabeledPoint {
            position: Vector2::new(0.0, 0.0),
            label: "sidewalk".into(),
        });
        FrameInput {
            context,
            detections: z.iter().map(|p| Detection::new(*p, Matrix2::identity())).collect(),
            truth: Vec::new(),
        }
    }

    #[test]
    fn defaults_validate() {
        FilterParams::default().validate().unwrap();
        let bad = FilterParams {
            extraction_threshold: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn no_birth_no_tracks() {
        let frames = (0..10).map(|_| frame(&[Vector2::new(5.0, 5.0)]));
        let log = run_frames(frames, FilterParams::default(), 0.1, 1e-4, &NoBirth).unwrap();
        assert_eq!(log.steps.len(), 10);
        assert!(log
            .steps
            .iter()
            .all(|s| s.estimates.is_empty() && s.component_count == 0));
        assert!(log.steps.iter().all(|s| s.measurement_count == 1));
    }

    #[test]
    fn uniform_birth_initiates_a_static_target() {
        let model = crate::birth::UniformBirth {
            grid_spacing: 10.0,
            sigma_u: 5.0,
            sigma_v0: 1.0,
        };
        let frames = (0..30).map(|_| {
            let mut f = frame(&[Vector2::new(5.0, 5.0)]);
            f.context.expected_births = 0.06;
            f.context.workspace = Some(crate::geometry::AlignedRect::new(-20.0, 20.0, -20.0, 20.0));
            f
        });
        let log = run_frames(frames, FilterParams::default(), 0.1, 1e-4, &model).unwrap();
        let last = log.steps.last().unwrap();
        assert_eq!(last.estimates.len(), 1);
        assert!((last.estimates[0] - Vector2::new(5.0, 5.0)).norm() < 1.0);
    }
}

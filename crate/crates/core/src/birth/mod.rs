//! Birth intensities.
//!
//! Every model consumes a [`BirthContext`] snapshot of the current scan and
//! returns a Gaussian mixture whose total weight is the expected number of
//! new targets for the step (or an empty mixture).

mod baseline;
mod soa;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baseline::{
    adaptive_birth, partially_uniform_birth, standard_gm_birth, uniform_birth, AdaptiveBirth, BaselineParams,
    FixedComponent, PartiallyUniformBirth, StandardGmBirth, UniformBirth,
};
pub use soa::{combine, fov_birth, occlusion_birth, ray_covariance, semantic_birth, soa_birth, SoaBirth, SoaParams};

use crate::error::{Error, Result};
use crate::geometry::{AlignedRect, EgoPose, FieldOfView, Obstacle};
use crate::gm::{GaussianMixture, Position};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub position: Position,
    pub label: String,
}

/// Relative reliability of each birth source. Only the ratios matter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfidence {
    pub occlusion: f64,
    pub semantic: f64,
    pub fov: f64,
}

impl Default for SourceConfidence {
    fn default() -> Self {
        Self {
            occlusion: 1.0,
            semantic: 1.0,
            fov: 1.0,
        }
    }
}

/// Per-scan inputs shared by every birth model.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthContext {
    pub ego: EgoPose,
    pub fov: FieldOfView,
    /// Region targets can occupy; the uniform grids tile it. When absent the
    /// bounding box of the field of view is used.
    pub workspace: Option<AlignedRect>,
    pub obstacles: Vec<Obstacle>,
    pub labeled_points: Vec<LabeledPoint>,
    pub birth_labels: Vec<String>,
    /// Previous scan's detections in the global frame.
    pub prev_measurements: Vec<Position>,
    /// Expected number of new targets per step.
    pub expected_births: f64,
    pub confidences: SourceConfidence,
}

impl BirthContext {
    /// Empty scene around `ego` with no expected births.
    pub fn empty(ego: EgoPose, fov: FieldOfView) -> Self {
        Self {
            ego,
            fov,
            workspace: None,
            obstacles: Vec::new(),
            labeled_points: Vec::new(),
            birth_labels: Vec::new(),
            prev_measurements: Vec::new(),
            expected_births: 0.0,
            confidences: SourceConfidence::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.expected_births >= 0.0) || !self.expected_births.is_finite() {
            return Err(Error::Config(format!(
                "expected births must be finite and nonnegative, got {}",
                self.expected_births
            )));
        }
        let c = self.confidences;
        if [c.occlusion, c.semantic, c.fov]
            .iter()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(Error::Config(format!("invalid source confidences {c:?}")));
        }
        self.fov.validate()
    }

    pub fn is_birth_label(&self, label: &str) -> bool {
        self.birth_labels.iter().any(|l| l == label)
    }

    /// Workspace used to lay out grids.
    pub fn grid_region(&self) -> AlignedRect {
        self.workspace.unwrap_or_else(|| {
            let r = self.fov.max_range;
            AlignedRect::new(self.ego.x - r, self.ego.x + r, self.ego.y - r, self.ego.y + r)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BirthModelKind {
    Soa,
    Uniform,
    PartiallyUniform,
    Adaptive,
    StandardGm,
}

impl BirthModelKind {
    pub const ALL: [BirthModelKind; 5] = [
        BirthModelKind::Soa,
        BirthModelKind::Uniform,
        BirthModelKind::PartiallyUniform,
        BirthModelKind::Adaptive,
        BirthModelKind::StandardGm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BirthModelKind::Soa => "soa",
            BirthModelKind::Uniform => "uniform",
            BirthModelKind::PartiallyUniform => "partially_uniform",
            BirthModelKind::Adaptive => "adaptive",
            BirthModelKind::StandardGm => "standard_gm",
        }
    }
}

impl fmt::Display for BirthModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BirthModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BirthModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.replace('-', "_"))
            .ok_or_else(|| Error::Config(format!("unknown birth model `{s}`")))
    }
}

/// A source of birth intensity for the PHD prediction.
pub trait BirthModel: Send + Sync {
    fn kind(&self) -> BirthModelKind;

    fn birth_intensity(&self, ctx: &BirthContext) -> Result<GaussianMixture>;
}

/// Instantiates the configured model.
pub fn build_model(kind: BirthModelKind, soa: &SoaParams, baseline: &BaselineParams) -> Box<dyn BirthModel> {
    match kind {
        BirthModelKind::Soa => Box::new(SoaBirth { params: *soa }),
        BirthModelKind::Uniform => Box::new(UniformBirth::from(baseline)),
        BirthModelKind::PartiallyUniform => Box::new(PartiallyUniformBirth::from(baseline)),
        BirthModelKind::Adaptive => Box::new(AdaptiveBirth::from(baseline)),
        BirthModelKind::StandardGm => Box::new(StandardGmBirth::from(baseline)),
    }
}

/// Gives every component the weight `total / J`.
pub(crate) fn equal_weights(mut mixture: GaussianMixture, total: f64) -> GaussianMixture {
    let n = mixture.len();
    if n > 0 {
        let w = total / n as f64;
        for c in &mut mixture.components {
            c.weight = w;
        }
    }
    mixture
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_round_trip() {
        for k in BirthModelKind::ALL {
            assert_eq!(k.as_str().parse::<BirthModelKind>().unwrap(), k);
        }
        assert_eq!(
            "partially-uniform".parse::<BirthModelKind>().unwrap(),
            BirthModelKind::PartiallyUniform
        );
        assert!("gaussian".parse::<BirthModelKind>().is_err());
    }

    #[test]
    fn context_validation() {
        let mut ctx = BirthContext::empty(EgoPose::new(0.0, 0.0, 0.0), FieldOfView::full_circle(10.0));
        assert!(ctx.validate().is_ok());
        ctx.expected_births = -1.0;
        assert!(ctx.validate().is_err());
        ctx.expected_births = 0.1;
        ctx.confidences.fov = f64::NAN;
        assert!(ctx.validate().is_err());
    }
}

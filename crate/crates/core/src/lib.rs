//! Multi-target tracking with a Gaussian-mixture PHD filter and pluggable
//! birth intensities, including a semantic and occlusion-aware birth model.
//!
//! * [`gm`]: Gaussian mixtures and the predict/update/prune/merge/extract recursion.
//! * [`geometry`]: frames, obstacles, occlusion cones and the field of view.
//! * [`birth`]: the birth-model interface and its implementations.
//! * [`sim`]: a seedable bird's-eye-view intersection simulator.
//! * [`tracker`]: the per-scan filter loop that turns scans into a [`metrics::TrialLog`].
//! * [`metrics`]: OSPA, cardinality error, initiation delay, precision.
//! * [`harness`]: Monte Carlo experiments, sweeps, cross-validation and log replay.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod birth;
pub mod error;
pub mod geometry;
pub mod gm;
pub mod harness;
pub mod metrics;
pub mod sim;
pub mod tracker;

pub use birth::{BirthContext, BirthModel, BirthModelKind, SoaParams, SourceConfidence};
pub use error::{Error, Result};
pub use geometry::{EgoPose, FieldOfView, Obstacle, OcclusionCone};
pub use gm::{Detection, GaussianComponent, GaussianMixture, MeasurementModel, MotionModel, StateVector};
pub use metrics::{OspaParams, TrialLog};

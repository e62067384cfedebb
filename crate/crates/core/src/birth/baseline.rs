//! Reference birth models: uniform grid, coarse grid plus boundary terms,
//! measurement-driven, and fixed a-priori components.
//!
//! The partially uniform and measurement-driven variants are reconstructions
//! from one-line descriptions of the original methods.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::{equal_weights, BirthContext, BirthModel, BirthModelKind};
use crate::error::Result;
use crate::geometry::{fov_boundary_points, AlignedRect};
use crate::gm::{embed_position, GaussianMixture, Position};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedComponent {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineParams {
    pub grid_spacing: f64,
    pub sigma_u: f64,
    pub sigma_adapt: f64,
    pub fov_spacing: f64,
    pub sigma_fov: f64,
    pub sigma_v0: f64,
    pub standard_components: Vec<FixedComponent>,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            grid_spacing: 10.0,
            sigma_u: 5.0,
            sigma_adapt: 2.0,
            fov_spacing: 10.0,
            sigma_fov: 2.0,
            sigma_v0: 1.0,
            standard_components: Vec::new(),
        }
    }
}

/// Grid nodes spaced `spacing` apart, centered in `region`.
fn grid(region: &AlignedRect, spacing: f64) -> Vec<Position> {
    let axis = |lo: f64, len: f64| {
        let n = (len / spacing).floor() as usize;
        let offset = 0.5 * (len - n as f64 * spacing);
        (0..=n).map(move |i| lo + offset + i as f64 * spacing)
    };
    let xs: Vec<f64> = axis(region.x_min, region.width()).collect();
    axis(region.y_min, region.height())
        .flat_map(|y| xs.iter().map(move |&x| Vector2::new(x, y)))
        .collect()
}

fn isotropic(points: impl IntoIterator<Item = Position>, sigma: f64, sigma_v0: f64) -> GaussianMixture {
    let cov = Matrix2::identity() * sigma * sigma;
    points
        .into_iter()
        .map(|p| embed_position(1.0, p, cov, sigma_v0))
        .collect()
}

/// Isotropic components on a regular grid over the workspace, clipped to the FOV.
pub fn uniform_birth(ctx: &BirthContext, grid_spacing: f64, sigma_u: f64, sigma_v0: f64) -> GaussianMixture {
    let pts = grid(&ctx.grid_region(), grid_spacing)
        .into_iter()
        .filter(|p| ctx.fov.contains(&ctx.ego, p));
    equal_weights(isotropic(pts, sigma_u, sigma_v0), ctx.expected_births)
}

/// Grid at twice the spacing, restricted to free space, plus FOV boundary terms.
pub fn partially_uniform_birth(ctx: &BirthContext, params: &BaselineParams) -> GaussianMixture {
    let pts = grid(&ctx.grid_region(), 2.0 * params.grid_spacing)
        .into_iter()
        .filter(|p| ctx.fov.contains(&ctx.ego, p) && !ctx.obstacles.iter().any(|o| o.contains(p)));
    let mut m = isotropic(pts, params.sigma_u, params.sigma_v0);
    m.extend(isotropic(
        fov_boundary_points(&ctx.ego, &ctx.fov, params.fov_spacing),
        params.sigma_fov,
        params.sigma_v0,
    ));
    equal_weights(m, ctx.expected_births)
}

/// One component on each of the previous scan's detections.
pub fn adaptive_birth(ctx: &BirthContext, sigma_adapt: f64, sigma_v0: f64) -> GaussianMixture {
    equal_weights(
        isotropic(ctx.prev_measurements.iter().copied(), sigma_adapt, sigma_v0),
        ctx.expected_births,
    )
}

/// The configured components, rescaled so their weights sum to the expected
/// number of births. Relative weights are kept.
pub fn standard_gm_birth(fixed: &[FixedComponent], expected_births: f64, sigma_v0: f64) -> GaussianMixture {
    let total: f64 = fixed.iter().map(|c| c.weight).sum();
    let m: GaussianMixture = fixed
        .iter()
        .map(|c| {
            embed_position(
                c.weight,
                Vector2::new(c.x, c.y),
                Matrix2::identity() * c.sigma * c.sigma,
                sigma_v0,
            )
        })
        .collect();
    if total > 0.0 {
        let mut m = m;
        for c in &mut m.components {
            c.weight *= expected_births / total;
        }
        m
    } else {
        equal_weights(m, expected_births)
    }
}

#[derive(Debug, Clone)]
pub struct UniformBirth {
    pub grid_spacing: f64,
    pub sigma_u: f64,
    pub sigma_v0: f64,
}

impl From<&BaselineParams> for UniformBirth {
    fn from(p: &BaselineParams) -> Self {
        Self {
            grid_spacing: p.grid_spacing,
            sigma_u: p.sigma_u,
            sigma_v0: p.sigma_v0,
        }
    }
}

impl BirthModel for UniformBirth {
    fn kind(&self) -> BirthModelKind {
        BirthModelKind::Uniform
    }

    fn birth_intensity(&self, ctx: &BirthContext) -> Result<GaussianMixture> {
        ctx.validate()?;
        Ok(uniform_birth(ctx, self.grid_spacing, self.sigma_u, self.sigma_v0))
    }
}

#[derive(Debug, Clone)]
pub struct PartiallyUniformBirth {
    pub params: BaselineParams,
}

impl From<&BaselineParams> for PartiallyUniformBirth {
    fn from(p: &BaselineParams) -> Self {
        Self { params: p.clone() }
    }
}

impl BirthModel for PartiallyUniformBirth {
    fn kind(&self) -> BirthModelKind {
        BirthModelKind::PartiallyUniform
    }

    fn birth_intensity(&self, ctx: &BirthContext) -> Result<GaussianMixture> {
        ctx.validate()?;
        Ok(partially_uniform_birth(ctx, &self.params))
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveBirth {
    pub sigma_adapt: f64,
    pub sigma_v0: f64,
}

impl From<&BaselineParams> for AdaptiveBirth {
    fn from(p: &BaselineParams) -> Self {
        Self {
            sigma_adapt: p.sigma_adapt,
            sigma_v0: p.sigma_v0,
        }
    }
}

impl BirthModel for AdaptiveBirth {
    fn kind(&self) -> BirthModelKind {
        BirthModelKind::Adaptive
    }

    fn birth_intensity(&self, ctx: &BirthContext) -> Result<GaussianMixture> {
        ctx.validate()?;
        Ok(adaptive_birth(ctx, self.sigma_adapt, self.sigma_v0))
    }
}

#[derive(Debug, Clone)]
pub struct StandardGmBirth {
    pub components: Vec<FixedComponent>,
    pub sigma_v0: f64,
}

impl From<&BaselineParams> for StandardGmBirth {
    fn from(p: &BaselineParams) -> Self {
        Self {
            components: p.standard_components.clone(),
            sigma_v0: p.sigma_v0,
        }
    }
}

impl BirthModel for StandardGmBirth {
    fn kind(&self) -> BirthModelKind {
        BirthModelKind::StandardGm
    }

    fn birth_intensity(&self, ctx: &BirthContext) -> Result<GaussianMixture> {
        ctx.validate()?;
        Ok(standard_gm_birth(&self.components, ctx.expected_births, self.sigma_v0))
    }
}

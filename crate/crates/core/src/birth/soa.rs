//! Semantic and occlusion-aware birth: components behind obstacles, on
//! birth-labeled ground, and along the sensor boundary, weighted by source
//! confidence.

use nalgebra::{Matrix2, Rotation2};
use serde::{Deserialize, Serialize};

use super::{BirthContext, BirthModel, BirthModelKind};
use crate::error::{Error, Result};
use crate::geometry::{
    fov_boundary_points, is_occluded, min_distance_sample, occlusion_cone, polar_to_global, OcclusionCone,
};
use crate::gm::{embed_position, GaussianMixture, Position};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SoaParams {
    /// Radial spacing of occlusion layers (m).
    pub delta_r: f64,
    /// Number of layers behind each boundary ray.
    pub layers: usize,
    /// Standard deviation along the boundary ray (m).
    pub sigma_par: f64,
    /// Standard deviation across the boundary ray (m).
    pub sigma_perp: f64,
    /// Minimum spacing between semantic components (m).
    pub d_min: f64,
    pub sigma_sem: f64,
    pub sigma_fov: f64,
    pub fov_spacing: f64,
    /// Velocity standard deviation of every birth component (m/s).
    pub sigma_v0: f64,
}

impl Default for SoaParams {
    fn default() -> Self {
        Self {
            delta_r: 3.0,
            layers: 3,
            sigma_par: 3.0,
            sigma_perp: 1.0,
            d_min: 4.0,
            sigma_sem: 2.0,
            sigma_fov: 2.0,
            fov_spacing: 10.0,
            sigma_v0: 1.0,
        }
    }
}

impl SoaParams {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.delta_r,
            self.sigma_par,
            self.sigma_perp,
            self.d_min,
            self.sigma_sem,
            self.sigma_fov,
            self.fov_spacing,
            self.sigma_v0,
        ];
        if self.layers == 0 || vals.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!("S-OA parameters must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Covariance elongated along the global direction `angle`.
pub fn ray_covariance(angle: f64, sigma_par: f64, sigma_perp: f64) -> Matrix2<f64> {
    let rot = Rotation2::new(angle).into_inner();
    let diag = Matrix2::new(sigma_par * sigma_par, 0.0, 0.0, sigma_perp * sigma_perp);
    let mut p = rot * diag * rot.transpose();
    p[(0, 1)] = 0.5 * (p[(0, 1)] + p[(1, 0)]);
    p[(1, 0)] = p[(0, 1)];
    p
}

fn cones(ctx: &BirthContext) -> Vec<OcclusionCone> {
    ctx.obstacles
        .iter()
        .filter_map(|o| occlusion_cone(&ctx.ego, o).ok())
        .collect()
}

/// Unit-weight components along both tangent rays of every obstacle.
pub fn occlusion_birth(ctx: &BirthContext, params: &SoaParams) -> GaussianMixture {
    let mut out = GaussianMixture::new();
    for cone in cones(ctx) {
        for (theta, r_b) in [
            (cone.theta_min, cone.r_boundary_min),
            (cone.theta_max, cone.r_boundary_max),
        ] {
            let cov = ray_covariance(ctx.ego.theta + theta, params.sigma_par, params.sigma_perp);
            for layer in 1..=params.layers {
                let r = r_b + layer as f64 * params.delta_r;
                if !ctx.fov.contains_polar(r, theta) {
                    continue;
                }
                let p = polar_to_global(&ctx.ego, r, theta);
                out.push(embed_position(1.0, p, cov, params.sigma_v0));
            }
        }
    }
    out
}

/// Unit-weight isotropic components on visible birth-labeled ground, thinned
/// to `d_min` spacing.
pub fn semantic_birth(ctx: &BirthContext, params: &SoaParams) -> GaussianMixture {
    let cones = cones(ctx);
    let candidates: Vec<Position> = ctx
        .labeled_points
        .iter()
        .filter(|p| ctx.is_birth_label(&p.label))
        .map(|p| p.position)
        .filter(|p| ctx.fov.contains(&ctx.ego, p) && !is_occluded(p, &ctx.ego, &cones))
        .collect();
    let cov = Matrix2::identity() * params.sigma_sem * params.sigma_sem;
    min_distance_sample(&candidates, params.d_min)
        .into_iter()
        .map(|p| embed_position(1.0, p, cov, params.sigma_v0))
        .collect()
}

/// Unit-weight isotropic components along the FOV boundary.
pub fn fov_birth(ctx: &BirthContext, params: &SoaParams) -> GaussianMixture {
    let cov = Matrix2::identity() * params.sigma_fov * params.sigma_fov;
    fov_boundary_points(&ctx.ego, &ctx.fov, params.fov_spacing)
        .into_iter()
        .map(|p| embed_position(1.0, p, cov, params.sigma_v0))
        .collect()
}

/// Concatenates the three sources. Component `i` of source `s` receives
/// `N * rho_s / sum_j rho_s(j)`, so the total is exactly the expected number
/// of births. Sources with zero confidence contribute nothing.
pub fn combine(
    occl: GaussianMixture,
    sem: GaussianMixture,
    fov: GaussianMixture,
    ctx: &BirthContext,
) -> Result<GaussianMixture> {
    let rho = ctx.confidences;
    let sources = [(occl, rho.occlusion), (sem, rho.semantic), (fov, rho.fov)];
    let nonempty = sources.iter().any(|(m, _)| !m.is_empty());
    if !nonempty {
        return Ok(GaussianMixture::new());
    }
    let denom: f64 = sources.iter().map(|(m, r)| m.len() as f64 * r).sum();
    if !(denom > 0.0) {
        return Err(Error::Config(
            "all source confidences are zero but birth sources are nonempty".into(),
        ));
    }
    let mut out = GaussianMixture::new();
    for (mixture, r) in sources {
        if r == 0.0 {
            continue;
        }
        let w = ctx.expected_births * r / denom;
        out.components.extend(mixture.components.into_iter().map(|mut c| {
            c.weight = w;
            c
        }));
    }
    Ok(out)
}

pub fn soa_birth(ctx: &BirthContext, params: &SoaParams) -> Result<GaussianMixture> {
    ctx.validate()?;
    combine(
        occlusion_birth(ctx, params),
        semantic_birth(ctx, params),
        fov_birth(ctx, params),
        ctx,
    )
}

#[derive(Debug, Clone, Default)]
pub struct SoaBirth {
    pub params: SoaParams,
}

impl BirthModel for SoaBirth {
    fn kind(&self) -> BirthModelKind {
        BirthModelKind::Soa
    }

    fn birth_intensity(&self, ctx: &BirthContext) -> Result<GaussianMixture> {
        soa_birth(ctx, &self.params)
    }
}

//! Bird's-eye-view geometry: frames, obstacles, occlusion cones and the sensor
//! field of view.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{Rotation2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gm::Position;

/// Angular slack used by the inclusive sector tests.
pub const ANGLE_EPS: f64 = 1e-9;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let x = (a + PI).rem_euclid(TAU) - PI;
    if x <= -PI {
        x + TAU
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl EgoPose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Position {
        Vector2::new(self.x, self.y)
    }
}

/// Global position of a return at range `r` and sensor-relative bearing `theta`.
pub fn polar_to_global(ego: &EgoPose, r: f64, theta: f64) -> Position {
    let a = ego.theta + theta;
    Vector2::new(ego.x + r * a.cos(), ego.y + r * a.sin())
}

/// Inverse of [`polar_to_global`]; the bearing of the ego position itself is 0.
pub fn global_to_polar(ego: &EgoPose, p: &Position) -> (f64, f64) {
    let d = p - ego.position();
    let r = d.norm();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    (r, normalize_angle(d.y.atan2(d.x) - ego.theta))
}

/// Axis-aligned rectangle, used for the workspace and semantic regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl AlignedRect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, p: &Position) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> Position {
        Vector2::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    pub fn to_obstacle(&self) -> Obstacle {
        Obstacle::Rectangle {
            center: self.center(),
            half_extents: Vector2::new(0.5 * self.width(), 0.5 * self.height()),
            yaw: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstacle {
    Circle {
        center: Position,
        radius: f64,
    },
    /// Oriented rectangle; `yaw` rotates the local x axis.
    Rectangle {
        center: Position,
        half_extents: Vector2<f64>,
        yaw: f64,
    },
}

impl Obstacle {
    pub fn circle(x: f64, y: f64, radius: f64) -> Self {
        Obstacle::Circle {
            center: Vector2::new(x, y),
            radius,
        }
    }

    pub fn rectangle(x: f64, y: f64, half_x: f64, half_y: f64, yaw: f64) -> Self {
        Obstacle::Rectangle {
            center: Vector2::new(x, y),
            half_extents: Vector2::new(half_x, half_y),
            yaw,
        }
    }

    pub fn center(&self) -> Position {
        match self {
            Obstacle::Circle { center, .. } | Obstacle::Rectangle { center, .. } => *center,
        }
    }

    pub fn with_center(&self, c: Position) -> Self {
        let mut o = *self;
        match &mut o {
            Obstacle::Circle { center, .. } | Obstacle::Rectangle { center, .. } => *center = c,
        }
        o
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Obstacle::Circle { radius, center } => *radius > 0.0 && center.iter().all(|v| v.is_finite()),
            Obstacle::Rectangle {
                half_extents,
                center,
                yaw,
            } => {
                half_extents.x > 0.0 && half_extents.y > 0.0 && center.iter().all(|v| v.is_finite()) && yaw.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("degenerate obstacle {self:?}")))
        }
    }

    /// Radius of the smallest circle around the center enclosing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Obstacle::Circle { radius, .. } => *radius,
            Obstacle::Rectangle { half_extents, .. } => half_extents.norm(),
        }
    }

    pub fn contains(&self, p: &Position) -> bool {
        match self {
            Obstacle::Circle { center, radius } => (p - center).norm_squared() <= radius * radius,
            Obstacle::Rectangle {
                center,
                half_extents,
                yaw,
            } => {
                let local = Rotation2::new(-yaw) * (p - center);
                local.x.abs() <= half_extents.x && local.y.abs() <= half_extents.y
            }
        }
    }

    pub fn corners(&self) -> Option<[Position; 4]> {
        match self {
            Obstacle::Circle { .. } => None,
            Obstacle::Rectangle {
                center,
                half_extents,
                yaw,
            } => {
                let rot = Rotation2::new(*yaw);
                let (hx, hy) = (half_extents.x, half_extents.y);
                Some([
                    center + rot * Vector2::new(hx, hy),
                    center + rot * Vector2::new(-hx, hy),
                    center + rot * Vector2::new(-hx, -hy),
                    center + rot * Vector2::new(hx, -hy),
                ])
            }
        }
    }
}

/// Angular sector hidden behind an obstacle, relative to the ego heading.
///
/// `theta_min` and `theta_max` are in `(-pi, pi]`; the sector runs
/// counter-clockwise from `theta_min` to `theta_max` and may straddle the
/// `pi` cut, in which case `theta_min > theta_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcclusionCone {
    pub theta_min: f64,
    pub theta_max: f64,
    /// Range beyond which in-sector points are hidden.
    pub r_near: f64,
    /// Range of the tangent point on the `theta_min` ray.
    pub r_boundary_min: f64,
    /// Range of the tangent point on the `theta_max` ray.
    pub r_boundary_max: f64,
}

impl OcclusionCone {
    pub fn width(&self) -> f64 {
        (self.theta_max - self.theta_min).rem_euclid(TAU)
    }

    pub fn contains_bearing(&self, theta: f64) -> bool {
        let off = normalize_angle(theta - self.theta_min);
        let w = self.width();
        (off >= -ANGLE_EPS && off <= w + ANGLE_EPS) || (w + ANGLE_EPS >= TAU)
    }

    pub fn contains_polar(&self, r: f64, theta: f64) -> bool {
        r > self.r_near && self.contains_bearing(theta)
    }
}

/// Tangent cone of `obstacle` seen from `ego`.
pub fn occlusion_cone(ego: &EgoPose, obstacle: &Obstacle) -> Result<OcclusionCone> {
    obstacle.validate()?;
    let origin = ego.position();
    if obstacle.contains(&origin) {
        return Err(Error::Geometry("ego inside obstacle".into()));
    }
    match obstacle {
        Obstacle::Circle { center, radius } => {
            let d = (center - origin).norm();
            let bearing = normalize_angle((center.y - origin.y).atan2(center.x - origin.x) - ego.theta);
            let half = (radius / d).asin();
            let r_near = (d * d - radius * radius).sqrt();
            Ok(OcclusionCone {
                theta_min: normalize_angle(bearing - half),
                theta_max: normalize_angle(bearing + half),
                r_near,
                r_boundary_min: r_near,
                r_boundary_max: r_near,
            })
        }
        Obstacle::Rectangle { center, .. } => {
            let corners = obstacle.corners().expect("rectangle has corners");
            let (_, ref_bearing) = global_to_polar(ego, center);
            let mut lo = (f64::INFINITY, 0.0);
            let mut hi = (f64::NEG_INFINITY, 0.0);
            let mut r_near = f64::INFINITY;
            for c in &corners {
                let (r, b) = global_to_polar(ego, c);
                let off = normalize_angle(b - ref_bearing);
                if off < lo.0 {
                    lo = (off, r);
                }
                if off > hi.0 {
                    hi = (off, r);
                }
                r_near = r_near.min(r);
            }
            if hi.0 - lo.0 >= PI {
                return Err(Error::Geometry(
                    "rectangle spans a sector of pi or more; ego too close".into(),
                ));
            }
            Ok(OcclusionCone {
                theta_min: normalize_angle(ref_bearing + lo.0),
                theta_max: normalize_angle(ref_bearing + hi.0),
                r_near,
                r_boundary_min: lo.1,
                r_boundary_max: hi.1,
            })
        }
    }
}

/// True when `point` lies inside any of `cones`.
pub fn is_occluded(point: &Position, ego: &EgoPose, cones: &[OcclusionCone]) -> bool {
    if cones.is_empty() {
        return false;
    }
    let (r, theta) = global_to_polar(ego, point);
    cones.iter().any(|c| c.contains_polar(r, theta))
}

/// Greedy order-preserving thinning: a point is kept when it is at least
/// `d_min` away from every point kept before it.
pub fn min_distance_sample(points: &[Position], d_min: f64) -> Vec<Position> {
    let d2 = d_min * d_min;
    let cell = |p: &Position| ((p.x / d_min).floor() as i64, (p.y / d_min).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut kept: Vec<Position> = Vec::new();
    for p in points {
        let (cx, cy) = cell(p);
        let clash = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                grid.get(&(cx + dx, cy + dy))
                    .is_some_and(|ids| ids.iter().any(|&i| (kept[i] - p).norm_squared() < d2))
            })
        });
        if !clash {
            grid.entry((cx, cy)).or_default().push(kept.len());
            kept.push(*p);
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FovShape {
    FullCircle,
    /// Sector centered on the ego heading, spanning `+-half_angle`.
    Sector {
        half_angle: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldOfView {
    pub shape: FovShape,
    pub max_range: f64,
}

impl FieldOfView {
    pub fn full_circle(max_range: f64) -> Self {
        Self {
            shape: FovShape::FullCircle,
            max_range,
        }
    }

    pub fn sector(max_range: f64, half_angle: f64) -> Self {
        Self {
            shape: FovShape::Sector { half_angle },
            max_range,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.max_range > 0.0
            && match self.shape {
                FovShape::FullCircle => true,
                FovShape::Sector { half_angle } => half_angle > 0.0 && half_angle <= PI,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("invalid field of view {self:?}")))
        }
    }

    pub fn half_angle(&self) -> f64 {
        match self.shape {
            FovShape::FullCircle => PI,
            FovShape::Sector { half_angle } => half_angle,
        }
    }

    pub fn area(&self) -> f64 {
        self.half_angle() * self.max_range * self.max_range
    }

    pub fn contains_polar(&self, r: f64, theta: f64) -> bool {
        r <= self.max_range && theta.abs() <= self.half_angle() + ANGLE_EPS
    }

    pub fn contains(&self, ego: &EgoPose, p: &Position) -> bool {
        let (r, theta) = global_to_polar(ego, p);
        self.contains_polar(r, theta)
    }

    /// Perimeter of the visible region; for sectors this includes both radial edges.
    pub fn boundary_length(&self) -> f64 {
        match self.shape {
            FovShape::FullCircle => TAU * self.max_range,
            FovShape::Sector { half_angle } if half_angle >= PI => TAU * self.max_range,
            FovShape::Sector { half_angle } => 2.0 * half_angle * self.max_range + 2.0 * self.max_range,
        }
    }
}

/// Equally spaced points along the FOV boundary.
///
/// `ceil(boundary_length / spacing)` points are placed at the midpoints of
/// equal arc-length intervals. A sector boundary is walked out along the
/// right edge, around the arc, and back along the left edge.
pub fn fov_boundary_points(ego: &EgoPose, fov: &FieldOfView, spacing: f64) -> Vec<Position> {
    let length = fov.boundary_length();
    let n = (length / spacing).ceil().max(1.0) as usize;
    let step = length / n as f64;
    let rmax = fov.max_range;
    let half = fov.half_angle();
    let closed = half >= PI;
    (0..n)
        .map(|i| {
            let s = (i as f64 + 0.5) * step;
            if closed {
                return polar_to_global(ego, rmax, normalize_angle(-PI + s / rmax));
            }
            let arc = 2.0 * half * rmax;
            if s < rmax {
                polar_to_global(ego, s, -half)
            } else if s < rmax + arc {
                polar_to_global(ego, rmax, -half + (s - rmax) / rmax)
            } else {
                polar_to_global(ego, rmax - (s - rmax - arc), half)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn origin() -> EgoPose {
        EgoPose::new(0.0, 0.0, 0.0)
    }

    #[test]
    fn normalization_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert_relative_eq!(normalize_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        for k in -20..20 {
            let a = normalize_angle(k as f64 * 0.77);
            assert!(a > -PI && a <= PI);
        }
    }

    #[test]
    fn circle_cone() {
        let cone = occlusion_cone(&origin(), &Obstacle::circle(10.0, 0.0, 5.0)).unwrap();
        assert_relative_eq!(cone.theta_min, -PI / 6.0, epsilon = 1e-12);
        assert_relative_eq!(cone.theta_max, PI / 6.0, epsilon = 1e-12);
        assert_relative_eq!(cone.theta_min, -cone.theta_max, epsilon = 1e-15);
        assert_relative_eq!(cone.r_near, 75f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn square_cone_spans_near_corners() {
        let cone = occlusion_cone(&origin(), &Obstacle::rectangle(10.0, 0.0, 0.5, 0.5, 0.0)).unwrap();
        let b = 0.5f64.atan2(9.5);
        assert_relative_eq!(cone.theta_max, b, epsilon = 1e-12);
        assert_relative_eq!(cone.theta_min, -b, epsilon = 1e-12);
        assert_relative_eq!(cone.r_near, (9.5f64 * 9.5 + 0.25).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn cone_wraps_behind_ego() {
        let cone = occlusion_cone(&origin(), &Obstacle::circle(-10.0, 0.0, 5.0)).unwrap();
        assert!(cone.theta_min > cone.theta_max);
        assert_relative_eq!(cone.width(), PI / 3.0, epsilon = 1e-12);
        assert!(cone.contains_bearing(PI));
        assert!(!cone.contains_bearing(0.0));
    }

    #[test]
    fn ego_inside_is_an_error() {
        assert!(occlusion_cone(&origin(), &Obstacle::circle(1.0, 0.0, 5.0)).is_err());
        assert!(occlusion_cone(&origin(), &Obstacle::rectangle(0.0, 0.0, 1.0, 1.0, 0.3)).is_err());
    }

    #[test]
    fn occlusion_membership() {
        let ego = origin();
        assert!(!is_occluded(&Vector2::new(20.0, 0.0), &ego, &[]));
        let cone = occlusion_cone(&ego, &Obstacle::circle(10.0, 0.0, 5.0)).unwrap();
        assert!(is_occluded(&Vector2::new(20.0, 0.0), &ego, &[cone]));
        assert!(!is_occluded(&Vector2::new(3.0, 0.0), &ego, &[cone]));
        assert!(!is_occluded(&Vector2::new(20.0, 20.0), &ego, &[cone]));
    }

    #[test]
    fn thinning() {
        assert!(min_distance_sample(&[], 3.0).is_empty());
        let one = [Vector2::new(1.0, 2.0)];
        assert_eq!(min_distance_sample(&one, 3.0), one.to_vec());
        let pts = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(5.0, 0.0)];
        assert_eq!(
            min_distance_sample(&pts, 3.0),
            vec![Vector2::new(0.0, 0.0), Vector2::new(5.0, 0.0)]
        );
    }

    #[test]
    fn polar_frames() {
        assert_relative_eq!(polar_to_global(&origin(), 1.0, 0.0), Vector2::new(1.0, 0.0));
        let up = EgoPose::new(0.0, 0.0, PI / 2.0);
        assert_relative_eq!(polar_to_global(&up, 1.0, 0.0), Vector2::new(0.0, 1.0), epsilon = 1e-15);
        assert_eq!(global_to_polar(&up, &Vector2::new(0.0, 0.0)), (0.0, 0.0));
        let ego = EgoPose::new(3.0, -2.0, 2.5);
        for (r, t) in [(1.0, 0.3), (7.5, -3.0), (0.2, PI)] {
            let (r2, t2) = global_to_polar(&ego, &polar_to_global(&ego, r, t));
            assert_relative_eq!(r2, r, epsilon = 1e-12);
            assert_relative_eq!(t2, t, epsilon = 1e-12);
        }
    }

    #[test]
    fn fov_boundary_counts() {
        let ego = origin();
        let full = FieldOfView::full_circle(50.0);
        assert_eq!(fov_boundary_points(&ego, &full, TAU * 50.0).len(), 1);
        let semi = FieldOfView::sector(50.0, PI / 2.0);
        let pts = fov_boundary_points(&ego, &semi, 10.0);
        // 16 arc intervals (pi*50/10) plus 5 per radial edge
        assert_eq!(pts.len(), 26);
        let on_arc = pts.iter().filter(|p| (p.norm() - 50.0).abs() < 1e-9).count();
        assert!(on_arc >= 15);
        for p in &pts {
            assert!(p.norm() <= 50.0 + 1e-9);
            assert!(p.x >= -1e-9);
        }
        for s in [1.0, 3.0, 7.0, 20.0] {
            assert!(fov_boundary_points(&ego, &semi, 2.0 * s).len() <= fov_boundary_points(&ego, &semi, s).len());
        }
    }

    #[test]
    fn fov_points_equally_spaced_on_circle() {
        let ego = EgoPose::new(5.0, 5.0, 1.0);
        let fov = FieldOfView::full_circle(30.0);
        let pts = fov_boundary_points(&ego, &fov, 10.0);
        assert_eq!(pts.len(), (TAU * 30.0 / 10.0).ceil() as usize);
        for w in pts.windows(2) {
            assert!((w[1] - w[0]).norm() <= 10.0);
            assert_relative_eq!((w[0] - ego.position()).norm(), 30.0, epsilon = 1e-9);
        }
    }
}

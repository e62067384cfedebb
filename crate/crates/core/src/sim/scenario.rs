//! Scenario description and its TOML schema.

use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AlignedRect, EgoPose, FieldOfView, Obstacle};
use crate::gm::Position;

/// The bundled intersection layout.
pub const DEFAULT_SCENARIO: &str = include_str!("../../scenarios/intersection.toml");

/// `[time, x, y]` waypoint.
pub type Waypoint = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorNoise {
    /// Range noise (m).
    pub sigma_range: f64,
    /// Bearing noise (degrees).
    pub sigma_bearing_deg: f64,
    /// Per-step speed perturbation (m/s).
    pub sigma_speed: f64,
    /// Per-step heading perturbation (degrees).
    pub sigma_heading_deg: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            sigma_range: 1.0,
            sigma_bearing_deg: 5.0,
            sigma_speed: 0.1,
            sigma_heading_deg: 3.0,
        }
    }
}

impl SensorNoise {
    pub fn sigma_bearing(&self) -> f64 {
        self.sigma_bearing_deg.to_radians()
    }

    pub fn sigma_heading(&self) -> f64 {
        self.sigma_heading_deg.to_radians()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovingObstacle {
    pub shape: Obstacle,
    pub waypoints: Vec<Waypoint>,
    /// Restart the path after the last waypoint.
    #[serde(default)]
    pub looped: bool,
}

impl MovingObstacle {
    pub fn at(&self, t: f64) -> Obstacle {
        let p = interpolate(&self.waypoints, t, self.looped);
        self.shape.with_center(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Building {
    #[serde(flatten)]
    pub footprint: AlignedRect,
    /// Door locations on the footprint boundary.
    #[serde(default)]
    pub doors: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpawn {
    pub spawn_time: f64,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub inside_building: bool,
}

/// Per-trial perturbation of the scripted target spawns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Randomize {
    /// Half-width of the uniform position jitter (m); resampled until the
    /// target lands on a sidewalk.
    pub position_jitter: f64,
    /// Half-width of the uniform spawn-time jitter (s).
    pub spawn_time_jitter: f64,
    pub random_heading: bool,
    pub speed_range: [f64; 2],
}

impl Default for Randomize {
    fn default() -> Self {
        Self {
            position_jitter: 0.0,
            spawn_time_jitter: 0.0,
            random_heading: false,
            speed_range: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoorModel {
    /// Distance from a door at which a pedestrian may enter (m).
    pub radius: f64,
    /// Per-step entry probability when near a door.
    pub enter_prob: f64,
    /// Per-step exit probability while inside.
    pub exit_prob: f64,
}

impl Default for DoorModel {
    fn default() -> Self {
        Self {
            radius: 2.0,
            enter_prob: 0.01,
            exit_prob: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticSampling {
    pub label: String,
    /// Grid spacing of labeled points on sidewalks (m).
    pub grid_spacing: f64,
    /// Half-width of the uniform jitter applied to each grid point (m).
    pub jitter: f64,
}

impl Default for SemanticSampling {
    fn default() -> Self {
        Self {
            label: "sidewalk".into(),
            grid_spacing: 1.5,
            jitter: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub duration: f64,
    pub dt: f64,
    pub workspace: AlignedRect,
    pub fov: FieldOfView,
    /// Expected clutter returns per scan.
    pub clutter_rate: f64,
    pub p_detect: f64,
    #[serde(default)]
    pub noise: SensorNoise,
    #[serde(default)]
    pub semantics: SemanticSampling,
    #[serde(default)]
    pub doors: DoorModel,
    #[serde(default)]
    pub randomize: Randomize,
    pub ego_waypoints: Vec<Waypoint>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub moving_obstacles: Vec<MovingObstacle>,
    #[serde(default)]
    pub buildings: Vec<Building>,
    #[serde(default)]
    pub sidewalks: Vec<AlignedRect>,
    #[serde(default)]
    pub targets: Vec<TargetSpawn>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::from_toml_str(DEFAULT_SCENARIO, Path::new("<bundled intersection>")).expect("bundled scenario parses")
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| toml_error(e, text, path))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path)
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0) || !(self.duration > 0.0) {
            return bad(format!(
                "dt and duration must be positive (dt={}, duration={})",
                self.dt, self.duration
            ));
        }
        if !(0.0..=1.0).contains(&self.p_detect) {
            return bad(format!("p_detect must lie in [0, 1], got {}", self.p_detect));
        }
        if !(self.clutter_rate >= 0.0) {
            return bad(format!("clutter_rate must be nonnegative, got {}", self.clutter_rate));
        }
        if self.ego_waypoints.is_empty() {
            return bad("at least one ego waypoint is required".into());
        }
        self.fov.validate()?;
        for o in &self.obstacles {
            o.validate()?;
        }
        for m in &self.moving_obstacles {
            m.shape.validate()?;
            if m.waypoints.is_empty() {
                return bad("moving obstacle without waypoints".into());
            }
        }
        let ws = &self.workspace;
        let inside =
            |r: &AlignedRect| r.x_min >= ws.x_min && r.x_max <= ws.x_max && r.y_min >= ws.y_min && r.y_max <= ws.y_max;
        for r in self.sidewalks.iter().chain(self.buildings.iter().map(|b| &b.footprint)) {
            if !inside(r) || r.width() <= 0.0 || r.height() <= 0.0 {
                return bad(format!("region {r:?} is empty or leaves the workspace"));
            }
        }
        for t in &self.targets {
            if !ws.contains(&Vector2::new(t.x, t.y)) {
                return bad(format!("target spawn ({}, {}) outside the workspace", t.x, t.y));
            }
        }
        Ok(())
    }

    pub fn ego_at(&self, t: f64) -> EgoPose {
        let p = interpolate(&self.ego_waypoints, t, false);
        let heading = heading_at(&self.ego_waypoints, t);
        EgoPose::new(p.x, p.y, heading)
    }

    /// Static, moving and building occluders at time `t`.
    pub fn obstacles_at(&self, t: f64) -> Vec<Obstacle> {
        self.obstacles
            .iter()
            .copied()
            .chain(self.moving_obstacles.iter().map(|m| m.at(t)))
            .chain(self.buildings.iter().map(|b| b.footprint.to_obstacle()))
            .collect()
    }

    pub fn on_sidewalk(&self, p: &Position) -> bool {
        self.sidewalks.iter().any(|s| s.contains(p))
    }

    /// Clutter intensity per square meter seen by a filter.
    pub fn clutter_intensity(&self) -> f64 {
        self.clutter_rate / self.fov.area()
    }
}

pub(crate) fn toml_error(e: toml::de::Error, text: &str, path: &Path) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.message().to_string(),
    }
}

fn segment(wps: &[Waypoint], t: f64, looped: bool) -> (usize, f64) {
    let n = wps.len();
    if n == 1 {
        return (0, 0.0);
    }
    let (t0, t1) = (wps[0][0], wps[n - 1][0]);
    let mut t = t;
    if looped && t1 > t0 {
        t = t0 + (t - t0).rem_euclid(t1 - t0);
    }
    if t <= t0 {
        return (0, 0.0);
    }
    if t >= t1 {
        return (n - 2, 1.0);
    }
    let i = wps
        .windows(2)
        .position(|w| t >= w[0][0] && t < w[1][0])
        .unwrap_or(n - 2);
    let span = wps[i + 1][0] - wps[i][0];
    let f = if span > 0.0 { (t - wps[i][0]) / span } else { 1.0 };
    (i, f)
}

pub(crate) fn interpolate(wps: &[Waypoint], t: f64, looped: bool) -> Position {
    let (i, f) = segment(wps, t, looped);
    if wps.len() == 1 {
        return Vector2::new(wps[0][1], wps[0][2]);
    }
    let a = Vector2::new(wps[i][1], wps[i][2]);
    let b = Vector2::new(wps[i + 1][1], wps[i + 1][2]);
    a + (b - a) * f
}

/// Direction of travel; held from the last moving segment while parked.
fn heading_at(wps: &[Waypoint], t: f64) -> f64 {
    if wps.len() < 2 {
        return 0.0;
    }
    let (i, _) = segment(wps, t, false);
    for j in (0..=i).rev().chain(i + 1..wps.len() - 1) {
        let d = Vector2::new(wps[j + 1][1] - wps[j][1], wps[j + 1][2] - wps[j][2]);
        if d.norm() > 1e-9 {
            return d.y.atan2(d.x);
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bundled_scenario_is_valid() {
        let s = Scenario::default();
        assert_eq!(s.steps(), 1000);
        assert_eq!(s.targets.len(), 6);
        assert_eq!(s.moving_obstacles.len(), 3);
        assert!(s.buildings.len() >= 2);
        assert_eq!(s.p_detect, 0.98);
        assert_eq!(s.noise, SensorNoise::default());
    }

    #[test]
    fn waypoint_interpolation() {
        let wps = [[0.0, 0.0, 0.0], [10.0, 10.0, 0.0], [20.0, 10.0, 10.0]];
        assert_relative_eq!(interpolate(&wps, 5.0, false), Vector2::new(5.0, 0.0));
        assert_relative_eq!(interpolate(&wps, 15.0, false), Vector2::new(10.0, 5.0));
        assert_relative_eq!(interpolate(&wps, 50.0, false), Vector2::new(10.0, 10.0));
        assert_relative_eq!(interpolate(&wps, 25.0, true), Vector2::new(5.0, 0.0));
        assert_relative_eq!(heading_at(&wps, 15.0), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "duration = 10.0\ndt = \"fast\"\n";
        match Scenario::from_toml_str(text, Path::new("s.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, Some(2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation_rejects_bad_values() {
        let s = Scenario {
            dt: 0.0,
            ..Scenario::default()
        };
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        s.sidewalks.push(AlignedRect::new(100.0, 200.0, 0.0, 1.0));
        assert!(s.validate().is_err());
    }
}

//! Ground-truth world state, pedestrian motion and the range/bearing sensor.
//!
//! Randomness comes from a single `ChaCha8Rng` per trial, consumed in a fixed
//! order so that a `(scenario, seed)` pair replays bit-identically:
//!
//! 1. construction: per target, in file order: spawn-time jitter, position
//!    jitter (two uniforms per attempt, up to 100 attempts), heading, speed;
//! 2. each [`World::step`]: per target, in id order: speed noise, heading
//!    noise, door draw (always three draws, whatever the target's state);
//! 3. each [`World::sense`]: per target: detection draw, range noise, bearing
//!    noise (always three draws); then the Poisson clutter count and two
//!    uniforms per clutter return; then two jitter uniforms per semantic grid
//!    node, sidewalks in file order, rows then columns.

use std::f64::consts::PI;

use nalgebra::Vector2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::birth::{BirthContext, LabeledPoint, SourceConfidence};
use crate::geometry::{
    global_to_polar, is_occluded, normalize_angle, occlusion_cone, polar_to_global, AlignedRect, EgoPose, FieldOfView,
    FovShape, Obstacle, OcclusionCone,
};
use crate::gm::{Detection, Position};

const SPAWN_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
    pub alive: bool,
    pub inside_building: bool,
}

impl TargetState {
    pub fn position(&self) -> Position {
        Vector2::new(self.x, self.y)
    }

    /// Alive and out in the open.
    pub fn is_present(&self) -> bool {
        self.alive && !self.inside_building
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub id: u32,
    /// Step at which the target becomes alive.
    pub spawn_step: usize,
    pub state: TargetState,
}

/// One range/bearing return. `origin` is the target id, `None` for clutter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeBearing {
    pub range: f64,
    pub bearing: f64,
    pub origin: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthState {
    pub id: u32,
    pub state: TargetState,
    pub visible: bool,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub step: usize,
    pub time: f64,
    pub ego: EgoPose,
    pub detections: Vec<RangeBearing>,
    pub obstacle_observations: Vec<Obstacle>,
    pub labeled_points: Vec<LabeledPoint>,
    /// Every alive target, including those inside buildings.
    pub truth: Vec<TruthState>,
}

impl Scan {
    /// Detections converted to global Cartesian positions with covariances.
    pub fn cartesian(&self, sigma_range: f64, sigma_bearing: f64) -> Vec<Detection> {
        self.detections
            .iter()
            .map(|d| {
                Detection::from_polar(
                    self.ego.position(),
                    d.range,
                    self.ego.theta + d.bearing,
                    sigma_range,
                    sigma_bearing,
                )
            })
            .collect()
    }

    pub fn detection_positions(&self) -> Vec<Position> {
        self.detections
            .iter()
            .map(|d| polar_to_global(&self.ego, d.range, d.bearing))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct World<'a> {
    pub scenario: &'a Scenario,
    pub step: usize,
    pub targets: Vec<Target>,
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

impl<'a> World<'a> {
    /// Places the targets, applying the scenario's per-trial randomization.
    pub fn new(scenario: &'a Scenario, rng: &mut ChaCha8Rng) -> Self {
        let rz = &scenario.randomize;
        let targets = scenario
            .targets
            .iter()
            .enumerate()
            .map(|(i, spawn)| {
                let t0 = (spawn.spawn_time + uniform(rng, -1.0, 1.0) * rz.spawn_time_jitter).max(0.0);
                let base = Vector2::new(spawn.x, spawn.y);
                let mut pos = base;
                let mut placed = false;
                for _ in 0..SPAWN_ATTEMPTS {
                    let cand =
                        base + Vector2::new(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)) * rz.position_jitter;
                    if !placed && !spawn.inside_building && scenario.on_sidewalk(&cand) {
                        pos = cand;
                        placed = true;
                    }
                    if placed || spawn.inside_building || rz.position_jitter == 0.0 {
                        break;
                    }
                }
                let heading = uniform(rng, -PI, PI);
                let speed = uniform(rng, rz.speed_range[0], rz.speed_range[1]);
                let (theta, v) = if rz.random_heading {
                    (heading, speed)
                } else {
                    (spawn.theta, spawn.v)
                };
                Target {
                    id: i as u32,
                    spawn_step: (t0 / scenario.dt).round() as usize,
                    state: TargetState {
                        x: pos.x,
                        y: pos.y,
                        v: v.clamp(-1.0, 1.0),
                        theta: normalize_angle(theta),
                        alive: false,
                        inside_building: spawn.inside_building,
                    },
                }
            })
            .collect();
        let mut world = Self {
            scenario,
            step: 0,
            targets,
        };
        world.activate();
        world
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.scenario.dt
    }

    fn activate(&mut self) {
        for t in &mut self.targets {
            if !t.state.alive && self.step >= t.spawn_step {
                t.state.alive = true;
            }
        }
    }

    /// Advances every pedestrian by one step, then the clock.
    pub fn step(&mut self, rng: &mut ChaCha8Rng) {
        let sc = self.scenario;
        let sigma_v = sc.noise.sigma_speed;
        let sigma_h = sc.noise.sigma_heading();
        for t in &mut self.targets {
            let dv = sigma_v * normal(rng);
            let dh = sigma_h * normal(rng);
            let u_door = rng.random::<f64>();
            let s = &mut t.state;
            if !s.alive {
                continue;
            }
            if s.inside_building {
                if u_door < sc.doors.exit_prob {
                    exit_building(sc, s);
                }
                continue;
            }
            s.v = (s.v + dv).clamp(-1.0, 1.0);
            s.theta = normalize_angle(s.theta + dh);
            advance(sc, s);
            if u_door < sc.doors.enter_prob {
                if let Some(door) = nearest_door(sc, &s.position()) {
                    s.inside_building = true;
                    s.x = door.x;
                    s.y = door.y;
                }
            }
        }
        self.step += 1;
        self.activate();
    }

    /// Obstacles at the current time that are observable from the ego.
    pub fn observed_obstacles(&self, ego: &EgoPose) -> Vec<Obstacle> {
        let fov = &self.scenario.fov;
        self.scenario
            .obstacles_at(self.time())
            .into_iter()
            .filter(|o| !o.contains(&ego.position()) && obstacle_in_fov(ego, fov, o))
            .collect()
    }

    pub fn sense(&self, rng: &mut ChaCha8Rng) -> Scan {
        let sc = self.scenario;
        let time = self.time();
        let ego = sc.ego_at(time);
        let fov = sc.fov;
        let obstacles = self.observed_obstacles(&ego);
        let cones: Vec<OcclusionCone> = obstacles.iter().filter_map(|o| occlusion_cone(&ego, o).ok()).collect();
        let visible = |p: &Position| fov.contains(&ego, p) && !is_occluded(p, &ego, &cones);

        let mut detections = Vec::new();
        let mut truth = Vec::new();
        for t in &self.targets {
            let u = rng.random::<f64>();
            let nr = normal(rng);
            let nb = normal(rng);
            if !t.state.alive {
                continue;
            }
            let p = t.state.position();
            let vis = !t.state.inside_building && visible(&p);
            let det = vis && u < sc.p_detect;
            if det {
                let (r, b) = global_to_polar(&ego, &p);
                let (range, bearing) = clamp_to_fov(
                    &fov,
                    r + sc.noise.sigma_range * nr,
                    normalize_angle(b + sc.noise.sigma_bearing() * nb),
                );
                detections.push(RangeBearing {
                    range,
                    bearing,
                    origin: Some(t.id),
                });
            }
            truth.push(TruthState {
                id: t.id,
                state: t.state,
                visible: vis,
                detected: det,
            });
        }

        let n_clutter = if sc.clutter_rate > 0.0 {
            Poisson::new(sc.clutter_rate)
                .map(|d| d.sample(rng) as usize)
                .unwrap_or(0)
        } else {
            0
        };
        let half = fov.half_angle();
        for _ in 0..n_clutter {
            let range = fov.max_range * rng.random::<f64>().sqrt();
            let bearing = normalize_angle(uniform(rng, -half, half));
            detections.push(RangeBearing {
                range,
                bearing,
                origin: None,
            });
        }

        let sem = &sc.semantics;
        let mut labeled_points = Vec::new();
        for region in &sc.sidewalks {
            for p in jittered_grid(region, sem.grid_spacing, sem.jitter, rng) {
                if visible(&p) {
                    labeled_points.push(LabeledPoint {
                        position: p,
                        label: sem.label.clone(),
                    });
                }
            }
        }

        Scan {
            step: self.step,
            time,
            ego,
            detections,
            obstacle_observations: obstacles,
            labeled_points,
            truth,
        }
    }
}

/// Moves a pedestrian along its heading, reflecting off the edge of the
/// walkable region (sidewalks if it stands on one, else the workspace).
fn advance(sc: &Scenario, s: &mut TargetState) {
    let here = s.position();
    let on_walk = sc.on_sidewalk(&here);
    let allowed = |p: &Position| sc.workspace.contains(p) && (!on_walk || sc.sidewalks.is_empty() || sc.on_sidewalk(p));
    let step = |theta: f64| here + Vector2::new(theta.cos(), theta.sin()) * (s.v * sc.dt);
    let candidates = [s.theta, PI - s.theta, -s.theta, s.theta + PI];
    match candidates.iter().map(|&th| (th, step(th))).find(|(_, p)| allowed(p)) {
        Some((th, p)) => {
            s.theta = normalize_angle(th);
            s.x = p.x;
            s.y = p.y;
        }
        None => s.theta = normalize_angle(s.theta + PI),
    }
    let ws = &sc.workspace;
    s.x = s.x.clamp(ws.x_min, ws.x_max);
    s.y = s.y.clamp(ws.y_min, ws.y_max);
}

fn nearest_door(sc: &Scenario, p: &Position) -> Option<Position> {
    sc.buildings
        .iter()
        .flat_map(|b| b.doors.iter())
        .map(|d| Vector2::new(d[0], d[1]))
        .filter(|d| (d - p).norm() <= sc.doors.radius)
        .min_by(|a, b| (a - p).norm().total_cmp(&(b - p).norm()))
}

/// Leaves through the door the target entered by, heading away from the wall.
fn exit_building(sc: &Scenario, s: &mut TargetState) {
    s.inside_building = false;
    let p = s.position();
    let Some(b) = sc
        .buildings
        .iter()
        .min_by(|a, b| rect_distance(&a.footprint, &p).total_cmp(&rect_distance(&b.footprint, &p)))
    else {
        return;
    };
    let r = &b.footprint;
    let faces = [
        ((p.y - r.y_min).abs(), -PI / 2.0),
        ((p.y - r.y_max).abs(), PI / 2.0),
        ((p.x - r.x_min).abs(), PI),
        ((p.x - r.x_max).abs(), 0.0),
    ];
    let outward = faces
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|f| f.1)
        .unwrap_or(0.0);
    s.theta = normalize_angle(outward);
    s.v = s.v.abs().max(0.3);
}

fn rect_distance(r: &AlignedRect, p: &Position) -> f64 {
    let dx = (r.x_min - p.x).max(p.x - r.x_max).max(0.0);
    let dy = (r.y_min - p.y).max(p.y - r.y_max).max(0.0);
    dx.hypot(dy)
}

fn obstacle_in_fov(ego: &EgoPose, fov: &FieldOfView, o: &Obstacle) -> bool {
    let (d, bearing) = global_to_polar(ego, &o.center());
    let radius = o.bounding_radius();
    if d - radius > fov.max_range {
        return false;
    }
    match fov.shape {
        FovShape::FullCircle => true,
        FovShape::Sector { half_angle } => {
            let margin = if d > radius { (radius / d).asin() } else { PI };
            bearing.abs() <= half_angle + margin
        }
    }
}

fn clamp_to_fov(fov: &FieldOfView, range: f64, bearing: f64) -> (f64, f64) {
    let half = fov.half_angle();
    (range.clamp(0.0, fov.max_range), bearing.clamp(-half, half))
}

fn jittered_grid(region: &AlignedRect, spacing: f64, jitter: f64, rng: &mut ChaCha8Rng) -> Vec<Position> {
    let nx = (region.width() / spacing).floor().max(1.0) as usize;
    let ny = (region.height() / spacing).floor().max(1.0) as usize;
    let (sx, sy) = (region.width() / nx as f64, region.height() / ny as f64);
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let jx = uniform(rng, -jitter, jitter);
            let jy = uniform(rng, -jitter, jitter);
            let x = (region.x_min + (i as f64 + 0.5) * sx + jx).clamp(region.x_min, region.x_max);
            let y = (region.y_min + (j as f64 + 0.5) * sy + jy).clamp(region.y_min, region.y_max);
            out.push(Vector2::new(x, y));
        }
    }
    out
}

/// Filter-side settings that turn a scan into a [`BirthContext`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContextConfig {
    pub workspace: Option<AlignedRect>,
    pub birth_labels: Vec<String>,
    pub expected_births: f64,
    pub confidences: SourceConfidence,
}

impl ContextConfig {
    pub fn for_scenario(scenario: &Scenario, expected_births: f64, confidences: SourceConfidence) -> Self {
        Self {
            workspace: Some(scenario.workspace),
            birth_labels: vec![scenario.semantics.label.clone()],
            expected_births,
            confidences,
        }
    }
}

/// Birth inputs for `scan`; the previous scan supplies the measurement-driven
/// birth locations.
pub fn build_birth_context(
    scan: &Scan,
    fov: &FieldOfView,
    previous: Option<&Scan>,
    config: &ContextConfig,
) -> BirthContext {
    BirthContext {
        ego: scan.ego,
        fov: *fov,
        workspace: config.workspace,
        obstacles: scan.obstacle_observations.clone(),
        labeled_points: scan.labeled_points.clone(),
        birth_labels: config.birth_labels.clone(),
        prev_measurements: previous.map(Scan::detection_positions).unwrap_or_default(),
        expected_births: config.expected_births,
        confidences: config.confidences,
    }
}

/// Simulates a whole trial: one scan per step, `scenario.steps()` scans.
pub fn simulate(scenario: &Scenario, rng: &mut ChaCha8Rng) -> Vec<Scan> {
    let n = scenario.steps();
    let mut world = World::new(scenario, rng);
    let mut scans = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            world.step(rng);
        }
        scans.push(world.sense(rng));
    }
    scans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::TargetSpawn;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn open_field() -> Scenario {
        let mut s = Scenario::default();
        s.obstacles.clear();
        s.moving_obstacles.clear();
        s.buildings.clear();
        s.sidewalks.clear();
        s.randomize = Default::default();
        s.targets = vec![TargetSpawn {
            spawn_time: 0.0,
            x: 0.0,
            y: 0.0,
            v: 1.0,
            theta: 0.0,
            inside_building: false,
        }];
        s
    }

    #[test]
    fn noiseless_step_advances_exactly() {
        let mut s = open_field();
        s.noise.sigma_speed = 0.0;
        s.noise.sigma_heading_deg = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut w = World::new(&s, &mut rng);
        w.step(&mut rng);
        let p = w.targets[0].state.position();
        assert_relative_eq!(p, Vector2::new(0.1, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn replay_is_bit_identical() {
        let s = Scenario::default();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            simulate(&s, &mut rng)
        };
        let (a, b) = (run(7), run(7));
        assert_eq!(a.len(), 1000);
        assert_eq!(a, b);
        assert_ne!(a, run(8));
    }

    #[test]
    fn walk_stays_in_workspace() {
        let s = Scenario::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut w = World::new(&s, &mut rng);
        for _ in 0..1000 {
            w.step(&mut rng);
            for t in &w.targets {
                assert!(s.workspace.contains(&t.state.position()));
                assert!(t.state.v.abs() <= 1.0);
                if t.state.is_present() {
                    assert!(s.on_sidewalk(&t.state.position()), "{:?}", t.state);
                }
            }
        }
    }

    #[test]
    fn occluded_target_is_never_detected() {
        let mut s = open_field();
        s.ego_waypoints = vec![[0.0, -20.0, 0.0]];
        s.obstacles = vec![Obstacle::circle(-10.0, 0.0, 3.0)];
        s.noise.sigma_speed = 0.0;
        s.noise.sigma_heading_deg = 0.0;
        s.targets[0].v = 0.0;
        s.p_detect = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = World::new(&s, &mut rng);
        for _ in 0..50 {
            let scan = w.sense(&mut rng);
            assert!(!scan.truth[0].visible && !scan.truth[0].detected);
            assert!(scan.detections.iter().all(|d| d.origin.is_none()));
        }
    }

    #[test]
    fn no_clutter_without_rate() {
        let mut s = open_field();
        s.clutter_rate = 0.0;
        s.targets.clear();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = World::new(&s, &mut rng);
        for _ in 0..100 {
            assert!(w.sense(&mut rng).detections.is_empty());
        }
    }

    #[test]
    fn context_lags_measurements_by_one_scan() {
        let s = Scenario::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scans = simulate(&s, &mut rng);
        let cfg = ContextConfig::for_scenario(&s, 0.06, SourceConfidence::default());
        let first = build_birth_context(&scans[0], &s.fov, None, &cfg);
        assert!(first.prev_measurements.is_empty());
        let ctx = build_birth_context(&scans[5], &s.fov, Some(&scans[4]), &cfg);
        assert_eq!(ctx.prev_measurements, scans[4].detection_positions());
        assert_eq!(ctx.obstacles, scans[5].obstacle_observations);
        assert_eq!(ctx.labeled_points, scans[5].labeled_points);
        assert_eq!(ctx.birth_labels, vec!["sidewalk".to_string()]);
    }

    #[test]
    fn clutter_count_matches_rate() {
        let mut s = open_field();
        s.targets.clear();
        s.clutter_rate = 3.0;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w = World::new(&s, &mut rng);
        let n = 10_000;
        let total: usize = (0..n).map(|_| w.sense(&mut rng).detections.len()).sum();
        let mean = total as f64 / n as f64;
        assert!((2.9..=3.1).contains(&mean), "mean clutter {mean}");
    }
}

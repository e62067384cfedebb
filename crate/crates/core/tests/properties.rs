//! Property tests for the filter recursion, geometry, birth models, metrics
//! and simulator.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use proptest::prelude::*;

use soa_phd::birth::{build_model, ray_covariance, BaselineParams, FixedComponent, LabeledPoint};
use soa_phd::geometry::{is_occluded, min_distance_sample, occlusion_cone};
use soa_phd::gm::Position;
use soa_phd::gm::{merge, predict, prune, update, MotionModel};
use soa_phd::metrics::{ospa, tracking_delay, StepRecord, TrialLog, TruthRecord};
use soa_phd::sim::{simulate, trial_rng, Scenario};
use soa_phd::{
    BirthContext, BirthModelKind, Detection, EgoPose, FieldOfView, GaussianComponent, GaussianMixture,
    MeasurementModel, Obstacle, OspaParams, SoaParams, SourceConfidence,
};

fn point(range: f64) -> impl Strategy<Value = Position> {
    (-range..range, -range..range).prop_map(|(x, y)| Vector2::new(x, y))
}

fn points(range: f64, max: usize) -> impl Strategy<Value = Vec<Position>> {
    prop::collection::vec(point(range), 0..=max)
}

/// A random SPD 4x4 covariance built as `A A^T + eps I`.
fn spd4() -> impl Strategy<Value = Matrix4<f64>> {
    prop::collection::vec(-2.0..2.0f64, 16).prop_map(|v| {
        let a = Matrix4::from_row_slice(&v);
        a * a.transpose() + Matrix4::identity() * 0.5
    })
}

fn component() -> impl Strategy<Value = GaussianComponent> {
    (0.01..2.0f64, point(30.0), -2.0..2.0f64, -2.0..2.0f64, spd4())
        .prop_map(|(w, p, vx, vy, cov)| GaussianComponent::new(w, Vector4::new(p.x, p.y, vx, vy), cov))
}

fn mixture(max: usize) -> impl Strategy<Value = GaussianMixture> {
    prop::collection::vec(component(), 1..=max).prop_map(GaussianMixture::from_components)
}

fn detections(max: usize) -> impl Strategy<Value = Vec<Detection>> {
    prop::collection::vec(point(30.0), 0..=max)
        .prop_map(|v| v.into_iter().map(|p| Detection::new(p, Matrix2::identity())).collect())
}

fn obstacle() -> impl Strategy<Value = Obstacle> {
    prop_oneof![
        (point(40.0), 0.3..4.0f64).prop_map(|(c, r)| Obstacle::circle(c.x, c.y, r)),
        (point(40.0), 0.3..4.0f64, 0.3..2.0f64, -3.1..3.1f64)
            .prop_map(|(c, hx, hy, yaw)| Obstacle::rectangle(c.x, c.y, hx, hy, yaw)),
    ]
}

fn is_pd(p: &Matrix4<f64>) -> bool {
    p.symmetric_eigenvalues().iter().all(|&e| e > 0.0)
}

fn ego_clear_of(obstacles: &[Obstacle]) -> Vec<Obstacle> {
    let origin = Vector2::zeros();
    obstacles
        .iter()
        .filter(|o| (o.center() - origin).norm() > o.bounding_radius() + 0.5)
        .cloned()
        .collect()
}

fn random_context(
    obstacles: Vec<Obstacle>,
    labeled: Vec<Position>,
    prev: Vec<Position>,
    n_hat: f64,
    rho: (f64, f64, f64),
) -> BirthContext {
    let mut ctx = BirthContext::empty(EgoPose::new(0.0, 0.0, 0.3), FieldOfView::full_circle(50.0));
    ctx.obstacles = ego_clear_of(&obstacles);
    ctx.labeled_points = labeled
        .into_iter()
        .map(|p| LabeledPoint {
            position: p,
            label: "sidewalk".into(),
        })
        .collect();
    ctx.birth_labels = vec!["sidewalk".into()];
    ctx.prev_measurements = prev;
    ctx.expected_births = n_hat;
    ctx.confidences = SourceConfidence {
        occlusion: rho.0,
        semantic: rho.1,
        fov: rho.2,
    };
    ctx
}

fn baselines() -> BaselineParams {
    BaselineParams {
        standard_components: vec![
            FixedComponent {
                x: 5.0,
                y: 5.0,
                sigma: 2.0,
                weight: 1.0,
            },
            FixedComponent {
                x: -10.0,
                y: 3.0,
                sigma: 3.0,
                weight: 2.0,
            },
        ],
        ..BaselineParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn update_is_invariant_to_detection_order(m in mixture(6), mut z in detections(6)) {
        let meas = MeasurementModel::position(0.9, 1e-4);
        let a = update(&m, &z, &meas).unwrap();
        z.reverse();
        let b = update(&m, &z, &meas).unwrap();
        let mut wa: Vec<f64> = a.iter().map(|c| c.weight).collect();
        let mut wb: Vec<f64> = b.iter().map(|c| c.weight).collect();
        wa.sort_by(f64::total_cmp);
        wb.sort_by(f64::total_cmp);
        prop_assert_eq!(wa.len(), wb.len());
        for (x, y) in wa.iter().zip(&wb) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn update_component_count(m in mixture(6), z in detections(6)) {
        let meas = MeasurementModel::position(0.9, 1e-4);
        let u = update(&m, &z, &meas).unwrap();
        prop_assert_eq!(u.len(), m.len() * (1 + z.len()));
    }

    #[test]
    fn merge_conserves_mass(m in mixture(10), threshold in 0.1..20.0f64) {
        let merged = merge(&m, threshold).unwrap();
        prop_assert!(merged.len() <= m.len());
        prop_assert!((merged.total_weight() - m.total_weight()).abs() <= 1e-9 * m.total_weight());
        for c in merged.iter() {
            prop_assert!(is_pd(&c.covariance));
        }
    }

    #[test]
    fn prune_removes_exactly_the_light_mass(m in mixture(10), threshold in 0.0..1.5f64) {
        let pruned = prune(&m, threshold);
        let light: f64 = m.iter().filter(|c| c.weight < threshold).map(|c| c.weight).sum();
        prop_assert!((m.total_weight() - pruned.total_weight() - light).abs() <= 1e-12);
        prop_assert!(pruned.iter().all(|c| c.weight >= threshold));
    }

    #[test]
    fn predict_and_update_keep_covariances_positive_definite(
        m in mixture(5),
        z in detections(4),
        dt in 0.05..1.0f64,
    ) {
        let motion = MotionModel::constant_velocity(dt, 1.0, 0.99);
        let predicted = predict(&m, &motion, &GaussianMixture::new()).unwrap();
        prop_assert!((predicted.total_weight() - 0.99 * m.total_weight()).abs() <= 1e-12);
        let updated = update(&predicted, &z, &MeasurementModel::position(0.98, 1e-3)).unwrap();
        for c in predicted.iter().chain(updated.iter()) {
            prop_assert!(is_pd(&c.covariance));
        }
    }

    #[test]
    fn thinning_keeps_minimum_distance(pts in points(20.0, 60), d in 0.5..6.0f64) {
        let kept = min_distance_sample(&pts, d);
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!((a - b).norm() >= d);
            }
        }
        for p in &pts {
            prop_assert!(kept.iter().any(|k| (k - p).norm() < d || k == p));
        }
    }

    #[test]
    fn ospa_axioms(x in points(50.0, 6), y in points(50.0, 6), z in points(50.0, 6)) {
        let params = OspaParams::new(100.0, 1.0).unwrap();
        let dxy = ospa(&x, &y, &params);
        prop_assert_eq!(dxy, ospa(&y, &x, &params));
        prop_assert!((0.0..=100.0).contains(&dxy));
        prop_assert!(ospa(&x, &x, &params) <= 1e-12);
        prop_assert!(dxy <= ospa(&x, &z, &params) + ospa(&z, &y, &params) + 1e-9);
    }

    #[test]
    fn ospa_grows_with_displacement(x in points(20.0, 5), shift in 0.0..5.0f64, extra in 0.0..5.0f64) {
        let params = OspaParams::new(100.0, 1.0).unwrap();
        let moved = |s: f64| x.iter().map(|p| p + Vector2::new(s, 0.0)).collect::<Vec<_>>();
        prop_assert!(ospa(&x, &moved(shift), &params) <= ospa(&x, &moved(shift + extra), &params) + 1e-9);
    }

    #[test]
    fn every_birth_model_distributes_the_expected_births(
        obstacles in prop::collection::vec(obstacle(), 0..6),
        labeled in points(45.0, 40),
        prev in prop::collection::vec(point(40.0), 1..8),
        n_hat in 1e-4..1.0f64,
        rho in (0.0..3.0f64, 0.0..3.0f64, 0.1..3.0f64),
    ) {
        let ctx = random_context(obstacles, labeled, prev, n_hat, rho);
        for kind in BirthModelKind::ALL {
            let model = build_model(kind, &SoaParams::default(), &baselines());
            let birth = model.birth_intensity(&ctx).unwrap();
            prop_assert!(!birth.is_empty(), "{kind} produced no components");
            prop_assert!((birth.total_weight() - n_hat).abs() <= 1e-12, "{kind}: {}", birth.total_weight());
        }
    }

    #[test]
    fn occlusion_births_lie_inside_their_sector(obstacles in prop::collection::vec(obstacle(), 1..6)) {
        let ctx = random_context(obstacles, vec![], vec![], 1.0, (1.0, 0.0, 1.0));
        let params = SoaParams::default();
        let births = soa_phd::birth::occlusion_birth(&ctx, &params);
        let cones: Vec<_> = ctx.obstacles.iter().filter_map(|o| occlusion_cone(&ctx.ego, o).ok()).collect();
        for c in births.iter() {
            let p = c.position();
            prop_assert!(ctx.fov.contains(&ctx.ego, &p));
            // Each component sits on a boundary ray beyond the obstacle, so
            // it is (up to rounding at the sector edge) behind that obstacle.
            let nudged: Vec<_> = cones
                .iter()
                .map(|k| soa_phd::OcclusionCone { theta_min: k.theta_min - 1e-9, theta_max: k.theta_max + 1e-9, ..*k })
                .collect();
            prop_assert!(is_occluded(&p, &ctx.ego, &nudged));
        }
    }

    #[test]
    fn ray_covariance_eigenstructure(angle in -10.0..10.0f64, par in 0.1..5.0f64, perp in 0.1..5.0f64) {
        let p = ray_covariance(angle, par, perp);
        let dir = Vector2::new(angle.cos(), angle.sin());
        let normal = Vector2::new(-angle.sin(), angle.cos());
        prop_assert!((p * dir - dir * par * par).norm() <= 1e-9);
        prop_assert!((p * normal - normal * perp * perp).norm() <= 1e-9);
        prop_assert_eq!(p[(0, 1)], p[(1, 0)]);
    }

    #[test]
    fn tracking_delay_is_never_negative(
        detect in prop::collection::vec(any::<bool>(), 1..30),
        track in prop::collection::vec(any::<bool>(), 1..30),
    ) {
        let n = detect.len().min(track.len());
        let steps = (0..n)
            .map(|k| StepRecord {
                truth: vec![TruthRecord { id: 1, position: Vector2::new(k as f64, 0.0), visible: true, detected: detect[k] }],
                estimates: if track[k] { vec![Vector2::new(k as f64, 0.5)] } else { vec![] },
                ..StepRecord::default()
            })
            .collect();
        let log = TrialLog { dt: 0.1, steps };
        let report = tracking_delay(&log, 2.0).unwrap();
        for t in &report.targets {
            prop_assert!(t.delay >= 0.0);
            prop_assert!(t.track_step.is_none_or(|k| k >= t.detect_step));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_deterministic_per_seed(seed in any::<u64>()) {
        let sc = Scenario { duration: 10.0, ..Scenario::default() };
        let a = simulate(&sc, &mut trial_rng(seed));
        let b = simulate(&sc, &mut trial_rng(seed));
        prop_assert_eq!(a, b);
    }
}

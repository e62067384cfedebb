//! Gaussian-mixture intensities and the closed-form GM-PHD recursion.
//!
//! The filter state is Cartesian constant velocity `[x, y, vx, vy]`. Sensor
//! detections arrive as converted Cartesian positions, each carrying its own
//! noise covariance, so the update stays linear-Gaussian.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};

use crate::error::{Error, Result};

pub type StateVector = Vector4<f64>;
pub type StateCovariance = Matrix4<f64>;
pub type Position = Vector2<f64>;

/// Smallest eigenvalue accepted for a propagated covariance.
pub const MIN_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: StateVector,
    pub covariance: StateCovariance,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: StateVector, covariance: StateCovariance) -> Self {
        Self {
            weight,
            mean,
            covariance,
        }
    }

    pub fn position(&self) -> Position {
        Vector2::new(self.mean[0], self.mean[1])
    }

    /// Upper-left 2x2 block of the covariance.
    pub fn position_covariance(&self) -> Matrix2<f64> {
        self.covariance.fixed_view::<2, 2>(0, 0).into_owned()
    }
}

/// Weighted sum of Gaussians. An empty mixture is the zero intensity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaussianMixture {
    pub components: Vec<GaussianComponent>,
}

impl GaussianMixture {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_components(components: Vec<GaussianComponent>) -> Self {
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn push(&mut self, component: GaussianComponent) {
        self.components.push(component);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GaussianComponent> {
        self.components.iter()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn extend(&mut self, other: GaussianMixture) {
        self.components.extend(other.components);
    }
}

impl FromIterator<GaussianComponent> for GaussianMixture {
    fn from_iter<I: IntoIterator<Item = GaussianComponent>>(iter: I) -> Self {
        Self {
            components: iter.into_iter().collect(),
        }
    }
}

/// Expected number of targets represented by the mixture.
pub fn expected_cardinality(mixture: &GaussianMixture) -> f64 {
    mixture.total_weight()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub transition: Matrix4<f64>,
    pub process_noise: Matrix4<f64>,
    pub survival_prob: f64,
}

impl MotionModel {
    /// Constant velocity with white-noise acceleration of standard deviation
    /// `accel_sigma` (m/s^2).
    pub fn constant_velocity(dt: f64, accel_sigma: f64, survival_prob: f64) -> Self {
        #[rustfmt::skip]
        let transition = Matrix4::new(
            1.0, 0.0, dt,  0.0,
            0.0, 1.0, 0.0, dt,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        let q = accel_sigma * accel_sigma;
        let (a, b, c) = (dt.powi(3) / 3.0, dt.powi(2) / 2.0, dt);
        #[rustfmt::skip]
        let process_noise = Matrix4::new(
            a, 0.0, b, 0.0,
            0.0, a, 0.0, b,
            b, 0.0, c, 0.0,
            0.0, b, 0.0, c,
        ) * q;
        Self {
            transition,
            process_noise,
            survival_prob,
        }
    }
}

/// A position measurement in the global frame with its own noise covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub position: Position,
    pub covariance: Matrix2<f64>,
}

impl Detection {
    pub fn new(position: Position, covariance: Matrix2<f64>) -> Self {
        Self { position, covariance }
    }

    /// Converts a range/bearing return into a Cartesian position. `heading` is
    /// the global direction of the return (sensor yaw plus bearing); the
    /// covariance is the polar noise pushed through the conversion Jacobian.
    pub fn from_polar(origin: Position, range: f64, heading: f64, sigma_range: f64, sigma_bearing: f64) -> Self {
        let (s, c) = heading.sin_cos();
        let position = origin + Vector2::new(range * c, range * s);
        let jac = Matrix2::new(c, -range * s, s, range * c);
        let polar = Matrix2::new(sigma_range * sigma_range, 0.0, 0.0, sigma_bearing * sigma_bearing);
        let mut covariance = jac * polar * jac.transpose();
        symmetrize2(&mut covariance);
        // keep the tangential axis PD when the return sits on the sensor
        let floor = 1e-6;
        if covariance.determinant() < floor * floor {
            covariance += Matrix2::identity() * floor;
        }
        Self { position, covariance }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    pub observation: Matrix2x4<f64>,
    pub detection_prob: f64,
    /// Clutter intensity per square meter.
    pub clutter_intensity: f64,
}

impl MeasurementModel {
    pub fn position(detection_prob: f64, clutter_intensity: f64) -> Self {
        #[rustfmt::skip]
        let observation = Matrix2x4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
        );
        Self {
            observation,
            detection_prob,
            clutter_intensity,
        }
    }
}

fn symmetrize(p: &mut Matrix4<f64>) {
    let t = p.transpose();
    *p = (*p + t) * 0.5;
}

fn symmetrize2(p: &mut Matrix2<f64>) {
    let t = p.transpose();
    *p = (*p + t) * 0.5;
}

fn check_pd(p: &Matrix4<f64>, what: &str) -> Result<()> {
    let min = p.symmetric_eigenvalues().min();
    if min.is_finite() && min > MIN_EIGENVALUE {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "{what} covariance not positive definite (min eigenvalue {min:e})"
        )))
    }
}

/// Survival propagation of `posterior` followed by the birth terms.
pub fn predict(posterior: &GaussianMixture, motion: &MotionModel, birth: &GaussianMixture) -> Result<GaussianMixture> {
    let f = &motion.transition;
    let ft = f.transpose();
    let mut out = Vec::with_capacity(posterior.len() + birth.len());
    for c in &posterior.components {
        let mut cov = f * c.covariance * ft + motion.process_noise;
        symmetrize(&mut cov);
        if cov.cholesky().is_none() {
            check_pd(&cov, "predicted")?;
        }
        out.push(GaussianComponent {
            weight: motion.survival_prob * c.weight,
            mean: f * c.mean,
            covariance: cov,
        });
    }
    out.extend(birth.components.iter().cloned());
    Ok(GaussianMixture::from_components(out))
}

struct Innovation {
    predicted: Position,
    hph: Matrix2<f64>,
    pht: Matrix4x2<f64>,
}

struct Pair {
    likelihood: f64,
    s_inv: Matrix2<f64>,
}

fn innovation(c: &GaussianComponent, h: &Matrix2x4<f64>) -> Innovation {
    let pht = c.covariance * h.transpose();
    Innovation {
        predicted: h * c.mean,
        hph: h * pht,
        pht,
    }
}

fn pair(inn: &Innovation, det: &Detection) -> Result<Pair> {
    let mut s = inn.hph + det.covariance;
    symmetrize2(&mut s);
    let d = s.determinant();
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Numerical(format!("singular innovation covariance (det {d:e})")));
    }
    let s_inv = Matrix2::new(s[(1, 1)], -s[(0, 1)], -s[(1, 0)], s[(0, 0)]) / d;
    let nu = det.position - inn.predicted;
    let maha = (nu.transpose() * s_inv * nu)[0];
    let likelihood = (-0.5 * maha).exp() / (2.0 * PI * d.sqrt());
    Ok(Pair { likelihood, s_inv })
}

fn corrected(
    c: &GaussianComponent,
    inn: &Innovation,
    det: &Detection,
    s_inv: &Matrix2<f64>,
    h: &Matrix2x4<f64>,
    weight: f64,
) -> GaussianComponent {
    let gain = inn.pht * s_inv;
    let mean = c.mean + gain * (det.position - inn.predicted);
    let ikh = Matrix4::identity() - gain * h;
    let mut cov = ikh * c.covariance * ikh.transpose() + gain * det.covariance * gain.transpose();
    symmetrize(&mut cov);
    GaussianComponent {
        weight,
        mean,
        covariance: cov,
    }
}

/// Full measurement update. The result holds `J * (1 + |Z|)` components: the
/// missed-detection copies first, then one block of `J` per detection in
/// input order.
pub fn update(
    predicted: &GaussianMixture,
    detections: &[Detection],
    meas: &MeasurementModel,
) -> Result<GaussianMixture> {
    let (mixture, _) = update_inner(predicted, detections, meas, None)?;
    Ok(mixture)
}

/// Update that only materializes components with weight at or above
/// `weight_floor`. Equivalent to [`update`] followed by [`prune`] at the same
/// threshold. Returns the mixture and the component count of the full update.
pub fn update_pruned(
    predicted: &GaussianMixture,
    detections: &[Detection],
    meas: &MeasurementModel,
    weight_floor: f64,
) -> Result<(GaussianMixture, usize)> {
    update_inner(predicted, detections, meas, Some(weight_floor))
}

fn update_inner(
    predicted: &GaussianMixture,
    detections: &[Detection],
    meas: &MeasurementModel,
    floor: Option<f64>,
) -> Result<(GaussianMixture, usize)> {
    let h = &meas.observation;
    let pd = meas.detection_prob;
    let j = predicted.len();
    let full_count = j * (1 + detections.len());
    let keep = |w: f64| floor.is_none_or(|f| w >= f);

    let mut out = Vec::with_capacity(if floor.is_some() { j } else { full_count });
    for c in &predicted.components {
        let w = (1.0 - pd) * c.weight;
        if keep(w) {
            out.push(GaussianComponent { weight: w, ..c.clone() });
        }
    }
    if pd == 0.0 || j == 0 {
        if floor.is_none() {
            for _ in detections {
                out.extend(predicted.components.iter().map(|c| GaussianComponent {
                    weight: 0.0,
                    ..c.clone()
                }));
            }
        }
        return Ok((GaussianMixture::from_components(out), full_count));
    }

    let innovations: Vec<Innovation> = predicted.iter().map(|c| innovation(c, h)).collect();
    let mut pairs = Vec::with_capacity(j);
    let mut raw = vec![0.0; j];
    for det in detections {
        pairs.clear();
        let mut denom = meas.clutter_intensity;
        for (i, (c, inn)) in predicted.iter().zip(&innovations).enumerate() {
            let p = pair(inn, det)?;
            raw[i] = pd * c.weight * p.likelihood;
            denom += raw[i];
            pairs.push(p);
        }
        for (i, (c, inn)) in predicted.iter().zip(&innovations).enumerate() {
            let w = if denom > 0.0 { raw[i] / denom } else { 0.0 };
            if keep(w) {
                out.push(corrected(c, inn, det, &pairs[i].s_inv, h, w));
            }
        }
    }
    Ok((GaussianMixture::from_components(out), full_count))
}

/// Drops components whose weight is below `threshold`.
pub fn prune(mixture: &GaussianMixture, threshold: f64) -> GaussianMixture {
    mixture.iter().filter(|c| c.weight >= threshold).cloned().collect()
}

/// Moment-matching merge around the heaviest remaining component. A candidate
/// `i` joins the cluster of leader `j` when
/// `(m_i - m_j)^T P_i^{-1} (m_i - m_j) <= threshold`.
pub fn merge(mixture: &GaussianMixture, threshold: f64) -> Result<GaussianMixture> {
    let n = mixture.len();
    let mut inverses = Vec::with_capacity(n);
    for c in mixture.iter() {
        let inv = c
            .covariance
            .cholesky()
            .map(|ch| ch.inverse())
            .or_else(|| c.covariance.try_inverse())
            .ok_or_else(|| Error::Numerical("singular covariance in merge".into()))?;
        inverses.push(inv);
    }

    let mut order: Vec<usize> = (0..n).collect();
    // descending weight, ties by index
    order.sort_by(|&a, &b| {
        mixture.components[b]
            .weight
            .total_cmp(&mixture.components[a].weight)
            .then(a.cmp(&b))
    });
    let mut used = vec![false; n];
    let mut out = Vec::new();
    let mut cluster = Vec::new();
    for &leader in &order {
        if used[leader] {
            continue;
        }
        let lm = mixture.components[leader].mean;
        cluster.clear();
        for &i in &order {
            if used[i] {
                continue;
            }
            let d = mixture.components[i].mean - lm;
            let maha = (d.transpose() * inverses[i] * d)[0];
            if maha <= threshold {
                cluster.push(i);
                used[i] = true;
            }
        }
        out.push(moment_match(mixture, &cluster));
    }
    Ok(GaussianMixture::from_components(out))
}

fn moment_match(mixture: &GaussianMixture, members: &[usize]) -> GaussianComponent {
    if let [only] = members {
        return mixture.components[*only].clone();
    }
    let weight: f64 = members.iter().map(|&i| mixture.components[i].weight).sum();
    if weight <= 0.0 {
        // all-zero cluster: keep the leader's moments
        let mut c = mixture.components[members[0]].clone();
        c.weight = 0.0;
        return c;
    }
    let mean = members
        .iter()
        .map(|&i| mixture.components[i].mean * mixture.components[i].weight)
        .sum::<StateVector>()
        / weight;
    let mut cov = members
        .iter()
        .map(|&i| {
            let c = &mixture.components[i];
            let d = mean - c.mean;
            (c.covariance + d * d.transpose()) * c.weight
        })
        .sum::<Matrix4<f64>>()
        / weight;
    symmetrize(&mut cov);
    GaussianComponent {
        weight,
        mean,
        covariance: cov,
    }
}

/// Keeps the `max_components` heaviest components (stable for ties).
pub fn cap(mixture: GaussianMixture, max_components: usize) -> GaussianMixture {
    if mixture.len() <= max_components {
        return mixture;
    }
    let mut comps = mixture.components;
    comps.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    comps.truncate(max_components);
    GaussianMixture::from_components(comps)
}

/// Prune, merge, then cap.
pub fn prune_merge(
    mixture: &GaussianMixture,
    prune_threshold: f64,
    merge_threshold: f64,
    max_components: usize,
) -> Result<GaussianMixture> {
    let pruned = prune(mixture, prune_threshold);
    let merged = merge(&pruned, merge_threshold)?;
    Ok(cap(merged, max_components))
}

/// Means of components heavier than `threshold`, by descending weight.
pub fn extract_states(mixture: &GaussianMixture, threshold: f64) -> Vec<StateVector> {
    let mut picked: Vec<&GaussianComponent> = mixture.iter().filter(|c| c.weight > threshold).collect();
    picked.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    picked.into_iter().map(|c| c.mean).collect()
}

/// Lifts a 2D position Gaussian into the filter state with zero mean velocity
/// and isotropic velocity variance `sigma_v0^2`.
pub fn embed_position(weight: f64, position: Position, position_cov: Matrix2<f64>, sigma_v0: f64) -> GaussianComponent {
    let mut cov = Matrix4::zeros();
    cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&position_cov);
    cov[(2, 2)] = sigma_v0 * sigma_v0;
    cov[(3, 3)] = sigma_v0 * sigma_v0;
    GaussianComponent {
        weight,
        mean: Vector4::new(position.x, position.y, 0.0, 0.0),
        covariance: cov,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn comp(w: f64, x: f64, y: f64) -> GaussianComponent {
        GaussianComponent::new(w, Vector4::new(x, y, 0.0, 0.0), Matrix4::identity())
    }

    fn cv() -> MotionModel {
        MotionModel::constant_velocity(0.1, 1.0, 0.99)
    }

    #[test]
    fn predict_empty() {
        let out = predict(&GaussianMixture::new(), &cv(), &GaussianMixture::new()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn predict_single_component() {
        let mut post = GaussianMixture::new();
        post.push(GaussianComponent::new(
            1.0,
            Vector4::new(1.0, 2.0, 1.0, -1.0),
            Matrix4::identity(),
        ));
        let m = cv();
        let out = predict(&post, &m, &GaussianMixture::new()).unwrap();
        assert_eq!(out.len(), 1);
        assert_relative_eq!(out.components[0].weight, 0.99);
        assert_relative_eq!(out.components[0].mean, m.transition * post.components[0].mean);
    }

    #[test]
    fn predict_appends_birth() {
        let post = GaussianMixture::from_components(vec![comp(0.4, 0.0, 0.0), comp(0.6, 5.0, 5.0)]);
        let birth: GaussianMixture = (0..3).map(|i| comp(0.01, i as f64, 0.0)).collect();
        let out = predict(&post, &cv(), &birth).unwrap();
        assert_eq!(out.len(), 5);
        assert_relative_eq!(expected_cardinality(&out), 0.99 * 1.0 + 0.03, epsilon = 1e-15);
        assert_eq!(&out.components[2..], &birth.components[..]);
    }

    #[test]
    fn predict_rejects_broken_covariance() {
        let mut bad = comp(1.0, 0.0, 0.0);
        bad.covariance = -Matrix4::identity();
        let m = MotionModel {
            process_noise: Matrix4::zeros(),
            ..cv()
        };
        let post = GaussianMixture::from_components(vec![bad]);
        assert!(matches!(
            predict(&post, &m, &GaussianMixture::new()),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn update_without_detections_scales_weights() {
        let pred = GaussianMixture::from_components(vec![comp(0.4, 0.0, 0.0), comp(0.8, 3.0, 1.0)]);
        let meas = MeasurementModel::position(0.9, 1e-4);
        let out = update(&pred, &[], &meas).unwrap();
        assert_eq!(out.len(), 2);
        for (a, b) in out.iter().zip(pred.iter()) {
            assert_relative_eq!(a.weight, 0.1 * b.weight, epsilon = 1e-15);
            assert_eq!(a.mean, b.mean);
            assert_eq!(a.covariance, b.covariance);
        }
    }

    #[test]
    fn update_zero_detection_prob_is_identity_after_pruning() {
        let pred = GaussianMixture::from_components(vec![comp(0.4, 0.0, 0.0), comp(0.8, 3.0, 1.0)]);
        let meas = MeasurementModel::position(0.0, 1e-4);
        let z = [Detection::new(Vector2::new(0.0, 0.0), Matrix2::identity())];
        let out = update(&pred, &z, &meas).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(prune(&out, 1e-5), pred);
    }

    #[test]
    fn update_matches_kalman_in_single_target_case() {
        let c = GaussianComponent::new(
            1.0,
            Vector4::new(2.0, -1.0, 0.5, 0.3),
            Matrix4::from_diagonal(&Vector4::new(4.0, 3.0, 1.0, 1.0)),
        );
        let pred = GaussianMixture::from_components(vec![c.clone()]);
        let r = Matrix2::new(1.0, 0.2, 0.2, 2.0);
        let z = [Detection::new(Vector2::new(2.0, -1.0), r)];
        let meas = MeasurementModel::position(1.0, 0.0);
        let out = prune(&update(&pred, &z, &meas).unwrap(), 1e-5);
        assert_eq!(out.len(), 1);
        let got = &out.components[0];
        assert_relative_eq!(got.weight, 1.0, epsilon = 1e-15);

        // textbook Kalman step
        let h = meas.observation;
        let s = h * c.covariance * h.transpose() + r;
        let k = c.covariance * h.transpose() * s.try_inverse().unwrap();
        let mean = c.mean + k * (z[0].position - h * c.mean);
        let cov = (Matrix4::identity() - k * h) * c.covariance;
        assert_relative_eq!(got.mean, mean, epsilon = 1e-12);
        assert_relative_eq!(got.covariance, cov, epsilon = 1e-12);
    }

    #[test]
    fn update_pruned_equals_update_then_prune() {
        let pred: GaussianMixture = (0..6)
            .map(|i| comp(0.1 + 0.1 * i as f64, i as f64 * 3.0, 1.0))
            .collect();
        let z: Vec<Detection> = (0..4)
            .map(|i| Detection::new(Vector2::new(i as f64 * 4.0, 0.5), Matrix2::identity() * 0.5))
            .collect();
        let meas = MeasurementModel::position(0.95, 2e-3);
        let full = update(&pred, &z, &meas).unwrap();
        let (fast, count) = update_pruned(&pred, &z, &meas, 1e-5).unwrap();
        assert_eq!(count, full.len());
        assert_eq!(fast, prune(&full, 1e-5));
    }

    #[test]
    fn prune_removes_light_component() {
        let m = GaussianMixture::from_components(vec![comp(1e-6, 0.0, 0.0), comp(0.5, 9.0, 9.0)]);
        let out = prune_merge(&m, 1e-5, 4.0, 300).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.components[0].weight, 0.5);
    }

    #[test]
    fn merge_identical_components() {
        let m = GaussianMixture::from_components(vec![comp(0.3, 1.0, 1.0), comp(0.3, 1.0, 1.0)]);
        let out = merge(&m, 4.0).unwrap();
        assert_eq!(out.len(), 1);
        assert_relative_eq!(out.components[0].weight, 0.6);
        assert_relative_eq!(out.components[0].mean, m.components[0].mean);
        assert_relative_eq!(out.components[0].covariance, Matrix4::identity(), epsilon = 1e-15);
    }

    #[test]
    fn merge_keeps_distant_components_apart() {
        // unit covariance: squared Mahalanobis distance equals squared offset
        let m = GaussianMixture::from_components(vec![comp(0.3, 0.0, 0.0), comp(0.2, 5f64.sqrt(), 0.0)]);
        assert_eq!(merge(&m, 4.0).unwrap().len(), 2);
        assert_eq!(merge(&m, 5.5).unwrap().len(), 1);
    }

    #[test]
    fn cap_keeps_heaviest() {
        let m: GaussianMixture = (0..10).map(|i| comp(i as f64 * 0.01, i as f64 * 100.0, 0.0)).collect();
        let out = prune_merge(&m, 1e-5, 4.0, 3).unwrap();
        let w: Vec<f64> = out.iter().map(|c| c.weight).collect();
        assert_eq!(w, vec![0.09, 0.08, 0.07]);
    }

    #[test]
    fn extraction() {
        let low: GaussianMixture = vec![comp(0.5, 0.0, 0.0), comp(0.2, 1.0, 0.0)].into_iter().collect();
        assert!(extract_states(&low, 0.5).is_empty());
        let one = GaussianMixture::from_components(vec![comp(0.7, 3.0, 4.0)]);
        assert_eq!(extract_states(&one, 0.5), vec![Vector4::new(3.0, 4.0, 0.0, 0.0)]);
        let three =
            GaussianMixture::from_components(vec![comp(0.51, 1.0, 0.0), comp(0.2, 2.0, 0.0), comp(0.9, 3.0, 0.0)]);
        let est = extract_states(&three, 0.5);
        assert_eq!(est.len(), 2);
        assert_eq!(est[0][0], 3.0);
        assert_eq!(est[1][0], 1.0);
    }

    #[test]
    fn cardinality() {
        assert_eq!(expected_cardinality(&GaussianMixture::new()), 0.0);
        let m = GaussianMixture::from_components(vec![comp(0.5, 0.0, 0.0), comp(0.5, 1.0, 0.0)]);
        assert_eq!(expected_cardinality(&m), 1.0);
    }

    #[test]
    fn polar_conversion_covariance_axes() {
        let d = Detection::from_polar(Vector2::zeros(), 10.0, 0.0, 1.0, 0.1);
        assert_relative_eq!(d.position, Vector2::new(10.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(d.covariance, Matrix2::new(1.0, 0.0, 0.0, 1.0), epsilon = 1e-12);
    }
}

//! The fitness stack minimised by the swarm optimiser.
//!
//! Pose reproduction combines a normalised weighted position error with a
//! normalised relative-angle error; the task term drives the palm centre and
//! fingertips toward the object surface. The total fitness mixes the two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand::{joint_angles, scale_factor, Skeleton, ANGLE_COUNT, JOINT_COUNT};
use crate::scene::ContactSet;

/// Weights of every energy term. Defaults are the values used throughout
/// the built-in experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyWeights {
    /// Mix of the pose term in the total fitness.
    pub pose_weight: f64,
    /// Mix of the task term in the total fitness.
    pub task_weight: f64,
    /// Mix of the position error inside the pose term.
    pub position_weight: f64,
    /// Mix of the angle error inside the pose term.
    pub angle_weight: f64,
    /// Per-point weights of the position error.
    pub joint_weights: [f64; JOINT_COUNT],
    /// Weight of the palm-centre contact point.
    pub palm_weight: f64,
    /// Weight of each fingertip contact point.
    pub fingertip_weight: f64,
    /// Multiplier applied to `max_contact_distance` for missing points.
    pub miss_cost: f64,
    /// Farthest distance at which a point can still interact with the object.
    pub max_contact_distance: f64,
}

impl Default for EnergyWeights {
    fn default() -> Self {
        let mut joint_weights = [1.0; JOINT_COUNT];
        // Fingertips dominate the position error; the thumb tip most of all.
        joint_weights[4] = 10.0;
        for tip in [8, 12, 16, 20] {
            joint_weights[tip] = 3.0;
        }
        Self {
            pose_weight: 0.2,
            task_weight: 0.8,
            position_weight: 0.5,
            angle_weight: 0.5,
            joint_weights,
            palm_weight: 3.0,
            fingertip_weight: 1.0,
            miss_cost: 2.0,
            max_contact_distance: 0.04,
        }
    }
}

impl EnergyWeights {
    pub fn validate(&self) -> Result<()> {
        let all = self
            .joint_weights
            .iter()
            .chain([
                &self.pose_weight,
                &self.task_weight,
                &self.position_weight,
                &self.angle_weight,
                &self.palm_weight,
                &self.fingertip_weight,
            ]);
        for w in all {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::Config("energy weights must be non-negative".into()));
            }
        }
        if self.max_contact_distance <= 0.0 {
            return Err(Error::Config("max contact distance must be positive".into()));
        }
        if self.miss_cost < 1.0 {
            return Err(Error::Config("miss cost must be at least 1".into()));
        }
        if self.pose_weight + self.task_weight <= 0.0 {
            return Err(Error::Config("pose and task weights cannot both be zero".into()));
        }
        if self.position_weight + self.angle_weight <= 0.0 {
            return Err(Error::Config("position and angle weights cannot both be zero".into()));
        }
        if self.joint_weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("joint weights cannot all be zero".into()));
        }
        Ok(())
    }

    /// Validated copy with `pose + task = 1` and `position + angle = 1`.
    pub fn normalized(mut self) -> Result<Self> {
        self.validate()?;
        let mix = self.pose_weight + self.task_weight;
        self.pose_weight /= mix;
        self.task_weight /= mix;
        let pose_mix = self.position_weight + self.angle_weight;
        self.position_weight /= pose_mix;
        self.angle_weight /= pose_mix;
        Ok(self)
    }

    /// The substitute distance stored for missing contact points.
    pub fn miss_distance(&self) -> f64 {
        self.miss_cost * self.max_contact_distance
    }
}

/// Normalised weighted mean squared point error between a source skeleton
/// already scaled into the model domain and the model observation.
///
/// Each point difference is normalised by the summed hand spans of the two
/// skeletons, making the result dimensionless; zero iff the skeletons match
/// pointwise.
pub fn position_energy(
    x_scaled: &Skeleton,
    y: &Skeleton,
    joint_weights: &[f64; JOINT_COUNT],
) -> Result<f64> {
    let denom = x_scaled.span() + y.span();
    if denom <= 0.0 {
        return Err(Error::DegenerateInput("zero hand span".into()));
    }
    let mut total_weight = 0.0;
    let mut sum = 0.0;
    for ((xj, yj), w) in x_scaled.joints.iter().zip(&y.joints).zip(joint_weights) {
        let diff = (xj - yj) / denom;
        sum += w * diff.norm_squared();
        total_weight += w;
    }
    Ok(sum / total_weight)
}

/// Normalised mean squared error over the 15 relative joint angles, each
/// difference scaled by π. Lies in `[0, 1]`; zero iff all angles agree.
pub fn angle_energy(x: &Skeleton, y: &Skeleton) -> Result<f64> {
    let ax = joint_angles(x)?;
    let ay = joint_angles(y)?;
    let mut sum = 0.0;
    for (a, b) in ax.angles.iter().zip(&ay.angles) {
        let d = (a - b) / std::f64::consts::PI;
        sum += d * d;
    }
    Ok(sum / ANGLE_COUNT as f64)
}

/// Pose energy: scale `x` into the `y` domain by the mean bone-length ratio,
/// then mix the position and angle errors.
pub fn pose_energy(x: &Skeleton, y: &Skeleton, w: &EnergyWeights) -> Result<f64> {
    let s = scale_factor(x, y)?;
    let x_scaled = x.scaled(s);
    let ep = position_energy(&x_scaled, y, &w.joint_weights)?;
    let ea = angle_energy(x, y)?;
    Ok(w.position_weight * ep + w.angle_weight * ea)
}

/// Task energy: weighted mean of squared contact distances, each normalised
/// by the miss substitute so missing points contribute exactly their weight.
/// All points missing gives 1; all touching gives 0.
pub fn task_energy(contacts: &ContactSet, w: &EnergyWeights) -> Result<f64> {
    if contacts.d_max != w.max_contact_distance || contacts.miss_cost != w.miss_cost {
        return Err(Error::Config(
            "contact set was built with different distance constants".into(),
        ));
    }
    let miss = w.miss_distance();
    let denom = 5.0 * w.fingertip_weight + w.palm_weight;
    let mut sum = 0.0;
    for (i, e) in contacts.entries.iter().enumerate() {
        let weight = if i == 0 { w.palm_weight } else { w.fingertip_weight };
        let r = e.distance / miss;
        sum += weight * r * r;
    }
    Ok(sum / denom)
}

/// Total fitness minimised per frame: pose mix plus task mix.
pub fn fitness(
    x: &Skeleton,
    y: &Skeleton,
    contacts: &ContactSet,
    w: &EnergyWeights,
) -> Result<f64> {
    let pose = pose_energy(x, y, w)?;
    let task = task_energy(contacts, w)?;
    Ok(w.pose_weight * pose + w.task_weight * task)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::{HandModelSpec, KNUCKLES};
    use crate::scene::{ContactEntry, CONTACT_POINT_COUNT};
    use approx::assert_relative_eq;
    use nalgebra::{Isometry3, Point3, Vector3};

    fn rest() -> Skeleton {
        *HandModelSpec::default_spec().rest_pose()
    }

    fn contact_set(entries: [ContactEntry; CONTACT_POINT_COUNT]) -> ContactSet {
        ContactSet { entries, d_max: 0.04, miss_cost: 2.0 }
    }

    fn all_missing() -> ContactSet {
        contact_set([ContactEntry { distance: 0.08, missing: true }; CONTACT_POINT_COUNT])
    }

    fn all_touching() -> ContactSet {
        contact_set([ContactEntry { distance: 0.0, missing: false }; CONTACT_POINT_COUNT])
    }

    #[test]
    fn identical_skeletons_have_zero_position_energy() {
        let s = rest();
        let w = EnergyWeights::default();
        assert_eq!(position_energy(&s, &s, &w.joint_weights).unwrap(), 0.0);
    }

    #[test]
    fn single_full_span_offset_with_uniform_weights() {
        let s = rest();
        let mut moved = s;
        // Offsetting an interior (non-tip) point leaves both hand spans
        // unchanged, so one point displaced by the full normalisation span
        // contributes exactly 1/21 under uniform weights.
        let denom = 2.0 * s.span();
        moved.joints[2] = s.joints[2] + Vector3::new(denom, 0.0, 0.0);
        assert_eq!(moved.span(), s.span());
        let uniform = [1.0; JOINT_COUNT];
        assert_relative_eq!(
            position_energy(&moved, &s, &uniform).unwrap(),
            1.0 / 21.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn weighted_thumb_tip_offset_matches_direct_summation() {
        let s = rest();
        let w = EnergyWeights::default();
        let mut moved = s;
        let half_span = s.span() / 2.0;
        moved.joints[4] = s.joints[4] + Vector3::new(0.0, 0.0, half_span);
        let denom = moved.span() + s.span();
        // Independent oracle: direct summation over all points.
        let mut sum = 0.0;
        let mut total = 0.0;
        for i in 0..JOINT_COUNT {
            let d = (moved.joints[i] - s.joints[i]) / denom;
            sum += w.joint_weights[i] * d.norm_squared();
            total += w.joint_weights[i];
        }
        let expected = sum / total;
        assert_relative_eq!(
            position_energy(&moved, &s, &w.joint_weights).unwrap(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn angle_energy_zero_under_rigid_motion() {
        let s = rest();
        let iso = Isometry3::new(Vector3::new(0.1, 0.2, 0.3), Vector3::new(0.5, -0.4, 0.8));
        assert_relative_eq!(angle_energy(&s.transformed(&iso), &s).unwrap(), 0.0, epsilon = 1e-18);
    }

    #[test]
    fn single_pi_angle_deviation_is_one_fifteenth() {
        // Build two synthetic skeletons differing by π in exactly one
        // relative angle: fold one finger's distal bone straight back.
        let mut x = rest();
        for f in 0..5 {
            let base = KNUCKLES[f];
            let dir = Vector3::new(1.0, 0.0, 0.0);
            x.joints[base] = Point3::new(0.1, 0.02 * f as f64, 0.0);
            x.joints[base + 1] = x.joints[base] + dir * 0.04;
            x.joints[base + 2] = x.joints[base + 1] + dir * 0.03;
            x.joints[base + 3] = x.joints[base + 2] + dir * 0.02;
        }
        let mut y = x;
        // Reverse the last bone of the middle finger: angle 0 -> π.
        y.joints[12] = y.joints[11] - (x.joints[12] - x.joints[11]);
        let e = angle_energy(&x, &y).unwrap();
        assert!((e - 1.0 / 15.0).abs() < 1e-12, "got {e}");
    }

    #[test]
    fn angle_energy_matches_per_angle_oracle_on_posed_hands() {
        let spec = HandModelSpec::default_spec();
        let mut a = crate::hand::ActuatorVector::zeros();
        for (i, j) in a.joints_mut().iter_mut().enumerate() {
            let (lo, hi) = spec.joint_limits(i);
            *j = lo + (hi - lo) * ((i * 13 % 7) as f64 / 7.0);
        }
        let x = rest();
        let y = spec.pose(&a).skeleton;
        let ax = joint_angles(&x).unwrap();
        let ay = joint_angles(&y).unwrap();
        let mut expected = 0.0;
        for i in 0..ANGLE_COUNT {
            expected += ((ax.angles[i] - ay.angles[i]) / std::f64::consts::PI).powi(2);
        }
        expected /= ANGLE_COUNT as f64;
        assert_relative_eq!(angle_energy(&x, &y).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn pose_energy_zero_up_to_scale() {
        let s = rest();
        let w = EnergyWeights::default();
        assert_relative_eq!(pose_energy(&s.scaled(3.0), &s, &w).unwrap(), 0.0, epsilon = 1e-18);
    }

    #[test]
    fn pose_energy_reduces_to_position_term_when_angle_weight_zero() {
        let mut w = EnergyWeights::default();
        w.angle_weight = 0.0;
        w.position_weight = 1.0;
        let x = rest();
        let mut y = rest();
        y.joints[8] = y.joints[8] + Vector3::new(0.01, 0.0, 0.0);
        let s = scale_factor(&x, &y).unwrap();
        let ep = position_energy(&x.scaled(s), &y, &w.joint_weights).unwrap();
        assert_relative_eq!(pose_energy(&x, &y, &w).unwrap(), ep, epsilon = 1e-15);
    }

    #[test]
    fn pose_energy_equal_mix_matches_formula() {
        let w = EnergyWeights::default(); // 0.5 / 0.5
        let x = rest();
        let mut y = rest();
        y.joints[8] = y.joints[8] + Vector3::new(0.0, 0.015, 0.0);
        y.joints[4] = y.joints[4] + Vector3::new(0.0, 0.0, -0.01);
        let s = scale_factor(&x, &y).unwrap();
        let ep = position_energy(&x.scaled(s), &y, &w.joint_weights).unwrap();
        let ea = angle_energy(&x, &y).unwrap();
        assert_relative_eq!(
            pose_energy(&x, &y, &w).unwrap(),
            0.5 * ep + 0.5 * ea,
            epsilon = 1e-15
        );
    }

    #[test]
    fn task_energy_bounds() {
        let w = EnergyWeights::default();
        assert_eq!(task_energy(&all_missing(), &w).unwrap(), 1.0);
        assert_eq!(task_energy(&all_touching(), &w).unwrap(), 0.0);
    }

    #[test]
    fn palm_touch_five_tips_missing_is_five_eighths() {
        let w = EnergyWeights::default();
        let mut entries = [ContactEntry { distance: 0.08, missing: true }; CONTACT_POINT_COUNT];
        entries[0] = ContactEntry { distance: 0.0, missing: false };
        let e = task_energy(&contact_set(entries), &w).unwrap();
        assert_eq!(e, 0.625);
    }

    #[test]
    fn task_energy_rejects_mismatched_constants() {
        let mut w = EnergyWeights::default();
        w.max_contact_distance = 0.05;
        assert!(matches!(task_energy(&all_missing(), &w), Err(Error::Config(_))));
    }

    #[test]
    fn fitness_weighted_sum() {
        let x = rest();
        let mut y = rest();
        y.joints[8] = y.joints[8] + Vector3::new(0.005, 0.0, 0.0);

        let mut w = EnergyWeights::default();
        w.task_weight = 0.0;
        w.pose_weight = 1.0;
        let pose = pose_energy(&x, &y, &w).unwrap();
        assert_relative_eq!(
            fitness(&x, &y, &all_missing(), &w).unwrap(),
            pose,
            epsilon = 1e-15
        );

        let mut w = EnergyWeights::default();
        w.task_weight = 1.0;
        w.pose_weight = 0.0;
        assert_relative_eq!(fitness(&x, &x, &all_missing(), &w).unwrap(), 1.0, epsilon = 1e-15);

        // Default mix with known sub-energies.
        let w = EnergyWeights::default();
        let pose = pose_energy(&x, &y, &w).unwrap();
        let task = task_energy(&all_missing(), &w).unwrap();
        assert_relative_eq!(
            fitness(&x, &y, &all_missing(), &w).unwrap(),
            0.2 * pose + 0.8 * task,
            epsilon = 1e-15
        );
    }

    #[test]
    fn normalization_enforces_unit_mixes() {
        let mut w = EnergyWeights::default();
        w.pose_weight = 1.0;
        w.task_weight = 4.0;
        w.position_weight = 3.0;
        w.angle_weight = 1.0;
        let n = w.normalized().unwrap();
        assert_relative_eq!(n.pose_weight + n.task_weight, 1.0, epsilon = 1e-15);
        assert_relative_eq!(n.pose_weight, 0.2, epsilon = 1e-15);
        assert_relative_eq!(n.position_weight, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn task_energy_strictly_decreases_with_a_contact_distance() {
        let w = EnergyWeights::default();
        let mut entries = [ContactEntry { distance: 0.02, missing: false }; CONTACT_POINT_COUNT];
        let base = task_energy(&contact_set(entries), &w).unwrap();
        entries[3] = ContactEntry { distance: 0.01, missing: false };
        let closer = task_energy(&contact_set(entries), &w).unwrap();
        assert!(closer < base);
    }
}

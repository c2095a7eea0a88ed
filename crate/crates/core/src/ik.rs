//! Closed-form inverse-kinematics retargeting.
//!
//! The global 6-DoF pose comes from a least-squares rigid alignment of the
//! palm point set (wrist plus the five knuckles) onto the model's rest palm.
//! Each finger's actuators are then solved chain-by-chain: the target bone
//! direction is projected onto the actuator's rotation plane and the signed
//! angle from the rest direction is taken, clamped to the joint limits.
//! Wrist actuators shared by all fingers stay at zero; the global fit
//! absorbs any wrist rotation present in the input.

use nalgebra::{Isometry3, Matrix3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand::{ActuatorVector, HandModelSpec, Skeleton, KNUCKLES, WRIST};

/// Settings of the IK solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IkConfig {
    /// Passes per frame; passes after the first re-fit the global alignment
    /// over all 21 points before re-solving the chains.
    pub max_passes: u32,
    /// Clamp solved angles into actuator limits.
    pub clamp_to_limits: bool,
    /// Reuse the previous frame's value at projection singularities.
    pub warm_start: bool,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self { max_passes: 3, clamp_to_limits: true, warm_start: true }
    }
}

impl IkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_passes < 1 {
            return Err(Error::Config("ik passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Least-squares rigid transform mapping `model` points onto `target` points.
/// Errors when the model point set is too close to collinear to pin down a
/// rotation.
fn fit_rigid(model: &[Point3<f64>], target: &[Point3<f64>]) -> Result<Isometry3<f64>> {
    debug_assert_eq!(model.len(), target.len());
    let n = model.len() as f64;
    let mut mc = Vector3::zeros();
    let mut tc = Vector3::zeros();
    for (m, t) in model.iter().zip(target) {
        mc += m.coords;
        tc += t.coords;
    }
    mc /= n;
    tc /= n;

    let mut h = Matrix3::zeros();
    for (m, t) in model.iter().zip(target) {
        h += (t.coords - tc) * (m.coords - mc).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::DegenerateInput("svd failed".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::DegenerateInput("svd failed".into()))?;
    let sv = svd.singular_values;
    if sv[1] <= 1e-6 * sv[0].max(1e-12) {
        return Err(Error::DegenerateInput(
            "palm points are collinear; rigid fit is ambiguous".into(),
        ));
    }
    let det = (u * v_t).determinant();
    let d = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, det.signum()));
    let rot = u * d * v_t;
    let translation = tc - rot * mc;
    Ok(Isometry3::from_parts(
        Translation3::from(translation),
        UnitQuaternion::from_matrix(&rot),
    ))
}

/// Retarget a skeleton (already scaled into the model domain) onto the
/// actuator vector. Deterministic given `(x_scaled, prev)`.
pub fn ik_retarget(
    x_scaled: &Skeleton,
    spec: &HandModelSpec,
    prev: Option<&ActuatorVector>,
    cfg: &IkConfig,
) -> Result<ActuatorVector> {
    cfg.validate()?;
    x_scaled.validate()?;

    let rest_palm = spec.rest_palm_points();
    let mut target_palm = [Point3::origin(); 6];
    target_palm[0] = x_scaled.joints[WRIST];
    for (t, &k) in target_palm[1..].iter_mut().zip(&KNUCKLES) {
        *t = x_scaled.joints[k];
    }

    let mut global = fit_rigid(&rest_palm, &target_palm)?;
    let mut out = ActuatorVector::zeros();

    for pass in 0..cfg.max_passes {
        if pass > 0 {
            // Refit the global pose over all 21 points of the current solve.
            let posed = spec.pose(&out).skeleton;
            let model_local = global.inverse();
            let model_points: Vec<Point3<f64>> = posed
                .joints
                .iter()
                .map(|p| model_local.transform_point(p))
                .collect();
            global = fit_rigid(&model_points, &x_scaled.joints)?;
        }
        solve_chains(x_scaled, spec, prev, cfg, &global, &mut out);
        let euler = global.rotation.euler_angles();
        out.set_global(global.translation.vector, euler);
    }
    Ok(out)
}

/// Solve every finger chain against the fitted palm frame, writing joint
/// values into `out`.
fn solve_chains(
    x_scaled: &Skeleton,
    spec: &HandModelSpec,
    prev: Option<&ActuatorVector>,
    cfg: &IkConfig,
    global: &Isometry3<f64>,
    out: &mut ActuatorVector,
) {
    for chain in spec.chains() {
        // Frame of the last solved actuator; starts at the palm. Chain
        // actuator offsets hang off the shared wrist actuators, which stay
        // at zero, so composing from the global frame is exact.
        let mut cum = *global;
        let mut wrist_chain_offset = Vector3::zeros();
        if let Some(first) = chain.first() {
            // Accumulate offsets of shared ancestors (identity rotations).
            let mut anc = Vec::new();
            let mut parent = spec.actuator_parent(first.actuator);
            while let Some(p) = parent {
                anc.push(p);
                parent = spec.actuator_parent(p);
            }
            for &a in anc.iter().rev() {
                wrist_chain_offset += spec.actuator_offset(a);
            }
        }
        cum *= Translation3::from(wrist_chain_offset);

        for step in chain {
            let act = step.actuator;
            let axis = spec.actuator_axis(act);
            let pre = cum * Translation3::from(spec.actuator_offset(act));
            let target_world = x_scaled.joints[step.target_point].coords - pre.translation.vector;
            let target_local = pre.rotation.inverse_transform_vector(&target_world);

            let fallback = match (cfg.warm_start, prev) {
                (true, Some(p)) => p.joints()[act],
                _ => 0.0,
            };
            let angle = projected_angle(&step.rest_dir, &target_local, &axis).unwrap_or(fallback);
            let (lo, hi) = spec.joint_limits(act);
            let q = if cfg.clamp_to_limits { angle.clamp(lo, hi) } else { angle };
            out.joints_mut()[act] = q;
            cum = pre * UnitQuaternion::from_axis_angle(&axis, q);
        }
    }
}

/// Signed angle from `rest` to `target` about `axis`, measured in the plane
/// perpendicular to the axis. `None` when either projection is too short to
/// define a direction.
fn projected_angle(
    rest: &Vector3<f64>,
    target: &Vector3<f64>,
    axis: &nalgebra::Unit<Vector3<f64>>,
) -> Option<f64> {
    let a = axis.into_inner();
    let r = rest - a * rest.dot(&a);
    let t = target - a * target.dot(&a);
    if r.norm() < 1e-9 || t.norm() < 1e-9 * target.norm().max(1e-9) {
        return None;
    }
    let sin = r.cross(&t).dot(&a);
    let cos = r.dot(&t);
    Some(sin.atan2(cos))
}

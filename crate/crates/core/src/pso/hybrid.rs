//! Hybrid retargeting: seed the swarm at the inverse-kinematics pose, keep
//! particle motion bounded, and minimise the pose-plus-task fitness against
//! the frame's scene snapshot. `task_refine` reuses the machinery with a
//! task-only objective for micro-corrections between input frames.

use crate::energy::EnergyWeights;
use crate::error::Result;
use crate::hand::{
    joint_angles, ActuatorVector, HandModelSpec, JointAngles, Skeleton, ACTION_DIM, ANGLE_COUNT,
    JOINT_COUNT,
};
use crate::ik::{ik_retarget, IkConfig};
use crate::scene::{contact_distances, step_scene, SceneState};

use super::swarm::{action_ranges, Swarm, SwarmConfig};

/// Fitness of one candidate action against a frame snapshot.
///
/// Every candidate is applied to its own clone of the snapshot — the scene
/// is stepped under the candidate's contact points, so a held object tracks
/// the candidate's palm motion — and contacts are measured against that
/// stepped clone. Evaluations cannot interfere and may run in any order.
struct FrameObjective<'a> {
    spec: &'a HandModelSpec,
    scene: &'a SceneState,
    weights: &'a EnergyWeights,
    /// Frame duration used when stepping the per-candidate clone.
    dt: f64,
    /// Input skeleton scaled into the model domain, with its precomputed
    /// span and relative angles (both pose-independent).
    pose_target: Option<PoseTarget>,
}

struct PoseTarget {
    x_scaled: Skeleton,
    x_angles: JointAngles,
    x_span: f64,
    joint_weight_sum: f64,
}

impl<'a> FrameObjective<'a> {
    fn new(
        spec: &'a HandModelSpec,
        scene: &'a SceneState,
        weights: &'a EnergyWeights,
        dt: f64,
        x: Option<&Skeleton>,
    ) -> Result<Self> {
        weights.validate()?;
        let pose_target = match x {
            Some(x) => {
                let (_, x_scaled) = spec.scale_into_model(x)?;
                Some(PoseTarget {
                    x_angles: joint_angles(&x_scaled)?,
                    x_span: x_scaled.span(),
                    joint_weight_sum: weights.joint_weights.iter().sum(),
                    x_scaled,
                })
            }
            None => None,
        };
        Ok(Self { spec, scene, weights, dt, pose_target })
    }

    fn eval(&self, position: &[f64; ACTION_DIM]) -> f64 {
        let action = ActuatorVector(*position);
        if !action.is_finite() {
            return f64::INFINITY;
        }
        let posed = self.spec.pose(&action);
        let y = &posed.skeleton;
        let w = self.weights;

        // Apply the candidate to its own clone of the snapshot: a grasp
        // that persists carries the object along with the candidate's palm.
        let stepped = match step_scene(self.scene, &posed.palm_center, &y.fingertips(), self.dt) {
            Ok(s) => s,
            Err(_) => return f64::INFINITY,
        };
        let task = match contact_distances(
            &posed.palm_center,
            &y.fingertips(),
            &stepped,
            w.max_contact_distance,
            w.miss_cost,
        ) {
            Ok(contacts) => {
                let miss = w.miss_distance();
                let mut sum = 0.0;
                for (i, e) in contacts.entries.iter().enumerate() {
                    let weight = if i == 0 { w.palm_weight } else { w.fingertip_weight };
                    let r = e.distance / miss;
                    sum += weight * r * r;
                }
                sum / (5.0 * w.fingertip_weight + w.palm_weight)
            }
            Err(_) => return f64::INFINITY,
        };

        let Some(target) = &self.pose_target else {
            // Task-only objective for micro-corrections.
            return task;
        };

        let denom = target.x_span + y.span();
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        let mut position_err = 0.0;
        for i in 0..JOINT_COUNT {
            let d = (target.x_scaled.joints[i] - y.joints[i]) / denom;
            position_err += w.joint_weights[i] * d.norm_squared();
        }
        position_err /= target.joint_weight_sum;

        let angle_err = match joint_angles(y) {
            Ok(ay) => {
                let mut sum = 0.0;
                for i in 0..ANGLE_COUNT {
                    let d = (target.x_angles.angles[i] - ay.angles[i]) / std::f64::consts::PI;
                    sum += d * d;
                }
                sum / ANGLE_COUNT as f64
            }
            Err(_) => return f64::INFINITY,
        };

        let pose = w.position_weight * position_err + w.angle_weight * angle_err;
        w.pose_weight * pose + w.task_weight * task
    }
}

/// Swarm-refined retargeting of one frame.
///
/// Seeds the swarm at the IK pose (particle 0 keeps it exactly), adds
/// bounded initialisation noise, scores candidates by applying them to the
/// frame's scene snapshot, and stops early once the global best stalls.
/// With zero iterations the best initial particle is returned, so a zero
/// noise width degenerates to plain IK.
#[allow(clippy::too_many_arguments)]
pub fn hybrid_pso(
    x: &Skeleton,
    scene: &SceneState,
    spec: &HandModelSpec,
    weights: &EnergyWeights,
    cfg: &SwarmConfig,
    ik_cfg: &IkConfig,
    prev: Option<&ActuatorVector>,
    dt: f64,
) -> Result<ActuatorVector> {
    cfg.validate()?;
    let (_, x_scaled) = spec.scale_into_model(x)?;
    let seed_pose = ik_retarget(&x_scaled, spec, prev, ik_cfg)?;
    let objective = FrameObjective::new(spec, scene, weights, dt, Some(x))?;

    let ranges = action_ranges(spec, cfg);
    let noise = ranges.map(|r| r * cfg.init_noise_fraction);
    let v_max = ranges.map(|r| r * cfg.velocity_max_fraction);
    let eval = |p: &[f64; ACTION_DIM]| objective.eval(p);
    let mut swarm = Swarm::init(&seed_pose.0, &noise, v_max, cfg, eval)?;
    swarm.run(cfg.iterations, cfg.min_fitness_step, eval);
    Ok(spec.clamp(&ActuatorVector(*swarm.best_position())))
}

/// Task-only micro-correction around the current pose.
///
/// Identical machinery to [`hybrid_pso`] but initialised at `current` and
/// scored purely by the task energy, so it depends only on the environment
/// and can run between input frames. The strict-improvement best update
/// keeps the result at `current` whenever nothing within reach scores lower.
pub fn task_refine(
    scene: &SceneState,
    current: &ActuatorVector,
    spec: &HandModelSpec,
    weights: &EnergyWeights,
    cfg: &SwarmConfig,
    dt: f64,
) -> Result<ActuatorVector> {
    cfg.validate()?;
    let objective = FrameObjective::new(spec, scene, weights, dt, None)?;
    let ranges = action_ranges(spec, cfg);
    let noise = ranges.map(|r| r * cfg.init_noise_fraction);
    let v_max = ranges.map(|r| r * cfg.velocity_max_fraction);
    let eval = |p: &[f64; ACTION_DIM]| objective.eval(p);
    let mut swarm = Swarm::init(&current.0, &noise, v_max, cfg, eval)?;
    swarm.run(cfg.iterations, cfg.min_fitness_step, eval);
    Ok(spec.clamp(&ActuatorVector(*swarm.best_position())))
}

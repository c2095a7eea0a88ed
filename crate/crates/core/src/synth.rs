//! Synthetic input generation: the desk-scale stand-in for a live hand pose
//! estimator.
//!
//! A reach-close-lift actuator script over the scene's object is converted
//! to skeletons by forward kinematics, rescaled into a distinct synthetic
//! "human" domain, and perturbed with per-coordinate Gaussian noise.

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::hand::{ActuatorVector, HandModelSpec};
use crate::pipeline::{mix_seed, InputFrame, InputTrajectory};
use crate::scene::SceneState;

/// Size of the shipped noisy benchmark set.
pub const BENCHMARK_COUNT: usize = 10;
/// Noise level of the shipped set, calibrated so the IK baseline mostly
/// fails while the grasp stays recoverable.
pub const BENCHMARK_NOISE_STD: f64 = 0.015;
/// Seed of the shipped set.
pub const BENCHMARK_SEED: u64 = 2108;

/// Generator parameters.
#[derive(Debug, Clone, Copy)]
pub struct SynthParams {
    pub count: usize,
    /// Standard deviation of the per-coordinate Gaussian noise (m).
    pub noise_std: f64,
    pub seed: u64,
    pub frames_per_second: f64,
    /// Uniform scale applied to the model skeleton to emulate a differently
    /// proportioned source hand.
    pub human_scale: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            count: BENCHMARK_COUNT,
            noise_std: BENCHMARK_NOISE_STD,
            seed: BENCHMARK_SEED,
            frames_per_second: 60.0,
            human_scale: 1.1,
        }
    }
}

/// Actuator keyframes of one scripted grasp, linearly interpolated.
struct GraspScript {
    keys: Vec<(f64, ActuatorVector)>,
}

impl GraspScript {
    fn duration(&self) -> f64 {
        self.keys.last().map(|(t, _)| *t).unwrap_or(0.0)
    }

    fn sample(&self, t: f64) -> ActuatorVector {
        let keys = &self.keys;
        if t <= keys[0].0 {
            return keys[0].1;
        }
        for pair in keys.windows(2) {
            let (t0, a0) = &pair[0];
            let (t1, a1) = &pair[1];
            if t <= *t1 {
                let alpha = (t - t0) / (t1 - t0);
                let mut out = *a0;
                for (o, (x, y)) in out.0.iter_mut().zip(a0.0.iter().zip(a1.0.iter())) {
                    *o = x + alpha * (y - x);
                }
                return out;
            }
        }
        keys.last().unwrap().1
    }
}

/// Set one finger's (abd, mcp, pip, dip) block. Finger 0 is the thumb.
fn set_finger(a: &mut ActuatorVector, finger: usize, abd: f64, mcp: f64, pip: f64, dip: f64) {
    let joints = a.joints_mut();
    joints[3 + 4 * finger] = abd;
    joints[4 + 4 * finger] = mcp;
    joints[5 + 4 * finger] = pip;
    joints[6 + 4 * finger] = dip;
}

/// Script a reach-close-lift motion over the scene's object. `start_offset`
/// jitters the approach in the table plane.
fn build_script(scene: &SceneState, spec: &HandModelSpec, start_offset: Vector3<f64>) -> GraspScript {
    let object = scene.object_center();
    let top = scene.support_top();
    let palm_rest = spec.rest_palm_center();

    // Wrist position that parks the palm centre just above the object's top
    // face with the fingers beyond the far edge, ready to curl around it.
    let grasp_wrist = Vector3::new(
        object.x - 0.072 + start_offset.x,
        object.y - palm_rest.y + start_offset.y,
        top - palm_rest.z + 0.002,
    );
    let start_wrist = grasp_wrist + Vector3::new(0.0, 0.0, 0.13);
    let lift_wrist = grasp_wrist + Vector3::new(0.0, 0.0, 0.24);

    let mut open = ActuatorVector::zeros();
    for f in 1..5 {
        set_finger(&mut open, f, 0.0, -0.1, 0.05, 0.02);
    }
    set_finger(&mut open, 0, 0.0, 0.0, 0.05, 0.02);

    let mut closed = open;
    for f in 1..5 {
        set_finger(&mut closed, f, 0.0, 1.30, 1.15, 0.60);
    }
    set_finger(&mut closed, 0, -0.40, 0.85, 0.55, 0.30);

    let key = |wrist: Vector3<f64>, joints: &ActuatorVector| {
        let mut a = *joints;
        a.set_global(wrist, (0.0, 0.0, 0.0));
        a
    };

    GraspScript {
        keys: vec![
            (0.0, key(start_wrist, &open)),
            (0.5, key(grasp_wrist, &open)),
            (0.9, key(grasp_wrist, &closed)),
            (1.5, key(lift_wrist, &closed)),
            (1.7, key(lift_wrist, &closed)),
        ],
    }
}

/// Generate `count` synthetic noisy grasp trajectories over the scene.
/// Deterministic per seed. Errors when the scripted close pose cannot touch
/// the object (the scene is out of the script's reach).
pub fn generate_trajectories(
    scene: &SceneState,
    spec: &HandModelSpec,
    params: &SynthParams,
) -> Result<Vec<InputTrajectory>> {
    if params.noise_std < 0.0 {
        return Err(Error::Config("noise std must be non-negative".into()));
    }
    if params.count == 0 || params.frames_per_second <= 0.0 || params.human_scale <= 0.0 {
        return Err(Error::Config("synth parameters out of range".into()));
    }

    // Reachability: the clean scripted close pose must put at least two
    // contact points onto the object, otherwise no grasp can ever form.
    let probe = build_script(scene, spec, Vector3::zeros());
    let closed = spec.pose(&probe.sample(0.9));
    let eps = scene.grasp.contact_epsilon;
    let mut touching = usize::from(scene.min_distance(&closed.palm_center) <= eps);
    for tip in closed.skeleton.fingertips() {
        touching += usize::from(scene.min_distance(&tip) <= eps);
    }
    if touching < 2 {
        return Err(Error::Generation(format!(
            "scripted grasp reaches only {touching} contact point(s); object out of reach"
        )));
    }

    let dt = 1.0 / params.frames_per_second;
    let mut out = Vec::with_capacity(params.count);
    for traj_idx in 0..params.count {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, "synth", traj_idx as u64));
        let start_offset = Vector3::new(
            rng.gen_range(-0.008..=0.008),
            rng.gen_range(-0.008..=0.008),
            0.0,
        );
        let script = build_script(scene, spec, start_offset);
        let frame_count = (script.duration() / dt).round() as usize + 1;

        let noise = if params.noise_std > 0.0 {
            Some(Normal::new(0.0, params.noise_std).map_err(|e| {
                Error::Config(format!("noise distribution: {e}"))
            })?)
        } else {
            None
        };

        let mut frames = Vec::with_capacity(frame_count);
        for i in 0..frame_count {
            let t = i as f64 * dt;
            let action = script.sample(t);
            let mut skeleton = spec.pose(&action).skeleton.scaled(params.human_scale);
            if let Some(dist) = &noise {
                for j in skeleton.joints.iter_mut() {
                    *j = Point3::new(
                        j.x + dist.sample(&mut rng),
                        j.y + dist.sample(&mut rng),
                        j.z + dist.sample(&mut rng),
                    );
                }
            }
            frames.push(InputFrame { t, joints: skeleton });
        }
        let traj = InputTrajectory { id: format!("synth_{traj_idx:03}"), frames };
        traj.validate()?;
        out.push(traj);
    }
    Ok(out)
}

/// The shipped noisy benchmark set: fixed count, noise level, and seed.
pub fn benchmark_trajectories(
    scene: &SceneState,
    spec: &HandModelSpec,
) -> Result<Vec<InputTrajectory>> {
    generate_trajectories(scene, spec, &SynthParams::default())
}

//! The actuated hand model: a kinematic tree of single-axis rotational
//! actuators loaded from a JSON spec, forward kinematics onto the 21-point
//! skeleton, and the 29-component action vector controlling it.

use nalgebra::{Isometry3, Point3, Rotation3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use super::skeleton::{Skeleton, BONE_COUNT, FINGERTIPS, FINGER_COUNT, JOINT_COUNT, KNUCKLES, WRIST};
use crate::error::{Error, Result};

/// Global pose components: 3 translation + 3 rotation (extrinsic XYZ Euler).
pub const GLOBAL_DIM: usize = 6;
/// Single-axis joint actuators in the default model.
pub const JOINT_ACTUATOR_COUNT: usize = 23;
/// Full action dimension.
pub const ACTION_DIM: usize = GLOBAL_DIM + JOINT_ACTUATOR_COUNT;

const MAX_ACTUATORS: usize = 32;

/// The 29-component action controlling the hand: global translation (m),
/// global rotation (extrinsic XYZ Euler, rad), then one angle per joint
/// actuator (rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActuatorVector(pub [f64; ACTION_DIM]);

impl ActuatorVector {
    pub fn zeros() -> Self {
        Self([0.0; ACTION_DIM])
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != ACTION_DIM {
            return Err(Error::Validation(format!(
                "action needs {ACTION_DIM} components, got {}",
                v.len()
            )));
        }
        let mut a = [0.0; ACTION_DIM];
        a.copy_from_slice(v);
        Ok(Self(a))
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.0[3], self.0[4], self.0[5])
    }

    /// The global 6-DoF pose as an isometry.
    pub fn global_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::from(self.translation()),
            UnitQuaternion::from_rotation_matrix(&self.rotation()),
        )
    }

    pub fn set_global(&mut self, translation: Vector3<f64>, euler_xyz: (f64, f64, f64)) {
        self.0[0] = translation.x;
        self.0[1] = translation.y;
        self.0[2] = translation.z;
        self.0[3] = euler_xyz.0;
        self.0[4] = euler_xyz.1;
        self.0[5] = euler_xyz.2;
    }

    /// The 23 joint actuator angles.
    pub fn joints(&self) -> &[f64] {
        &self.0[GLOBAL_DIM..]
    }

    pub fn joints_mut(&mut self) -> &mut [f64] {
        &mut self.0[GLOBAL_DIM..]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// One single-axis rotational actuator in the tree.
#[derive(Debug, Clone)]
struct Actuator {
    name: String,
    /// Index of the parent actuator; `None` hangs off the global pose frame.
    parent: Option<usize>,
    /// Frame origin in the parent frame.
    offset: Vector3<f64>,
    /// Rotation axis in this actuator's local frame.
    axis: Unit<Vector3<f64>>,
    limits: (f64, f64),
}

/// Where a tracked point sits in the tree: a frame (or the root) plus a
/// rigid offset in that frame.
#[derive(Debug, Clone, Copy)]
struct Attachment {
    frame: Option<usize>,
    offset: Vector3<f64>,
}

/// Per-finger IK solve plan derived from the tree: the actuators unique to
/// this finger's chain paired with the skeleton point each one steers.
#[derive(Debug, Clone)]
pub(crate) struct ChainStep {
    pub actuator: usize,
    /// Skeleton point whose direction from the actuator origin is matched.
    pub target_point: usize,
    /// Rest-pose direction from the actuator origin to the target point,
    /// expressed in the actuator's (pre-rotation) local frame.
    pub rest_dir: Vector3<f64>,
}

/// Forward-kinematics output: the skeleton plus the palm-centre point used
/// by the task energy.
#[derive(Debug, Clone, Copy)]
pub struct PosedHand {
    pub skeleton: Skeleton,
    pub palm_center: Point3<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct ActuatorFile {
    name: String,
    parent: Option<String>,
    #[serde(with = "crate::wire::vec3")]
    offset: Vector3<f64>,
    #[serde(with = "crate::wire::vec3")]
    axis: Vector3<f64>,
    limits: [f64; 2],
}

#[derive(Debug, Deserialize, Serialize)]
struct PointFile {
    index: usize,
    actuator: Option<String>,
    #[serde(with = "crate::wire::vec3")]
    offset: Vector3<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct PalmFile {
    actuator: Option<String>,
    #[serde(with = "crate::wire::vec3")]
    offset: Vector3<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct HandSpecFile {
    name: String,
    actuators: Vec<ActuatorFile>,
    skeleton_points: Vec<PointFile>,
    palm: PalmFile,
    rest_pose: Vec<[f64; 3]>,
}

/// A validated hand model: the kinematic tree, skeleton-point attachments,
/// palm-centre attachment, and everything precomputed from the rest pose.
#[derive(Debug, Clone)]
pub struct HandModelSpec {
    name: String,
    actuators: Vec<Actuator>,
    /// Evaluation order such that parents precede children.
    eval_order: Vec<usize>,
    points: [Attachment; JOINT_COUNT],
    palm: Attachment,
    rest_pose: Skeleton,
    rest_palm_center: Point3<f64>,
    link_lengths: [f64; BONE_COUNT],
    chains: Vec<Vec<ChainStep>>,
    spec_hash: String,
}

impl HandModelSpec {
    /// Parse and validate a spec from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: HandSpecFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("hand spec: {e}")))?;
        Self::compile(file, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("hand spec {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The default model shipped with the crate.
    pub fn default_spec() -> Self {
        Self::from_json(DEFAULT_HAND_JSON).expect("embedded hand spec is valid")
    }

    fn compile(file: HandSpecFile, raw: &[u8]) -> Result<Self> {
        if file.actuators.len() != JOINT_ACTUATOR_COUNT {
            return Err(Error::Config(format!(
                "expected {JOINT_ACTUATOR_COUNT} actuators, got {}",
                file.actuators.len()
            )));
        }
        if file.actuators.len() > MAX_ACTUATORS {
            return Err(Error::Config("too many actuators".into()));
        }

        let mut actuators = Vec::with_capacity(file.actuators.len());
        let name_index = |actuators: &[ActuatorFile], name: &str| -> Result<usize> {
            actuators
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| Error::Config(format!("unknown actuator link '{name}'")))
        };
        for (i, a) in file.actuators.iter().enumerate() {
            if file.actuators.iter().filter(|b| b.name == a.name).count() > 1 {
                return Err(Error::Config(format!("duplicate actuator name '{}'", a.name)));
            }
            let parent = match &a.parent {
                None => None,
                Some(p) => Some(name_index(&file.actuators, p)?),
            };
            if parent == Some(i) {
                return Err(Error::Config(format!("actuator '{}' is its own parent", a.name)));
            }
            let norm = a.axis.norm();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::Config(format!(
                    "actuator '{}' axis is not unit length",
                    a.name
                )));
            }
            if a.limits[0] >= a.limits[1] {
                return Err(Error::Config(format!(
                    "actuator '{}' limits must satisfy lo < hi",
                    a.name
                )));
            }
            actuators.push(Actuator {
                name: a.name.clone(),
                parent,
                offset: a.offset,
                axis: Unit::new_normalize(a.axis),
                limits: (a.limits[0], a.limits[1]),
            });
        }

        let eval_order = topo_order(&actuators)?;

        if file.skeleton_points.len() != JOINT_COUNT {
            return Err(Error::Config(format!(
                "expected {JOINT_COUNT} skeleton points, got {}",
                file.skeleton_points.len()
            )));
        }
        let mut points = [Attachment { frame: None, offset: Vector3::zeros() }; JOINT_COUNT];
        let mut seen = [false; JOINT_COUNT];
        for p in &file.skeleton_points {
            if p.index >= JOINT_COUNT || seen[p.index] {
                return Err(Error::Config(format!("bad or duplicate point index {}", p.index)));
            }
            seen[p.index] = true;
            let frame = match &p.actuator {
                None => None,
                Some(n) => Some(name_index(&file.actuators, n)?),
            };
            points[p.index] = Attachment { frame, offset: p.offset };
        }

        let palm = Attachment {
            frame: match &file.palm.actuator {
                None => None,
                Some(n) => Some(name_index(&file.actuators, n)?),
            },
            offset: file.palm.offset,
        };

        if file.rest_pose.len() != JOINT_COUNT {
            return Err(Error::Config("rest_pose must list 21 points".into()));
        }

        let mut spec = Self {
            name: file.name,
            actuators,
            eval_order,
            points,
            palm,
            rest_pose: Skeleton::new([Point3::origin(); JOINT_COUNT]),
            rest_palm_center: Point3::origin(),
            link_lengths: [0.0; BONE_COUNT],
            chains: Vec::new(),
            spec_hash: hex_hash(raw),
        };

        let rest = spec.pose(&ActuatorVector::zeros());
        spec.rest_pose = rest.skeleton;
        spec.rest_palm_center = rest.palm_center;
        spec.rest_pose.validate().map_err(|e| {
            Error::Config(format!("rest pose is not a valid skeleton: {e}"))
        })?;
        for b in 0..BONE_COUNT {
            spec.link_lengths[b] = spec.rest_pose.bone(b).norm();
        }

        let stored = Skeleton::from_arrays(&file.rest_pose)?;
        for (a, b) in stored.joints.iter().zip(&spec.rest_pose.joints) {
            if (a - b).norm() > 1e-12 {
                return Err(Error::Config(
                    "stored rest_pose disagrees with forward kinematics at zero".into(),
                ));
            }
        }

        spec.chains = spec.derive_chains()?;
        Ok(spec)
    }

    /// One solve plan per finger: the actuators not shared with any other
    /// finger's root-to-tip path, each with its target point and rest
    /// direction. Shared (palm/wrist) actuators are left to the global fit.
    fn derive_chains(&self) -> Result<Vec<Vec<ChainStep>>> {
        let mut paths: Vec<Vec<usize>> = Vec::with_capacity(FINGER_COUNT);
        for &tip in &FINGERTIPS {
            let mut path = Vec::new();
            let mut frame = self.points[tip].frame;
            while let Some(f) = frame {
                path.push(f);
                frame = self.actuators[f].parent;
            }
            path.reverse();
            if path.is_empty() {
                return Err(Error::Config(format!(
                    "fingertip {tip} is not attached to any actuator"
                )));
            }
            paths.push(path);
        }

        // Longest prefix common to all five paths = the shared palm chain.
        let mut shared = 0;
        'outer: while let Some(&first) = paths[0].get(shared) {
            for p in &paths[1..] {
                if p.get(shared) != Some(&first) {
                    break 'outer;
                }
            }
            shared += 1;
        }

        let rest_origin = |idx: usize| -> Point3<f64> {
            // At zero pose every rotation is identity, so frame origins are
            // plain offset sums.
            let mut pos = Vector3::zeros();
            let mut cur = Some(idx);
            while let Some(i) = cur {
                pos += self.actuators[i].offset;
                cur = self.actuators[i].parent;
            }
            Point3::from(pos)
        };

        let mut chains = Vec::with_capacity(FINGER_COUNT);
        for finger in 0..FINGER_COUNT {
            let finger_points = [
                KNUCKLES[finger],
                KNUCKLES[finger] + 1,
                KNUCKLES[finger] + 2,
                FINGERTIPS[finger],
            ];
            let mut steps = Vec::new();
            for &act in &paths[finger][shared..] {
                let origin = rest_origin(act);
                let mut found = None;
                for &pt in &finger_points {
                    // The target must hang below this actuator.
                    let mut below = false;
                    let mut cur = self.points[pt].frame;
                    while let Some(f) = cur {
                        if f == act {
                            below = true;
                            break;
                        }
                        cur = self.actuators[f].parent;
                    }
                    if !below {
                        continue;
                    }
                    let dir = self.rest_pose.joints[pt] - origin;
                    if dir.norm() > 1e-9 {
                        found = Some((pt, dir));
                        break;
                    }
                }
                let (target_point, rest_dir) = found.ok_or_else(|| {
                    Error::Config(format!(
                        "actuator '{}' has no distal skeleton point to steer",
                        self.actuators[act].name
                    ))
                })?;
                let axis = self.actuators[act].axis;
                let planar = rest_dir - axis.into_inner() * rest_dir.dot(&axis);
                if planar.norm() < 1e-9 {
                    return Err(Error::Config(format!(
                        "actuator '{}' axis is parallel to its rest link",
                        self.actuators[act].name
                    )));
                }
                steps.push(ChainStep { actuator: act, target_point, rest_dir });
            }
            chains.push(steps);
        }
        Ok(chains)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// SHA-256 of the raw spec document, recorded in output headers.
    pub fn spec_hash(&self) -> &str {
        &self.spec_hash
    }

    pub fn rest_pose(&self) -> &Skeleton {
        &self.rest_pose
    }

    pub fn rest_palm_center(&self) -> Point3<f64> {
        self.rest_palm_center
    }

    /// Rest-pose positions of the palm point set used by the rigid fit:
    /// wrist plus the five knuckles.
    pub fn rest_palm_points(&self) -> [Point3<f64>; 6] {
        let mut out = [Point3::origin(); 6];
        out[0] = self.rest_pose.joints[WRIST];
        for (o, &k) in out[1..].iter_mut().zip(&KNUCKLES) {
            *o = self.rest_pose.joints[k];
        }
        out
    }

    /// Bone lengths of the model; constant under any actuation.
    pub fn link_lengths(&self) -> &[f64; BONE_COUNT] {
        &self.link_lengths
    }

    pub fn joint_limits(&self, joint: usize) -> (f64, f64) {
        self.actuators[joint].limits
    }

    pub(crate) fn chains(&self) -> &[Vec<ChainStep>] {
        &self.chains
    }

    pub(crate) fn actuator_axis(&self, idx: usize) -> Unit<Vector3<f64>> {
        self.actuators[idx].axis
    }

    pub(crate) fn actuator_offset(&self, idx: usize) -> Vector3<f64> {
        self.actuators[idx].offset
    }

    pub(crate) fn actuator_parent(&self, idx: usize) -> Option<usize> {
        self.actuators[idx].parent
    }

    /// Copy with every joint actuator clamped into its limits. Global pose
    /// components are unbounded.
    pub fn clamp(&self, a: &ActuatorVector) -> ActuatorVector {
        let mut out = *a;
        for (j, act) in out.joints_mut().iter_mut().zip(&self.actuators) {
            *j = j.clamp(act.limits.0, act.limits.1);
        }
        out
    }

    /// Forward kinematics. Joint values are clamped to their limits before
    /// application; the global pose is applied as-is.
    pub fn pose(&self, a: &ActuatorVector) -> PosedHand {
        let global = a.global_isometry();
        let joints = a.joints();
        let mut frames = [Isometry3::identity(); MAX_ACTUATORS];
        for &i in &self.eval_order {
            let act = &self.actuators[i];
            let parent = match act.parent {
                Some(p) => &frames[p],
                None => &global,
            };
            let q = joints[i].clamp(act.limits.0, act.limits.1);
            frames[i] = parent
                * Translation3::from(act.offset)
                * UnitQuaternion::from_axis_angle(&act.axis, q);
        }
        let place = |att: &Attachment| -> Point3<f64> {
            let frame = match att.frame {
                Some(f) => &frames[f],
                None => &global,
            };
            frame.transform_point(&Point3::from(att.offset))
        };
        let mut skeleton = [Point3::origin(); JOINT_COUNT];
        for (s, att) in skeleton.iter_mut().zip(&self.points) {
            *s = place(att);
        }
        PosedHand {
            skeleton: Skeleton::new(skeleton),
            palm_center: place(&self.palm),
        }
    }

    /// Scale a source skeleton into this model's domain using the mean
    /// bone-length ratio against the model's (pose-independent) link lengths.
    pub fn scale_into_model(&self, x: &Skeleton) -> Result<(f64, Skeleton)> {
        let mut sum = 0.0;
        for b in 0..BONE_COUNT {
            let nx = x.bone(b).norm();
            if nx == 0.0 {
                return Err(Error::DegenerateSkeleton(format!(
                    "bone {b} of the source skeleton has zero length"
                )));
            }
            sum += self.link_lengths[b] / nx;
        }
        let s = sum / BONE_COUNT as f64;
        Ok((s, x.scaled(s)))
    }
}

/// Forward kinematics as a free function.
pub fn forward_kinematics(spec: &HandModelSpec, a: &ActuatorVector) -> Skeleton {
    spec.pose(a).skeleton
}

fn topo_order(actuators: &[Actuator]) -> Result<Vec<usize>> {
    let n = actuators.len();
    let mut order = Vec::with_capacity(n);
    let mut state = vec![0u8; n]; // 0 unvisited, 1 in progress, 2 done
    fn visit(
        i: usize,
        actuators: &[Actuator],
        state: &mut [u8],
        order: &mut Vec<usize>,
    ) -> Result<()> {
        match state[i] {
            2 => return Ok(()),
            1 => {
                return Err(Error::Config(format!(
                    "actuator tree contains a cycle through '{}'",
                    actuators[i].name
                )))
            }
            _ => {}
        }
        state[i] = 1;
        if let Some(p) = actuators[i].parent {
            visit(p, actuators, state, order)?;
        }
        state[i] = 2;
        order.push(i);
        Ok(())
    }
    for i in 0..n {
        visit(i, actuators, &mut state, &mut order)?;
    }
    Ok(order)
}

fn hex_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub(crate) const DEFAULT_HAND_JSON: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/hand_default.json"));

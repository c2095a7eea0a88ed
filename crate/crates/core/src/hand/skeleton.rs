//! The 21-point hand skeleton and the geometric derivations used by both
//! energy terms: bone vectors, relative joint angles, and the inter-domain
//! scale factor.
//!
//! Point ordering convention: index 0 is the wrist, then per finger in thumb,
//! index, middle, ring, pinky order the four points `[knuckle, mid, distal,
//! tip]` occupy indices `1 + 4*finger .. 4 + 4*finger`. Bones follow the five
//! wrist→knuckle→mid→distal→tip chains, giving 20 bones; bone `i` ends at
//! point `i + 1`.

use nalgebra::{Isometry3, Point3, Vector3};
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of skeleton points.
pub const JOINT_COUNT: usize = 21;
/// Number of bones (consecutive point pairs along the finger chains).
pub const BONE_COUNT: usize = JOINT_COUNT - 1;
/// Number of relative joint angles (three interior angles per finger).
pub const ANGLE_COUNT: usize = 15;
/// Number of fingers.
pub const FINGER_COUNT: usize = 5;

/// Index of the wrist point.
pub const WRIST: usize = 0;
/// First point of each finger chain, thumb..pinky.
pub const KNUCKLES: [usize; FINGER_COUNT] = [1, 5, 9, 13, 17];
/// Fingertip indices, thumb..pinky.
pub const FINGERTIPS: [usize; FINGER_COUNT] = [4, 8, 12, 16, 20];

/// (parent point, child point) of bone `i` in chain order.
pub const fn bone_endpoints(bone: usize) -> (usize, usize) {
    let within = bone % 4;
    let child = bone + 1;
    let parent = if within == 0 { WRIST } else { child - 1 };
    (parent, child)
}

/// An observed or simulated hand pose: 21 ordered 3-D points in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Skeleton {
    pub joints: [Point3<f64>; JOINT_COUNT],
}

impl Skeleton {
    pub fn new(joints: [Point3<f64>; JOINT_COUNT]) -> Self {
        Self { joints }
    }

    pub fn from_arrays(points: &[[f64; 3]]) -> Result<Self> {
        if points.len() != JOINT_COUNT {
            return Err(Error::Validation(format!(
                "skeleton needs {JOINT_COUNT} points, got {}",
                points.len()
            )));
        }
        let mut joints = [Point3::origin(); JOINT_COUNT];
        for (j, p) in joints.iter_mut().zip(points) {
            *j = Point3::new(p[0], p[1], p[2]);
        }
        Ok(Self { joints })
    }

    pub fn to_arrays(&self) -> [[f64; 3]; JOINT_COUNT] {
        let mut out = [[0.0; 3]; JOINT_COUNT];
        for (o, j) in out.iter_mut().zip(&self.joints) {
            *o = [j.x, j.y, j.z];
        }
        out
    }

    /// All coordinates finite and every bone longer than zero.
    pub fn validate(&self) -> Result<()> {
        for (i, j) in self.joints.iter().enumerate() {
            if !(j.x.is_finite() && j.y.is_finite() && j.z.is_finite()) {
                return Err(Error::DegenerateSkeleton(format!(
                    "point {i} has non-finite coordinates"
                )));
            }
        }
        for b in 0..BONE_COUNT {
            if self.bone(b).norm() == 0.0 {
                return Err(Error::DegenerateSkeleton(format!("bone {b} has zero length")));
            }
        }
        Ok(())
    }

    /// Bone `i` as child minus parent position.
    pub fn bone(&self, bone: usize) -> Vector3<f64> {
        let (parent, child) = bone_endpoints(bone);
        self.joints[child] - self.joints[parent]
    }

    pub fn wrist(&self) -> Point3<f64> {
        self.joints[WRIST]
    }

    pub fn fingertips(&self) -> [Point3<f64>; FINGER_COUNT] {
        FINGERTIPS.map(|i| self.joints[i])
    }

    /// Hand span: the largest wrist-to-fingertip distance. Used to normalise
    /// the position energy so it is dimensionless.
    pub fn span(&self) -> f64 {
        FINGERTIPS
            .iter()
            .map(|&i| (self.joints[i] - self.joints[WRIST]).norm())
            .fold(0.0, f64::max)
    }

    /// Uniformly scaled copy (about the origin).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            joints: self.joints.map(|p| Point3::from(p.coords * s)),
        }
    }

    /// Rigidly transformed copy.
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        Self {
            joints: self.joints.map(|p| iso.transform_point(&p)),
        }
    }
}

/// The 20 bone vectors of a skeleton, in chain order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoneVectors {
    pub vectors: [Vector3<f64>; BONE_COUNT],
}

impl BoneVectors {
    pub fn norms(&self) -> [f64; BONE_COUNT] {
        self.vectors.map(|v| v.norm())
    }
}

/// The 15 interior angles between consecutive bones, radians in `[0, π]`.
/// A straight finger chain yields zero for its three angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAngles {
    pub angles: [f64; ANGLE_COUNT],
}

/// Child-minus-parent vectors for all 20 bones.
pub fn bone_vectors(s: &Skeleton) -> BoneVectors {
    let mut vectors = [Vector3::zeros(); BONE_COUNT];
    for (b, v) in vectors.iter_mut().enumerate() {
        *v = s.bone(b);
    }
    BoneVectors { vectors }
}

/// Relative joint angles: per finger the three angles between consecutive
/// bone vectors. Errors on zero-length bones.
pub fn joint_angles(s: &Skeleton) -> Result<JointAngles> {
    let mut angles = [0.0; ANGLE_COUNT];
    for finger in 0..FINGER_COUNT {
        for step in 0..3 {
            let a = s.bone(4 * finger + step);
            let b = s.bone(4 * finger + step + 1);
            let na = a.norm();
            let nb = b.norm();
            if na == 0.0 || nb == 0.0 {
                return Err(Error::DegenerateSkeleton(format!(
                    "zero-length bone in finger {finger}"
                )));
            }
            // atan2 keeps full precision near 0 and π, unlike acos.
            angles[3 * finger + step] = a.cross(&b).norm().atan2(a.dot(&b));
        }
    }
    Ok(JointAngles { angles })
}

/// Inter-domain scale: the mean ratio of bone lengths `‖J_i(y)‖ / ‖J_i(x)‖`.
/// Multiplying `x` by the result expresses it in the `y` domain.
pub fn scale_factor(x: &Skeleton, y: &Skeleton) -> Result<f64> {
    let mut sum = 0.0;
    for b in 0..BONE_COUNT {
        let nx = x.bone(b).norm();
        if nx == 0.0 {
            return Err(Error::DegenerateSkeleton(format!(
                "bone {b} of the source skeleton has zero length"
            )));
        }
        sum += y.bone(b).norm() / nx;
    }
    Ok(sum / BONE_COUNT as f64)
}

impl Serialize for Skeleton {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(JOINT_COUNT))?;
        for j in &self.joints {
            seq.serialize_element(&[j.x, j.y, j.z])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Skeleton {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Skeleton;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "an array of {JOINT_COUNT} [x, y, z] points")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Skeleton, A::Error> {
                let mut joints = [Point3::origin(); JOINT_COUNT];
                for (i, j) in joints.iter_mut().enumerate() {
                    let p: [f64; 3] = seq
                        .next_element()?
                        .ok_or_else(|| serde::de::Error::invalid_length(i, &self))?;
                    *j = Point3::new(p[0], p[1], p[2]);
                }
                if seq.next_element::<[f64; 3]>()?.is_some() {
                    return Err(serde::de::Error::custom("too many skeleton points"));
                }
                Ok(Skeleton { joints })
            }
        }
        deserializer.deserialize_seq(V)
    }
}

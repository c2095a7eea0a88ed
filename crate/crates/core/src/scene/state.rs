//! Scene state and the quasi-static grasp proxy.
//!
//! The proxy replaces a dynamics engine at desk scale: an object becomes
//! held when enough contact points touch it from opposing sides, a held
//! object is welded to the palm's per-step translation, and a released
//! object falls under gravity until it rests on the table.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::shape::ObjectShape;
use crate::error::{Error, Result};

/// Gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.81;

/// Contact points scored by the task energy: palm centre plus five fingertips.
pub const CONTACT_POINT_COUNT: usize = 6;

/// Parameters of the grasp rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspParams {
    /// A contact point within this distance of the surface counts as touching.
    pub contact_epsilon: f64,
    /// Two touch directions must subtend more than this angle for the grasp
    /// to count as opposed rather than single-sided.
    pub opposition_angle_deg: f64,
}

impl Default for GraspParams {
    fn default() -> Self {
        Self { contact_epsilon: 0.005, opposition_angle_deg: 90.0 }
    }
}

/// One task contact point: its distance to the object, or the miss
/// substitute `miss_cost * d_max` when it is too far to interact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEntry {
    pub distance: f64,
    pub missing: bool,
}

/// Distances of the six task points (palm first, then thumb..pinky tips),
/// carrying the constants they were built with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactSet {
    pub entries: [ContactEntry; CONTACT_POINT_COUNT],
    pub d_max: f64,
    pub miss_cost: f64,
}

impl ContactSet {
    /// The substitute distance assigned to missing points.
    pub fn miss_distance(&self) -> f64 {
        self.miss_cost * self.d_max
    }

    pub fn non_missing_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.missing).count()
    }

    pub fn touching_count(&self, epsilon: f64) -> usize {
        self.entries.iter().filter(|e| e.distance <= epsilon).count()
    }
}

/// The manipulated object (a rigid union of primitives), the table, and the
/// hold status. A value type: stepping returns a new state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    /// Primitives of the object, posed relative to the union frame.
    pub shapes: Vec<ObjectShape>,
    #[serde(with = "crate::wire::vec3")]
    pub object_position: Vector3<f64>,
    #[serde(with = "crate::wire::unit_quat")]
    pub object_orientation: UnitQuaternion<f64>,
    #[serde(with = "crate::wire::vec3")]
    pub object_velocity: Vector3<f64>,
    pub table_height: f64,
    pub held: bool,
    /// Object centre height at scene creation; lift metrics measure from here.
    pub initial_object_height: f64,
    pub grasp: GraspParams,
    /// Palm position at the previous step; anchor for the weld while held.
    #[serde(with = "option_vec3", default)]
    last_palm: Option<Vector3<f64>>,
}

mod option_vec3 {
    use nalgebra::Vector3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        v: &Option<Vector3<f64>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.map(|v| [v.x, v.y, v.z]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vector3<f64>>, D::Error> {
        let a = Option::<[f64; 3]>::deserialize(d)?;
        Ok(a.map(|a| Vector3::new(a[0], a[1], a[2])))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SceneObjectFile {
    #[serde(with = "crate::wire::vec3")]
    position: Vector3<f64>,
    #[serde(with = "crate::wire::unit_quat", default = "UnitQuaternion::identity")]
    orientation: UnitQuaternion<f64>,
    shapes: Vec<ObjectShape>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SceneFile {
    table_height: f64,
    object: SceneObjectFile,
    #[serde(default)]
    grasp: GraspParams,
}

impl SceneState {
    /// Assemble a free (not yet held) scene at rest. The initial object
    /// height baseline is taken from `position.z`.
    pub fn new(
        shapes: Vec<ObjectShape>,
        position: Vector3<f64>,
        orientation: UnitQuaternion<f64>,
        table_height: f64,
        grasp: GraspParams,
    ) -> Result<Self> {
        let state = Self {
            shapes,
            object_position: position,
            object_orientation: orientation,
            object_velocity: Vector3::zeros(),
            table_height,
            held: false,
            initial_object_height: position.z,
            grasp,
            last_palm: None,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SceneFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("scene: {e}")))?;
        let state = Self {
            shapes: file.object.shapes,
            object_position: file.object.position,
            object_orientation: file.object.orientation,
            object_velocity: Vector3::zeros(),
            table_height: file.table_height,
            held: false,
            initial_object_height: file.object.position.z,
            grasp: file.grasp,
            last_palm: None,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("scene {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The default shipped scene: a 0.06 m cube resting on a table at z = 0.
    pub fn default_scene() -> Self {
        Self::from_json(DEFAULT_SCENE_JSON).expect("embedded scene is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.shapes.is_empty() {
            return Err(Error::Validation("scene object has no shapes".into()));
        }
        for s in &self.shapes {
            s.validate()?;
        }
        if self.support_bottom() < self.table_height - 1e-6 {
            return Err(Error::Validation("object starts below the table plane".into()));
        }
        Ok(())
    }

    pub fn object_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.object_position), self.object_orientation)
    }

    pub fn object_center(&self) -> Point3<f64> {
        Point3::from(self.object_position)
    }

    /// Minimum unsigned distance from `p` to any primitive of the object.
    pub fn min_distance(&self, p: &Point3<f64>) -> f64 {
        let iso = self.object_isometry();
        self.shapes
            .iter()
            .map(|s| s.placed(&iso).distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Lowest world z of the object union.
    pub fn support_bottom(&self) -> f64 {
        let iso = self.object_isometry();
        self.shapes
            .iter()
            .map(|s| s.placed(&iso).bottom_z())
            .fold(f64::INFINITY, f64::min)
    }

    /// Highest world z of the object union.
    pub fn support_top(&self) -> f64 {
        let iso = self.object_isometry();
        self.shapes
            .iter()
            .map(|s| s.placed(&iso).top_z())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn min_distance_at(&self, p: &Point3<f64>, position: &Vector3<f64>) -> f64 {
        let iso = Isometry3::from_parts(Translation3::from(*position), self.object_orientation);
        self.shapes
            .iter()
            .map(|s| s.placed(&iso).distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Grasp rule at a hypothetical object position: at least two of the six
    /// points touch, and some touching pair opposes across the centre.
    fn grasp_rule(
        &self,
        points: &[Point3<f64>; CONTACT_POINT_COUNT],
        position: &Vector3<f64>,
    ) -> bool {
        let eps = self.grasp.contact_epsilon;
        let mut touching: Vec<Point3<f64>> = Vec::with_capacity(CONTACT_POINT_COUNT);
        for p in points {
            if self.min_distance_at(p, position) <= eps {
                touching.push(*p);
            }
        }
        if touching.len() < 2 {
            return false;
        }
        let center = Point3::from(*position);
        let min_angle = self.grasp.opposition_angle_deg.to_radians();
        let dirs: Vec<Vector3<f64>> = touching
            .iter()
            .filter_map(|p| {
                let d = center - p;
                (d.norm() > 1e-9).then(|| d.normalize())
            })
            .collect();
        for (i, a) in dirs.iter().enumerate() {
            for b in &dirs[i + 1..] {
                if a.angle(b) > min_angle {
                    return true;
                }
            }
        }
        false
    }
}

/// Per-point minimum distance over the object's primitives, with the miss
/// substitution: points farther than `d_max` from every primitive store
/// `miss_cost * d_max` and are flagged missing.
pub fn contact_distances(
    palm: &Point3<f64>,
    fingertips: &[Point3<f64>; 5],
    scene: &SceneState,
    d_max: f64,
    miss_cost: f64,
) -> Result<ContactSet> {
    if d_max <= 0.0 {
        return Err(Error::Config("d_max must be positive".into()));
    }
    if miss_cost < 1.0 {
        return Err(Error::Config("miss cost must be at least 1".into()));
    }
    let miss = miss_cost * d_max;
    let mut entries = [ContactEntry { distance: 0.0, missing: false }; CONTACT_POINT_COUNT];
    let points = [
        *palm,
        fingertips[0],
        fingertips[1],
        fingertips[2],
        fingertips[3],
        fingertips[4],
    ];
    for (entry, p) in entries.iter_mut().zip(&points) {
        let d = scene.min_distance(p);
        if d < d_max {
            *entry = ContactEntry { distance: d, missing: false };
        } else {
            *entry = ContactEntry { distance: miss, missing: true };
        }
    }
    Ok(ContactSet { entries, d_max, miss_cost })
}

/// Advance the scene by `dt` given the hand's current contact points.
///
/// While held the object is welded to the palm's per-step translation and
/// released the moment the grasp rule fails in the carried frame; a free
/// object falls under gravity and lands inelastically on the table.
pub fn step_scene(
    scene: &SceneState,
    palm: &Point3<f64>,
    fingertips: &[Point3<f64>; 5],
    dt: f64,
) -> Result<SceneState> {
    if dt <= 0.0 {
        return Err(Error::Config("dt must be positive".into()));
    }
    let points = [
        *palm,
        fingertips[0],
        fingertips[1],
        fingertips[2],
        fingertips[3],
        fingertips[4],
    ];
    let mut next = scene.clone();
    let old_pos = scene.object_position;

    let palm_delta = match scene.last_palm {
        Some(prev) if scene.held => palm.coords - prev,
        _ => Vector3::zeros(),
    };
    let candidate = old_pos + palm_delta;

    if scene.grasp_rule(&points, &candidate) {
        next.held = true;
        next.object_position = candidate;
    } else {
        next.held = false;
        // Semi-implicit Euler free fall from the current position.
        let mut vel = scene.object_velocity;
        vel.z -= GRAVITY * dt;
        next.object_position = old_pos + vel * dt;
    }

    // The table is impenetrable; landing kills the velocity.
    let bottom = next.support_bottom();
    let mut landed = false;
    if bottom < next.table_height {
        next.object_position.z += next.table_height - bottom;
        landed = true;
    }
    next.object_velocity = if landed && !next.held {
        Vector3::zeros()
    } else {
        (next.object_position - old_pos) / dt
    };
    next.last_palm = Some(palm.coords);
    Ok(next)
}

pub(crate) const DEFAULT_SCENE_JSON: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/scene_cube.json"));

//! Analytic primitives with unsigned point-to-surface distance queries.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primitive geometry, dimensions in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere {
        radius: f64,
    },
    Box {
        #[serde(with = "crate::wire::vec3")]
        half_extents: Vector3<f64>,
    },
    Cylinder {
        radius: f64,
        half_height: f64,
    },
}

/// A primitive with its pose. Objects are rigid unions of these; each
/// primitive's pose is local to the union frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectShape {
    #[serde(flatten)]
    pub kind: ShapeKind,
    #[serde(with = "crate::wire::vec3", default = "Vector3::zeros")]
    pub position: Vector3<f64>,
    #[serde(with = "crate::wire::unit_quat", default = "UnitQuaternion::identity")]
    pub orientation: UnitQuaternion<f64>,
}

impl ObjectShape {
    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            ShapeKind::Sphere { radius } => radius > 0.0,
            ShapeKind::Box { half_extents } => half_extents.iter().all(|&h| h > 0.0),
            ShapeKind::Cylinder { radius, half_height } => radius > 0.0 && half_height > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation("shape dimensions must be positive".into()))
        }
    }

    pub fn pose(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }

    /// Unsigned distance from `p` to the shape surface; zero inside.
    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        let local = self.pose().inverse_transform_point(p);
        match self.kind {
            ShapeKind::Sphere { radius } => (local.coords.norm() - radius).max(0.0),
            ShapeKind::Box { half_extents } => {
                let q = local.coords.abs() - half_extents;
                Vector3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm()
            }
            ShapeKind::Cylinder { radius, half_height } => {
                let radial = (local.x * local.x + local.y * local.y).sqrt() - radius;
                let axial = local.z.abs() - half_height;
                (radial.max(0.0).powi(2) + axial.max(0.0).powi(2)).sqrt()
            }
        }
    }

    /// Lowest world-space z reached by the shape (its support point along -z).
    pub fn bottom_z(&self) -> f64 {
        let rot = self.orientation.to_rotation_matrix();
        match self.kind {
            ShapeKind::Sphere { radius } => self.position.z - radius,
            ShapeKind::Box { half_extents } => {
                // Support of an oriented box along -z: sum of |axis . z| extents.
                let mut drop = 0.0;
                for i in 0..3 {
                    drop += rot.matrix().column(i).z.abs() * half_extents[i];
                }
                self.position.z - drop
            }
            ShapeKind::Cylinder { radius, half_height } => {
                let az = rot.matrix().column(2).z;
                let planar = (1.0 - az * az).max(0.0).sqrt();
                self.position.z - (half_height * az.abs() + radius * planar)
            }
        }
    }

    /// Highest world-space z reached by the shape.
    pub fn top_z(&self) -> f64 {
        let rot = self.orientation.to_rotation_matrix();
        match self.kind {
            ShapeKind::Sphere { radius } => self.position.z + radius,
            ShapeKind::Box { half_extents } => {
                let mut rise = 0.0;
                for i in 0..3 {
                    rise += rot.matrix().column(i).z.abs() * half_extents[i];
                }
                self.position.z + rise
            }
            ShapeKind::Cylinder { radius, half_height } => {
                let az = rot.matrix().column(2).z;
                let planar = (1.0 - az * az).max(0.0).sqrt();
                self.position.z + (half_height * az.abs() + radius * planar)
            }
        }
    }

    /// Copy of the shape placed by an enclosing union pose.
    pub fn placed(&self, union: &Isometry3<f64>) -> ObjectShape {
        let composed = union * self.pose();
        ObjectShape {
            kind: self.kind,
            position: composed.translation.vector,
            orientation: composed.rotation,
        }
    }
}

/// Unsigned point-to-surface distance; zero when the point is inside.
pub fn point_object_distance(p: &Point3<f64>, shape: &ObjectShape) -> f64 {
    shape.distance_to_point(p)
}

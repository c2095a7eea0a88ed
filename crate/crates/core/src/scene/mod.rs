//! Analytic object primitives, contact-distance queries, and the
//! quasi-static grasp proxy used in place of a full physics engine.

mod shape;
mod state;

pub use shape::{point_object_distance, ObjectShape, ShapeKind};
pub use state::{
    contact_distances, step_scene, ContactEntry, ContactSet, GraspParams, SceneState,
    CONTACT_POINT_COUNT, GRAVITY,
};

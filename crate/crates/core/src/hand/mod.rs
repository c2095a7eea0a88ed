//! Hand skeleton conventions, the actuated hand model, and forward kinematics.

mod model;
mod skeleton;

pub use model::{
    forward_kinematics, ActuatorVector, HandModelSpec, PosedHand, ACTION_DIM, GLOBAL_DIM,
    JOINT_ACTUATOR_COUNT,
};
pub use skeleton::{
    bone_endpoints, bone_vectors, joint_angles, scale_factor, BoneVectors, JointAngles, Skeleton,
    ANGLE_COUNT, BONE_COUNT, FINGERTIPS, FINGER_COUNT, JOINT_COUNT, KNUCKLES, WRIST,
};

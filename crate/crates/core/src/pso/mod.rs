//! Particle swarm optimisation over the 29-D action space, and the hybrid
//! variant seeded by inverse kinematics with a task objective.

mod hybrid;
mod swarm;

pub use hybrid::{hybrid_pso, task_refine};
pub use swarm::{action_ranges, Particle, Swarm, SwarmConfig};

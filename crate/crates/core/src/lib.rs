//! Hand motion retargeting toolkit.
//!
//! Maps noisy 21-point hand skeletons onto a 29-DoF actuated hand model and
//! optimises the resulting pose for object grasping. The pipeline is:
//!
//! 1. [`hand`] — skeleton conventions, the actuated hand model and forward
//!    kinematics, plus the geometric derivations (bone vectors, relative
//!    angles, inter-domain scaling) the energy terms consume.
//! 2. [`ik`] — a closed-form inverse-kinematics baseline that both serves as
//!    the comparison condition and seeds the swarm optimiser.
//! 3. [`pso`] — particle swarm optimisation over the 29-D action space and
//!    the hybrid variant that refines the IK pose under a task objective.
//! 4. [`scene`] — analytic object primitives, distance queries, and a
//!    quasi-static grasp proxy for desk-scale pick-and-lift evaluation.
//! 5. [`energy`] — the fitness stack combining pose reproduction and
//!    contact-seeking task terms.
//! 6. [`eval`] — per-trajectory grasp metrics (sequence of interest, lifting
//!    ratio, success classification).
//! 7. [`demo`] — state-action demonstration recording and dataset export.
//! 8. [`pipeline`] / [`synth`] / [`report`] — orchestration: run configs,
//!    synthetic input generation, and metric aggregation.

pub mod demo;
pub mod energy;
pub mod error;
pub mod eval;
pub mod hand;
pub mod ik;
pub mod pipeline;
pub mod pso;
pub mod report;
pub mod scene;
pub mod synth;
pub(crate) mod wire;

pub use error::{Error, Result};

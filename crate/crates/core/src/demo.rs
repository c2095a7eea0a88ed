//! State-action demonstration recording.
//!
//! Each frame yields a 57-component state — relative hand-object position
//! and velocity, the 23 joint angles and their finite-differenced
//! velocities, and the five fingertip contact distances — paired with the
//! 29-component action that produced it. Only successful trajectories may
//! be exported; the JSONL dataset round-trips losslessly.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::energy::EnergyWeights;
use crate::error::{Error, Result};
use crate::eval::FrameRecord;
use crate::hand::{ActuatorVector, JOINT_ACTUATOR_COUNT};

/// Length of the flattened state vector: 3 + 3 + 23 + 23 + 5.
pub const STATE_DIM: usize = 57;

/// One observation of the hand-object system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    /// Palm centre minus object centre (m).
    pub rel_pos: [f64; 3],
    /// Palm velocity minus object velocity (m/s); zero at the first frame.
    pub rel_vel: [f64; 3],
    /// Joint actuator angles as applied (rad).
    pub joint_angles: [f64; JOINT_ACTUATOR_COUNT],
    /// Backward finite differences of the joint angles (rad/s); zero at the
    /// first frame.
    pub joint_vels: [f64; JOINT_ACTUATOR_COUNT],
    /// Raw fingertip-to-object distances, clamped at the miss substitute (m).
    pub contact_distances: [f64; 5],
}

impl StateVector {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(STATE_DIM);
        out.extend_from_slice(&self.rel_pos);
        out.extend_from_slice(&self.rel_vel);
        out.extend_from_slice(&self.joint_angles);
        out.extend_from_slice(&self.joint_vels);
        out.extend_from_slice(&self.contact_distances);
        out
    }

    pub fn from_flat(values: &[f64]) -> Result<Self> {
        if values.len() != STATE_DIM {
            return Err(Error::Validation(format!(
                "state needs {STATE_DIM} components, got {}",
                values.len()
            )));
        }
        let mut s = StateVector {
            rel_pos: [0.0; 3],
            rel_vel: [0.0; 3],
            joint_angles: [0.0; JOINT_ACTUATOR_COUNT],
            joint_vels: [0.0; JOINT_ACTUATOR_COUNT],
            contact_distances: [0.0; 5],
        };
        s.rel_pos.copy_from_slice(&values[0..3]);
        s.rel_vel.copy_from_slice(&values[3..6]);
        s.joint_angles.copy_from_slice(&values[6..29]);
        s.joint_vels.copy_from_slice(&values[29..52]);
        s.contact_distances.copy_from_slice(&values[52..57]);
        Ok(s)
    }
}

/// One state-action pair of a demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoFrame {
    pub state: StateVector,
    pub action: ActuatorVector,
    pub timestamp: f64,
}

/// A recorded demonstration with its evaluator verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoTrajectory {
    pub id: String,
    pub success: bool,
    pub frames: Vec<DemoFrame>,
}

/// Build the state for one frame. Velocities are backward differences
/// against the previous frame and zero when there is none.
pub fn extract_state(
    frame: &FrameRecord,
    prev: Option<&FrameRecord>,
    dt: f64,
    weights: &EnergyWeights,
) -> Result<StateVector> {
    if dt <= 0.0 {
        return Err(Error::Config("dt must be positive".into()));
    }
    let object = frame.scene.object_center();
    let rel = frame.palm_center - object;

    let mut rel_vel = [0.0; 3];
    let mut joint_vels = [0.0; JOINT_ACTUATOR_COUNT];
    if let Some(prev) = prev {
        let palm_vel = (frame.palm_center - prev.palm_center) / dt;
        let object_vel = (frame.scene.object_center() - prev.scene.object_center()) / dt;
        let v = palm_vel - object_vel;
        rel_vel = [v.x, v.y, v.z];
        for (out, (cur, before)) in joint_vels
            .iter_mut()
            .zip(frame.actuators.joints().iter().zip(prev.actuators.joints()))
        {
            *out = (cur - before) / dt;
        }
    }

    let mut joint_angles = [0.0; JOINT_ACTUATOR_COUNT];
    joint_angles.copy_from_slice(frame.actuators.joints());

    let clamp = weights.miss_distance();
    let mut contact_distances = [0.0; 5];
    for (out, tip) in contact_distances.iter_mut().zip(&frame.model.fingertips()) {
        *out = frame.scene.min_distance(tip).min(clamp);
    }

    Ok(StateVector {
        rel_pos: [rel.x, rel.y, rel.z],
        rel_vel,
        joint_angles,
        joint_vels,
        contact_distances,
    })
}

/// Header carried by every demo dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoHeader {
    pub spec_hash: String,
    pub config: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct DemoHeaderLine {
    kind: String,
    #[serde(flatten)]
    header: DemoHeader,
}

#[derive(Serialize, Deserialize)]
struct DemoFrameLine {
    traj_id: String,
    t: f64,
    state: Vec<f64>,
    action: ActuatorVector,
}

/// Export successful demonstrations as JSONL: a header line, then one
/// state-action frame per line. Including a non-successful trajectory is a
/// validation error.
pub fn export_demos(
    trajectories: &[DemoTrajectory],
    path: &Path,
    header: &DemoHeader,
) -> Result<()> {
    for t in trajectories {
        if !t.success {
            return Err(Error::Validation(format!(
                "trajectory '{}' is not a successful demonstration",
                t.id
            )));
        }
        for f in &t.frames {
            if !f.action.is_finite() || f.state.flatten().iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "trajectory '{}' contains non-finite values",
                    t.id
                )));
            }
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let line = DemoHeaderLine { kind: "header".into(), header: header.clone() };
    serde_json::to_writer(&mut out, &line)?;
    out.write_all(b"\n")?;
    for t in trajectories {
        for f in &t.frames {
            let line = DemoFrameLine {
                traj_id: t.id.clone(),
                t: f.timestamp,
                state: f.state.flatten(),
                action: f.action,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Import a demo dataset, validating state and action lengths. Trajectories
/// come back in file order with frames grouped by id.
pub fn import_demos(path: &Path) -> Result<(DemoHeader, Vec<DemoTrajectory>)> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Validation(format!("{}: empty demo file", path.display())))??;
    let header: DemoHeaderLine = serde_json::from_str(&header_line)
        .map_err(|e| Error::Validation(format!("{}: bad header: {e}", path.display())))?;
    if header.kind != "header" {
        return Err(Error::Validation(format!("{}: missing header line", path.display())));
    }

    let mut trajectories: Vec<DemoTrajectory> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: DemoFrameLine = serde_json::from_str(&line).map_err(|e| {
            Error::Validation(format!("{}: frame line {}: {e}", path.display(), n + 2))
        })?;
        let state = StateVector::from_flat(&parsed.state)?;
        let frame = DemoFrame { state, action: parsed.action, timestamp: parsed.t };
        match trajectories.last_mut() {
            Some(t) if t.id == parsed.traj_id => t.frames.push(frame),
            _ => trajectories.push(DemoTrajectory {
                id: parsed.traj_id,
                success: true,
                frames: vec![frame],
            }),
        }
    }
    Ok((header.header, trajectories))
}

//! Per-trajectory grasp metrics: sequence-of-interest detection, per-frame
//! lifting labels, the lifting ratio, and trajectory success classification.

use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::hand::{ActuatorVector, Skeleton};
use crate::scene::{ContactSet, SceneState};

/// Margin above the table before a frame can count as lifting; rejects
/// contact-resolution jitter around the resting pose.
pub const LIFT_MARGIN: f64 = 0.005;
/// Palm-to-object-centre distance bound of the lifting test (m).
pub const PALM_DISTANCE_LIMIT: f64 = 0.2;
/// Peak lift (above the initial height) that marks a trajectory successful
/// even if the object is dropped later (m).
pub const LIFT_SUCCESS_HEIGHT: f64 = 0.17;

/// Everything recorded about one processed frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub timestamp: f64,
    /// Input skeleton in the source domain.
    pub input: Skeleton,
    /// Actuators applied this frame (after clamping).
    pub actuators: ActuatorVector,
    /// Skeleton realised by the model under those actuators.
    pub model: Skeleton,
    #[serde(with = "crate::wire::point3")]
    pub palm_center: Point3<f64>,
    /// Contact distances against the post-step scene.
    pub contacts: ContactSet,
    /// Scene state after stepping this frame.
    pub scene: SceneState,
}

/// Metrics of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    /// First frame where at least two task points touch the object.
    pub soi_start: Option<usize>,
    /// Lifting frames divided by frames from the sequence of interest on.
    pub lifting_ratio: f64,
    pub success: bool,
    /// Peak object-centre height above its initial height (m).
    pub max_lift_height: f64,
}

/// First frame index at which at least two of the six contact points are
/// within the scene's touch epsilon; `None` if that never happens.
pub fn sequence_of_interest(frames: &[FrameRecord]) -> Option<usize> {
    frames
        .iter()
        .position(|f| f.contacts.touching_count(f.scene.grasp.contact_epsilon) >= 2)
}

/// A frame counts as lifting when (a) the object is above the table by more
/// than the margin, (b) the object centre is within 0.2 m of the palm
/// centre, and (c) at least one contact point is close enough to interact.
pub fn is_lifting_frame(frame: &FrameRecord, z_table: f64, _z0: f64) -> bool {
    let above = frame.scene.support_bottom() > z_table + LIFT_MARGIN;
    let near_palm =
        (frame.scene.object_center() - frame.palm_center).norm() < PALM_DISTANCE_LIMIT;
    let in_contact = frame.contacts.non_missing_count() >= 1;
    above && near_palm && in_contact
}

/// Fraction of frames from the sequence of interest onward that are lifting
/// frames; zero when the sequence of interest never starts.
pub fn lifting_ratio(frames: &[FrameRecord]) -> f64 {
    let Some(start) = sequence_of_interest(frames) else {
        return 0.0;
    };
    let tail = &frames[start..];
    let lifting = tail
        .iter()
        .filter(|f| is_lifting_frame(f, f.scene.table_height, f.scene.initial_object_height))
        .count();
    lifting as f64 / tail.len() as f64
}

/// Peak object-centre height above the initial height over the trajectory.
pub fn max_lift_height(frames: &[FrameRecord]) -> f64 {
    frames
        .iter()
        .map(|f| f.scene.object_center().z - f.scene.initial_object_height)
        .fold(0.0, f64::max)
}

/// A trajectory succeeds when the object is being lifted in the final frame
/// or its peak lift exceeded the success height at any point.
pub fn is_success(frames: &[FrameRecord]) -> bool {
    let Some(last) = frames.last() else {
        return false;
    };
    is_lifting_frame(last, last.scene.table_height, last.scene.initial_object_height)
        || max_lift_height(frames) > LIFT_SUCCESS_HEIGHT
}

/// All metrics of one trajectory.
pub fn evaluate_trajectory(frames: &[FrameRecord]) -> TrajectoryMetrics {
    TrajectoryMetrics {
        soi_start: sequence_of_interest(frames),
        lifting_ratio: lifting_ratio(frames),
        success: is_success(frames),
        max_lift_height: max_lift_height(frames),
    }
}

/// Header of a records file: enough run metadata for reports to label rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub mode: String,
    pub task_weight: f64,
    pub swarm_size: usize,
    pub iterations: usize,
    pub seed: u64,
    pub spec_hash: String,
    pub frames_per_second: f64,
}

#[derive(Serialize, Deserialize)]
struct RecordsHeader {
    kind: String,
    meta: RunMeta,
}

/// Write a records file: a header line followed by one frame per line.
pub fn write_records(path: &Path, meta: &RunMeta, frames: &[FrameRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = RecordsHeader { kind: "header".into(), meta: meta.clone() };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for f in frames {
        serde_json::to_writer(&mut out, f)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a records file written by [`write_records`].
pub fn read_records(path: &Path) -> Result<(RunMeta, Vec<FrameRecord>)> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Validation(format!("{}: empty records file", path.display())))??;
    let header: RecordsHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::Validation(format!("{}: bad header: {e}", path.display())))?;
    if header.kind != "header" {
        return Err(Error::Validation(format!("{}: missing header line", path.display())));
    }
    let mut frames = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: FrameRecord = serde_json::from_str(&line).map_err(|e| {
            Error::Validation(format!("{}: frame line {}: {e}", path.display(), n + 2))
        })?;
        frames.push(frame);
    }
    Ok((header.meta, frames))
}

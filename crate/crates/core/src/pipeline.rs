//! Run orchestration: configuration files, input trajectories, and the
//! per-frame retarget-apply-step loop that produces frame records.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::demo::{extract_state, DemoFrame, DemoTrajectory};
use crate::energy::EnergyWeights;
use crate::error::{Error, Result};
use crate::eval::{evaluate_trajectory, FrameRecord, RunMeta};
use crate::hand::{ActuatorVector, HandModelSpec, Skeleton};
use crate::ik::{ik_retarget, IkConfig};
use crate::pso::{hybrid_pso, task_refine, SwarmConfig};
use crate::scene::{contact_distances, step_scene, SceneState};

/// How each frame is retargeted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RetargetMode {
    /// Inverse kinematics only.
    #[serde(rename = "ik")]
    Ik,
    /// IK-seeded swarm optimisation per input frame.
    #[serde(rename = "hybrid")]
    Hybrid,
    /// Hybrid plus task-only micro-corrections at a multiple of the input rate.
    #[serde(rename = "hybrid+refine")]
    HybridRefine,
}

impl RetargetMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ik" => Ok(Self::Ik),
            "hybrid" => Ok(Self::Hybrid),
            "hybrid+refine" => Ok(Self::HybridRefine),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected ik, hybrid, or hybrid+refine)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ik => "ik",
            Self::Hybrid => "hybrid",
            Self::HybridRefine => "hybrid+refine",
        }
    }
}

fn default_fps() -> f64 {
    60.0
}

fn default_refine_multiplier() -> u32 {
    2
}

/// A full run configuration. Omitted `hand_spec`/`scene` paths fall back to
/// the built-in defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub hand_spec: Option<PathBuf>,
    #[serde(default)]
    pub scene: Option<PathBuf>,
    #[serde(default)]
    pub weights: EnergyWeights,
    #[serde(default)]
    pub swarm: SwarmConfig,
    #[serde(default)]
    pub ik: IkConfig,
    pub mode: RetargetMode,
    #[serde(default = "default_fps")]
    pub frames_per_second: f64,
    /// Actuation updates per input frame in `hybrid+refine` mode; the first
    /// is the hybrid solve, the rest are task-only refinements.
    #[serde(default = "default_refine_multiplier")]
    pub refine_rate_multiplier: u32,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hand_spec: None,
            scene: None,
            weights: EnergyWeights::default(),
            swarm: SwarmConfig::default(),
            ik: IkConfig::default(),
            mode: RetargetMode::Hybrid,
            frames_per_second: default_fps(),
            refine_rate_multiplier: default_refine_multiplier(),
            rng_seed: 0,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validated()
    }

    /// Validate and normalise (weight mixes sum to one).
    pub fn validated(mut self) -> Result<Self> {
        if self.frames_per_second <= 0.0 {
            return Err(Error::Config("frame rate must be positive".into()));
        }
        if self.refine_rate_multiplier < 1 {
            return Err(Error::Config("refine rate multiplier must be at least 1".into()));
        }
        self.weights = self.weights.normalized()?;
        self.swarm.validate()?;
        self.ik.validate()?;
        Ok(self)
    }

    /// Load the referenced hand spec, or the built-in default.
    pub fn load_hand_spec(&self) -> Result<HandModelSpec> {
        match &self.hand_spec {
            Some(p) => HandModelSpec::load(p),
            None => Ok(HandModelSpec::default_spec()),
        }
    }

    /// Load the referenced scene, or the built-in default.
    pub fn load_scene(&self) -> Result<SceneState> {
        match &self.scene {
            Some(p) => SceneState::load(p),
            None => Ok(SceneState::default_scene()),
        }
    }

    pub fn run_meta(&self, spec: &HandModelSpec) -> RunMeta {
        RunMeta {
            mode: self.mode.as_str().into(),
            task_weight: self.weights.task_weight,
            swarm_size: self.swarm.swarm_size,
            iterations: self.swarm.iterations,
            seed: self.rng_seed,
            spec_hash: spec.spec_hash().into(),
            frames_per_second: self.frames_per_second,
        }
    }
}

/// One input frame: a timestamp and the observed skeleton.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputFrame {
    pub t: f64,
    pub joints: Skeleton,
}

/// A source-domain skeleton stream, typically loaded from JSONL.
#[derive(Debug, Clone)]
pub struct InputTrajectory {
    pub id: String,
    pub frames: Vec<InputFrame>,
}

impl InputTrajectory {
    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::Validation(format!("trajectory '{}' has no frames", self.id)));
        }
        for pair in self.frames.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::Validation(format!(
                    "trajectory '{}' timestamps are not strictly increasing",
                    self.id
                )));
            }
        }
        Ok(())
    }

    /// Read a trajectory from JSONL, one `{t, joints}` object per line. The
    /// id is the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trajectory".into());
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut frames = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let frame: InputFrame = serde_json::from_str(&line).map_err(|e| {
                Error::Validation(format!("{}: line {}: {e}", path.display(), n + 1))
            })?;
            frames.push(frame);
        }
        let traj = Self { id, frames };
        traj.validate()?;
        Ok(traj)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for f in &self.frames {
            serde_json::to_writer(&mut out, f)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Derive a stream seed from the base seed and a label, so every
/// trajectory/frame combination gets a decorrelated but reproducible
/// generator regardless of processing order.
pub(crate) fn mix_seed(base: u64, label: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[0..8].try_into().expect("digest is long enough"))
}

/// Run one trajectory through the configured retargeting mode, stepping the
/// scene per frame (or per sub-step in refine mode) and recording results.
///
/// Per-frame failures abort the trajectory with a diagnostic naming the
/// frame. Contacts in each record are measured against the post-step scene.
pub fn run_retarget(
    cfg: &RunConfig,
    spec: &HandModelSpec,
    initial_scene: &SceneState,
    trajectory: &InputTrajectory,
) -> Result<Vec<FrameRecord>> {
    trajectory.validate()?;
    let dt = 1.0 / cfg.frames_per_second;
    let mut scene = initial_scene.clone();
    let mut prev: Option<ActuatorVector> = None;
    let mut records = Vec::with_capacity(trajectory.frames.len());

    for (i, frame) in trajectory.frames.iter().enumerate() {
        let frame_err = |e: Error| {
            Error::Validation(format!("trajectory '{}' frame {i}: {e}", trajectory.id))
        };
        let x = frame.joints;
        x.validate().map_err(frame_err)?;

        let action = match cfg.mode {
            RetargetMode::Ik => {
                let (_, x_scaled) = spec.scale_into_model(&x).map_err(frame_err)?;
                spec.clamp(&ik_retarget(&x_scaled, spec, prev.as_ref(), &cfg.ik).map_err(frame_err)?)
            }
            RetargetMode::Hybrid | RetargetMode::HybridRefine => {
                let mut swarm_cfg = cfg.swarm;
                swarm_cfg.rng_seed = mix_seed(cfg.rng_seed, &trajectory.id, (i as u64) << 8);
                hybrid_pso(
                    &x,
                    &scene,
                    spec,
                    &cfg.weights,
                    &swarm_cfg,
                    &cfg.ik,
                    prev.as_ref(),
                    dt,
                )
                .map_err(frame_err)?
            }
        };

        let substeps = match cfg.mode {
            RetargetMode::HybridRefine => cfg.refine_rate_multiplier.max(1),
            _ => 1,
        };
        let sub_dt = dt / substeps as f64;

        let mut current = action;
        let mut posed = spec.pose(&current);
        for sub in 0..substeps {
            if sub > 0 {
                let mut swarm_cfg = cfg.swarm;
                swarm_cfg.rng_seed =
                    mix_seed(cfg.rng_seed, &trajectory.id, ((i as u64) << 8) | sub as u64);
                current = task_refine(&scene, &current, spec, &cfg.weights, &swarm_cfg, sub_dt)
                    .map_err(frame_err)?;
                posed = spec.pose(&current);
            }
            scene = step_scene(&scene, &posed.palm_center, &posed.skeleton.fingertips(), sub_dt)
                .map_err(frame_err)?;
        }

        let contacts = contact_distances(
            &posed.palm_center,
            &posed.skeleton.fingertips(),
            &scene,
            cfg.weights.max_contact_distance,
            cfg.weights.miss_cost,
        )
        .map_err(frame_err)?;

        records.push(FrameRecord {
            timestamp: frame.t,
            input: x,
            actuators: current,
            model: posed.skeleton,
            palm_center: posed.palm_center,
            contacts,
            scene: scene.clone(),
        });
        prev = Some(current);
    }
    Ok(records)
}

/// Turn evaluated frame records into a demonstration trajectory.
pub fn record_demo(
    id: &str,
    records: &[FrameRecord],
    cfg: &RunConfig,
) -> Result<DemoTrajectory> {
    let metrics = evaluate_trajectory(records);
    let dt = 1.0 / cfg.frames_per_second;
    let mut frames = Vec::with_capacity(records.len());
    let mut prev: Option<&FrameRecord> = None;
    for r in records {
        let state = extract_state(r, prev, dt, &cfg.weights)?;
        frames.push(DemoFrame { state, action: r.actuators, timestamp: r.timestamp });
        prev = Some(r);
    }
    Ok(DemoTrajectory { id: id.into(), success: metrics.success, frames })
}

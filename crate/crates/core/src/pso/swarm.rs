//! Synchronous inertia-weight particle swarm with per-dimension velocity
//! clamping.
//!
//! Velocity update per particle: `v ← w·v + c1·r1⊙(p_best − p) + c2·r2⊙(g_best − p)`
//! with `r1, r2` componentwise uniform in `[0, 1)`, then `p ← p + v`.
//! Personal and global bests update only on strictly lower fitness, so ties
//! keep the incumbent and the global best is monotone non-increasing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand::{HandModelSpec, ACTION_DIM, GLOBAL_DIM};

/// Swarm hyperparameters. Fractions are of the per-dimension actuator range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    /// Attraction toward the personal best (c1).
    pub cognitive_coeff: f64,
    /// Attraction toward the global best (c2).
    pub social_coeff: f64,
    /// Inertia weight on the previous velocity.
    pub inertia: f64,
    /// Velocity clamp per iteration, as a fraction of each dimension's range.
    pub velocity_max_fraction: f64,
    /// Initialisation noise half-width, as a fraction of each range.
    pub init_noise_fraction: f64,
    /// Stop when the global best improves by less than this over an iteration.
    pub min_fitness_step: f64,
    pub rng_seed: u64,
    /// Nominal range of the three global translation components (m).
    pub global_translation_range: f64,
    /// Nominal range of the three global rotation components (rad).
    pub global_rotation_range: f64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            swarm_size: 25,
            iterations: 50,
            cognitive_coeff: 1.5,
            social_coeff: 1.5,
            inertia: 0.7,
            velocity_max_fraction: 0.10,
            init_noise_fraction: 0.05,
            min_fitness_step: 1e-4,
            rng_seed: 0,
            global_translation_range: 0.4,
            global_rotation_range: std::f64::consts::FRAC_PI_2,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 1 {
            return Err(Error::Config("swarm size must be at least 1".into()));
        }
        if self.min_fitness_step <= 0.0 {
            return Err(Error::Config("min fitness step must be positive".into()));
        }
        if self.velocity_max_fraction < 0.0 || self.init_noise_fraction < 0.0 {
            return Err(Error::Config("swarm fractions must be non-negative".into()));
        }
        if self.global_translation_range <= 0.0 || self.global_rotation_range <= 0.0 {
            return Err(Error::Config("global ranges must be positive".into()));
        }
        Ok(())
    }
}

/// Per-dimension search ranges of the action space: configured nominal
/// ranges for the global pose, limit widths for the joints.
pub fn action_ranges(spec: &HandModelSpec, cfg: &SwarmConfig) -> [f64; ACTION_DIM] {
    let mut ranges = [0.0; ACTION_DIM];
    for r in ranges.iter_mut().take(3) {
        *r = cfg.global_translation_range;
    }
    for r in ranges.iter_mut().take(GLOBAL_DIM).skip(3) {
        *r = cfg.global_rotation_range;
    }
    for (i, r) in ranges.iter_mut().enumerate().skip(GLOBAL_DIM) {
        let (lo, hi) = spec.joint_limits(i - GLOBAL_DIM);
        *r = hi - lo;
    }
    ranges
}

/// One swarm member.
#[derive(Debug, Clone)]
pub struct Particle {
    pub position: [f64; ACTION_DIM],
    pub velocity: [f64; ACTION_DIM],
    pub best_position: [f64; ACTION_DIM],
    pub best_fitness: f64,
}

/// A running swarm: particles, the global best, and the seeded generator.
pub struct Swarm {
    particles: Vec<Particle>,
    best_position: [f64; ACTION_DIM],
    best_fitness: f64,
    v_max: [f64; ACTION_DIM],
    inertia: f64,
    cognitive: f64,
    social: f64,
    rng: ChaCha8Rng,
}

impl Swarm {
    /// Spawn a swarm around `center`: particle 0 sits exactly at the centre
    /// so the initialiser is always a member; the rest add componentwise
    /// uniform noise in `±noise`. All velocities start at zero.
    pub fn init(
        center: &[f64; ACTION_DIM],
        noise: &[f64; ACTION_DIM],
        v_max: [f64; ACTION_DIM],
        cfg: &SwarmConfig,
        objective: impl Fn(&[f64; ACTION_DIM]) -> f64,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let mut particles = Vec::with_capacity(cfg.swarm_size);
        for i in 0..cfg.swarm_size {
            let mut position = *center;
            if i > 0 {
                for (p, n) in position.iter_mut().zip(noise) {
                    if *n > 0.0 {
                        *p += rng.gen_range(-*n..=*n);
                    }
                }
            }
            let fitness = objective(&position);
            let fitness = if fitness.is_finite() { fitness } else { f64::INFINITY };
            particles.push(Particle {
                position,
                velocity: [0.0; ACTION_DIM],
                best_position: position,
                best_fitness: fitness,
            });
        }
        let mut best_idx = 0;
        for (i, p) in particles.iter().enumerate() {
            if p.best_fitness < particles[best_idx].best_fitness {
                best_idx = i;
            }
        }
        let best_position = particles[best_idx].best_position;
        let best_fitness = particles[best_idx].best_fitness;
        Ok(Self {
            particles,
            best_position,
            best_fitness,
            v_max,
            inertia: cfg.inertia,
            cognitive: cfg.cognitive_coeff,
            social: cfg.social_coeff,
            rng,
        })
    }

    pub fn best_position(&self) -> &[f64; ACTION_DIM] {
        &self.best_position
    }

    pub fn best_fitness(&self) -> f64 {
        self.best_fitness
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    /// One synchronous iteration: move and score every particle, update
    /// personal bests immediately and the global best at the end. Particles
    /// that produce a non-finite fitness are reset to their personal best
    /// with zero velocity. Returns the (monotone non-increasing) global best.
    pub fn step(&mut self, objective: impl Fn(&[f64; ACTION_DIM]) -> f64) -> f64 {
        let prev_best = self.best_fitness;
        for p in &mut self.particles {
            for d in 0..ACTION_DIM {
                let r1: f64 = self.rng.gen();
                let r2: f64 = self.rng.gen();
                let v = self.inertia * p.velocity[d]
                    + self.cognitive * r1 * (p.best_position[d] - p.position[d])
                    + self.social * r2 * (self.best_position[d] - p.position[d]);
                p.velocity[d] = v.clamp(-self.v_max[d], self.v_max[d]);
                p.position[d] += p.velocity[d];
            }
            let fitness = objective(&p.position);
            if !fitness.is_finite() {
                p.position = p.best_position;
                p.velocity = [0.0; ACTION_DIM];
            } else if fitness < p.best_fitness {
                p.best_fitness = fitness;
                p.best_position = p.position;
            }
        }
        for p in &self.particles {
            if p.best_fitness < self.best_fitness {
                self.best_fitness = p.best_fitness;
                self.best_position = p.best_position;
            }
        }
        debug_assert!(self.best_fitness <= prev_best);
        self.best_fitness
    }

    /// Run up to `iterations` steps with the early exit: stop once an
    /// iteration improves the global best by less than `min_step`.
    pub fn run(
        &mut self,
        iterations: usize,
        min_step: f64,
        objective: impl Fn(&[f64; ACTION_DIM]) -> f64,
    ) {
        for _ in 0..iterations {
            let before = self.best_fitness;
            let after = self.step(&objective);
            if before - after < min_step {
                break;
            }
        }
    }
}

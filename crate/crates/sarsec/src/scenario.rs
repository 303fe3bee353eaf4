//! Platform orbit geometry and eavesdropper track generation.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Platform position and local frame at one slot.
///
/// `e_perp` points from the platform horizontally toward the orbit center
/// (array broadside), `e_t` along the direction of travel, `e_b` up.
#[derive(Clone, Copy, Debug)]
pub struct AbsPose {
    pub slot: usize,
    pub position: Vec3,
    pub e_perp: Vec3,
    pub e_t: Vec3,
    pub e_b: Vec3,
}

/// Pose of the platform at a 1-based slot index for a circular orbit with
/// initial phase `phase0`.
pub fn abs_pose(cfg: &ScenarioConfig, slot: usize, phase0: f64) -> Result<AbsPose> {
    if slot < 1 || slot > cfg.slots {
        return Err(Error::SlotOutOfRange {
            slot,
            max: cfg.slots,
        });
    }
    let phi = orbit_phase(cfg, slot, phase0);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let position = Vec3::new(
        cfg.orbit_radius * cos_phi,
        cfg.orbit_radius * sin_phi,
        cfg.altitude,
    );
    Ok(AbsPose {
        slot,
        position,
        e_perp: Vec3::new(-cos_phi, -sin_phi, 0.0),
        e_t: Vec3::new(-sin_phi, cos_phi, 0.0),
        e_b: Vec3::new(0.0, 0.0, 1.0),
    })
}

/// Orbit phase angle at a 1-based slot.
pub fn orbit_phase(cfg: &ScenarioConfig, slot: usize, phase0: f64) -> f64 {
    phase0 + (slot as f64 - 1.0) * cfg.slot_duration * cfg.abs_speed / cfg.orbit_radius
}

/// Which generator produced a track.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackKind {
    Circular,
    LinearOscillating,
    Random,
}

/// Ground-truth eavesdropper trajectory over a full episode.
///
/// `velocities[n-1] = (positions[n+1-1] - positions[n-1]) / dt` (forward
/// differences); the final slot has no velocity.
#[derive(Clone, Debug)]
pub struct EveTrack {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    pub kind: TrackKind,
    pub seed: u64,
}

impl EveTrack {
    fn from_positions(positions: Vec<Vec3>, kind: TrackKind, seed: u64, dt: f64) -> Self {
        let velocities = positions
            .windows(2)
            .map(|w| (w[1] - w[0]) * (1.0 / dt))
            .collect();
        Self {
            positions,
            velocities,
            kind,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Position at a 1-based slot.
    pub fn position(&self, slot: usize) -> Vec3 {
        self.positions[slot - 1]
    }

    /// Velocity at a 1-based slot; the final slot reuses the last forward
    /// difference.
    pub fn velocity(&self, slot: usize) -> Vec3 {
        let idx = (slot - 1).min(self.velocities.len() - 1);
        self.velocities[idx]
    }

    pub fn speed(&self, slot: usize) -> f64 {
        self.velocity(slot).norm()
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest acceleration magnitude between consecutive velocities.
    pub fn max_acceleration(&self, dt: f64) -> f64 {
        self.velocities
            .windows(2)
            .map(|w| (w[1] - w[0]).norm() / dt)
            .fold(0.0, f64::max)
    }

    pub fn max_range_from_origin(&self) -> f64 {
        self.positions.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Checks the invariants every track must satisfy: full horizon length,
    /// ground-plane positions, and the speed cap. The acceleration cap is
    /// checked separately per generator (scripted evaluation tracks may
    /// exceed it by design).
    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<()> {
        if self.len() != cfg.slots {
            return Err(Error::TrackLength {
                got: self.len(),
                want: cfg.slots,
            });
        }
        if let Some(p) = self.positions.iter().find(|p| p.z != 0.0) {
            return Err(Error::Domain(format!(
                "track positions must be on the ground plane, got z = {}",
                p.z
            )));
        }
        let max_speed = self.max_speed();
        if max_speed > cfg.eve_speed_max * (1.0 + 1e-12) {
            return Err(Error::SpeedLimit {
                speed: max_speed,
                max: cfg.eve_speed_max,
            });
        }
        Ok(())
    }
}

/// Circle of the given radius around the user, constant angular rate.
/// The seed picks the starting angle and orbit direction.
pub fn gen_eve_circular(
    cfg: &ScenarioConfig,
    radius: f64,
    speed: f64,
    seed: u64,
) -> Result<EveTrack> {
    if radius <= 0.0 {
        return Err(Error::Domain(format!(
            "circular track radius must be positive, got {radius}"
        )));
    }
    if speed < 0.0 || speed > cfg.eve_speed_max {
        return Err(Error::SpeedLimit {
            speed,
            max: cfg.eve_speed_max,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle0: f64 = rng.random_range(0.0..2.0 * PI);
    let direction: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let omega = direction * speed / radius;
    let center = cfg.user_pos.horizontal();
    let positions = (0..cfg.slots)
        .map(|k| {
            let a = angle0 + omega * k as f64 * cfg.slot_duration;
            center + Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect();
    let track = EveTrack::from_positions(positions, TrackKind::Circular, seed, cfg.slot_duration);
    track.validate(cfg)?;
    Ok(track)
}

/// Straight-line track whose speed oscillates sinusoidally between `v_lo`
/// and `v_hi` with the given period (slots). The per-slot speed slope is
/// clipped to the acceleration cap, so the kinematic invariants hold even
/// for short periods.
pub fn gen_eve_linear_oscillating(
    cfg: &ScenarioConfig,
    heading: f64,
    v_lo: f64,
    v_hi: f64,
    period_slots: usize,
    start: Vec3,
    seed: u64,
) -> Result<EveTrack> {
    if !(0.0 <= v_lo && v_lo <= v_hi) {
        return Err(Error::Domain(format!(
            "need 0 <= v_lo <= v_hi, got v_lo={v_lo}, v_hi={v_hi}"
        )));
    }
    if v_hi > cfg.eve_speed_max {
        return Err(Error::SpeedLimit {
            speed: v_hi,
            max: cfg.eve_speed_max,
        });
    }
    if period_slots == 0 {
        return Err(Error::Domain("oscillation period must be at least 1 slot".into()));
    }
    let dir = Vec3::new(heading.cos(), heading.sin(), 0.0);
    let mid = 0.5 * (v_lo + v_hi);
    let amp = 0.5 * (v_hi - v_lo);
    let max_step = cfg.eve_accel_max * cfg.slot_duration;
    let mut positions = Vec::with_capacity(cfg.slots);
    let mut p = start.horizontal();
    positions.push(p);
    let mut speed = mid + amp * 0.0f64.sin();
    for k in 0..cfg.slots - 1 {
        let target = mid + amp * (2.0 * PI * k as f64 / period_slots as f64).sin();
        speed = target.clamp(speed - max_step, speed + max_step);
        p = p + dir * (speed * cfg.slot_duration);
        positions.push(p);
    }
    let track =
        EveTrack::from_positions(positions, TrackKind::LinearOscillating, seed, cfg.slot_duration);
    track.validate(cfg)?;
    Ok(track)
}

/// Random-acceleration walk: per slot, a uniform draw from the disk of
/// radius `a_max` perturbs the velocity, the speed is clipped to `v_max`,
/// and the heading reflects off the circle of radius `1.1 * roi_radius`.
pub fn gen_eve_random(cfg: &ScenarioConfig, seed: u64) -> EveTrack {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boundary = 1.1 * cfg.roi_radius;
    let dt = cfg.slot_duration;

    let r0 = cfg.roi_radius * rng.random::<f64>().sqrt();
    let a0: f64 = rng.random_range(0.0..2.0 * PI);
    let mut p = Vec3::new(r0 * a0.cos(), r0 * a0.sin(), 0.0);
    let s0: f64 = rng.random_range(0.0..cfg.eve_speed_max);
    let h0: f64 = rng.random_range(0.0..2.0 * PI);
    let mut v = Vec3::new(s0 * h0.cos(), s0 * h0.sin(), 0.0);

    let mut positions = Vec::with_capacity(cfg.slots);
    positions.push(p);
    for _ in 0..cfg.slots - 1 {
        let accel = disk_sample(&mut rng, cfg.eve_accel_max);
        v = clip_speed_along_step(v, accel * dt, cfg.eve_speed_max);
        let tentative = p + v * dt;
        if tentative.norm() > boundary {
            v = steer_inward(p, v, dt, boundary);
        }
        p = p + v * dt;
        positions.push(p);
    }
    EveTrack::from_positions(positions, TrackKind::Random, seed, dt)
}

fn disk_sample(rng: &mut ChaCha8Rng, radius: f64) -> Vec3 {
    let r = radius * rng.random::<f64>().sqrt();
    let a: f64 = rng.random_range(0.0..2.0 * PI);
    Vec3::new(r * a.cos(), r * a.sin(), 0.0)
}

/// Applies as much of `step` to `v` as the speed cap admits: the result is
/// `v + t*step` for the largest `t` in [0, 1] keeping the norm within
/// `v_max`. Unlike renormalizing, this never amplifies the velocity change.
fn clip_speed_along_step(v: Vec3, step: Vec3, v_max: f64) -> Vec3 {
    let full = v + step;
    if full.norm() <= v_max {
        return full;
    }
    // Solve |v + t*step|^2 = v_max^2 for the largest admissible t.
    let a = step.norm_sq();
    let b = 2.0 * v.dot(step);
    let c = v.norm_sq() - v_max * v_max;
    if a == 0.0 {
        return v;
    }
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let t = ((-b + disc.sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
    v + step * t
}

/// Boundary handling: specular reflection of the outward velocity
/// component, plus -- when the motion is nearly tangential while already
/// beyond the boundary -- just enough extra inward tilt that the range to
/// the origin cannot increase. Preserves the speed.
fn steer_inward(p: Vec3, v: Vec3, dt: f64, boundary: f64) -> Vec3 {
    let range = p.norm();
    if range == 0.0 {
        return v;
    }
    let n_hat = p * (1.0 / range);
    let radial = v.dot(n_hat);
    let mut v = if radial > 0.0 { v - n_hat * (2.0 * radial) } else { v };
    if range > boundary {
        // Required inward radial speed so that |p + v*dt| <= |p|.
        let needed = -v.norm_sq() * dt / (2.0 * range);
        let radial = v.dot(n_hat);
        if radial > needed {
            let speed = v.norm();
            if speed * speed <= needed * needed {
                v = n_hat * (-speed);
            } else {
                let tangent = v - n_hat * radial;
                let t_norm = tangent.norm();
                let t_scale = (speed * speed - needed * needed).sqrt();
                v = if t_norm > 0.0 {
                    tangent * (t_scale / t_norm) + n_hat * needed
                } else {
                    n_hat * (-speed)
                };
            }
        }
    }
    v
}

/// Scenario-file schema: a generator plus its parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrackSpec {
    Circular {
        radius_m: f64,
        speed_mps: f64,
        #[serde(default)]
        seed: u64,
    },
    LinearOscillating {
        heading_rad: f64,
        v_lo_mps: f64,
        v_hi_mps: f64,
        period_slots: usize,
        start_m: [f64; 3],
        #[serde(default)]
        seed: u64,
    },
    Random {
        #[serde(default)]
        seed: u64,
    },
}

impl TrackSpec {
    pub fn build(&self, cfg: &ScenarioConfig) -> Result<EveTrack> {
        match *self {
            TrackSpec::Circular {
                radius_m,
                speed_mps,
                seed,
            } => gen_eve_circular(cfg, radius_m, speed_mps, seed),
            TrackSpec::LinearOscillating {
                heading_rad,
                v_lo_mps,
                v_hi_mps,
                period_slots,
                start_m,
                seed,
            } => gen_eve_linear_oscillating(
                cfg,
                heading_rad,
                v_lo_mps,
                v_hi_mps,
                period_slots,
                start_m.into(),
                seed,
            ),
            TrackSpec::Random { seed } => Ok(gen_eve_random(cfg, seed)),
        }
    }
}

/// A scenario file: track generator plus optional platform phase override.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub track: TrackSpec,
    #[serde(default)]
    pub abs_phase0_rad: Option<f64>,
}

impl ScenarioSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::ConfigIo {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| Error::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn phase0(&self, cfg: &ScenarioConfig) -> f64 {
        self.abs_phase0_rad.unwrap_or(cfg.abs_phase0)
    }
}

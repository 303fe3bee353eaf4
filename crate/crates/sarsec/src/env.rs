//! Per-slot sense/communicate decision process.
//!
//! Each episode covers a fixed horizon of slots. Sensing slots extend the
//! current aperture and refresh the eavesdropper estimate with the partial
//! aperture accumulated so far; communication slots solve the robust
//! power split against the current uncertainty disk and collect reward.
//! Slot 1 is forced to sense (no estimate exists before the first
//! aperture) and the final slot is forced to communicate, which makes the
//! frame-structure constraints unviolable by construction.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::azimuth;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geom::angle_separation;
use crate::sar::{scr, uncertainty_radius, UncertaintyState};
use crate::scenario::{abs_pose, EveTrack};
use crate::secrecy::robust_power_allocation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Sense,
    Communicate,
}

impl Action {
    /// Trace encoding: 1 = sensing, 0 = communication.
    pub fn as_flag(self) -> u8 {
        match self {
            Action::Sense => 1,
            Action::Communicate => 0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Action::Sense => 0,
            Action::Communicate => 1,
        }
    }

    pub fn from_index(i: usize) -> Action {
        if i == 0 {
            Action::Sense
        } else {
            Action::Communicate
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionMask {
    pub sense: bool,
    pub communicate: bool,
}

impl ActionMask {
    pub fn permits(&self, action: Action) -> bool {
        match action {
            Action::Sense => self.sense,
            Action::Communicate => self.communicate,
        }
    }

    pub fn as_array(&self) -> [bool; 2] {
        [self.sense, self.communicate]
    }
}

/// Normalized state vector presented to the agent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    /// Aperture backing the current estimate / horizon.
    pub aperture: f64,
    /// Estimated velocity over the speed cap (x, y).
    pub vel_x: f64,
    pub vel_y: f64,
    /// Current uncertainty radius over the ROI radius (may exceed 1).
    pub radius: f64,
    /// Angular separation estimate-vs-user over pi.
    pub angle_gap: f64,
    /// Range difference estimate-vs-user over one orbit diameter.
    pub range_gap: f64,
}

impl Observation {
    pub const DIM: usize = 6;

    pub fn to_array(self) -> [f64; Self::DIM] {
        [
            self.aperture,
            self.vel_x,
            self.vel_y,
            self.radius,
            self.angle_gap,
            self.range_gap,
        ]
    }
}

/// Everything recorded about one executed slot.
#[derive(Clone, Copy, Debug)]
pub struct SlotOutcome {
    pub slot: usize,
    pub frame: usize,
    pub action: Action,
    pub reward: f64,
    pub user_rate: f64,
    pub worst_eve_rate: f64,
    pub secrecy_rate: f64,
    pub alpha: f64,
    /// Uncertainty radius in effect for this slot, meters.
    pub radius: f64,
    /// SCR of the aperture backing the current estimate, dB.
    pub scr_frozen_db: f64,
    /// True eavesdropper speed this slot (diagnostics), m/s.
    pub eve_speed: f64,
    pub scr_penalty_fired: bool,
    pub done: bool,
}

/// One episode of the decision process over a fixed track.
pub struct Env {
    cfg: ScenarioConfig,
    track: Arc<EveTrack>,
    phase0: f64,
    seed: u64,
    slot: usize,
    frame: usize,
    estimate: UncertaintyState,
    burst_len: usize,
    cum_user_rate: f64,
    prev_action: Option<Action>,
    prev_prev_action: Option<Action>,
    done: bool,
}

impl Env {
    /// The environment applies the forced slot-1 sensing internally, so the
    /// first observation already reflects an estimate centered on the true
    /// slot-1 position with a one-slot aperture.
    pub fn new(cfg: ScenarioConfig, track: Arc<EveTrack>, phase0: f64, seed: u64) -> Result<Env> {
        track.validate(&cfg)?;
        let estimate = UncertaintyState {
            estimate_slot: 1,
            aperture: 1,
            center: track.position(1),
            velocity: track.velocity(1),
        };
        Ok(Env {
            cfg,
            track,
            phase0,
            seed,
            slot: 1,
            frame: 1,
            estimate,
            burst_len: 1,
            cum_user_rate: 0.0,
            prev_action: None,
            prev_prev_action: None,
            done: false,
        })
    }

    pub fn reset(&mut self) -> Observation {
        self.slot = 1;
        self.frame = 1;
        self.estimate = UncertaintyState {
            estimate_slot: 1,
            aperture: 1,
            center: self.track.position(1),
            velocity: self.track.velocity(1),
        };
        self.burst_len = 1;
        self.cum_user_rate = 0.0;
        self.prev_action = None;
        self.prev_prev_action = None;
        self.done = false;
        self.observation()
    }

    pub fn cfg(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn frame(&self) -> usize {
        self.frame
    }

    pub fn done(&self) -> bool {
        self.done
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn estimate(&self) -> &UncertaintyState {
        &self.estimate
    }

    pub fn cumulative_user_rate(&self) -> f64 {
        self.cum_user_rate
    }

    pub fn mask(&self) -> ActionMask {
        if self.slot == 1 {
            ActionMask {
                sense: true,
                communicate: false,
            }
        } else if self.slot == self.cfg.slots {
            ActionMask {
                sense: false,
                communicate: true,
            }
        } else {
            ActionMask {
                sense: true,
                communicate: true,
            }
        }
    }

    /// Radius of the uncertainty disk at the current slot.
    pub fn current_radius(&self) -> f64 {
        uncertainty_radius(&self.cfg, &self.estimate, self.slot, self.cfg.velocity_bound)
            .expect("estimate is always valid for the current slot")
    }

    pub fn observation(&self) -> Observation {
        let cfg = &self.cfg;
        let pose_now = abs_pose(cfg, self.slot, self.phase0).expect("slot in range");
        let pose_est =
            abs_pose(cfg, self.estimate.estimate_slot, self.phase0).expect("slot in range");
        let theta_u = azimuth(&pose_now, cfg.user_pos).expect("user below orbit");
        let theta_e = azimuth(&pose_est, self.estimate.center).expect("estimate below orbit");
        let d_u = pose_now.position.distance(cfg.user_pos);
        let d_e = pose_est.position.distance(self.estimate.center);
        let vel_scale = if cfg.eve_speed_max > 0.0 {
            1.0 / cfg.eve_speed_max
        } else {
            0.0
        };
        Observation {
            aperture: self.estimate.aperture as f64 / cfg.slots as f64,
            vel_x: self.estimate.velocity.x * vel_scale,
            vel_y: self.estimate.velocity.y * vel_scale,
            radius: self.current_radius() / cfg.roi_radius,
            angle_gap: angle_separation(theta_e, theta_u) / std::f64::consts::PI,
            range_gap: (d_e - d_u) / (2.0 * cfg.orbit_radius),
        }
    }

    /// Executes the action for the current slot and advances.
    pub fn step(&mut self, action: Action) -> Result<(Observation, SlotOutcome)> {
        if self.done {
            return Err(Error::Domain("episode already finished".into()));
        }
        if !self.mask().permits(action) {
            return Err(Error::MaskedAction {
                action: match action {
                    Action::Sense => "sense",
                    Action::Communicate => "communicate",
                },
                slot: self.slot,
            });
        }
        let n = self.slot;
        let cfg = &self.cfg;
        let outcome = match action {
            Action::Sense => {
                if n > 1 {
                    if self.prev_action == Some(Action::Sense) {
                        self.burst_len += 1;
                    } else {
                        // A communication run just ended: new frame.
                        self.frame += 1;
                        self.burst_len = 1;
                    }
                }
                self.estimate = UncertaintyState {
                    estimate_slot: n,
                    aperture: self.burst_len,
                    center: self.track.position(n),
                    velocity: self.track.velocity(n),
                };
                SlotOutcome {
                    slot: n,
                    frame: self.frame,
                    action,
                    reward: 0.0,
                    user_rate: 0.0,
                    worst_eve_rate: 0.0,
                    secrecy_rate: 0.0,
                    alpha: 0.0,
                    radius: self.current_radius(),
                    scr_frozen_db: crate::config::linear_to_db(
                        scr(cfg, self.estimate.aperture).expect("aperture >= 1"),
                    ),
                    eve_speed: self.track.speed(n),
                    scr_penalty_fired: false,
                    done: false,
                }
            }
            Action::Communicate => {
                let radius = self.current_radius();
                let scr_frozen = scr(cfg, self.estimate.aperture).expect("aperture >= 1");
                let scr_frozen_db = crate::config::linear_to_db(scr_frozen);
                if scr_frozen < cfg.scr_min {
                    // Inadequate sensing: penalty, no data counted.
                    SlotOutcome {
                        slot: n,
                        frame: self.frame,
                        action,
                        reward: -cfg.rho_scr,
                        user_rate: 0.0,
                        worst_eve_rate: 0.0,
                        secrecy_rate: 0.0,
                        alpha: 0.0,
                        radius,
                        scr_frozen_db,
                        eve_speed: self.track.speed(n),
                        scr_penalty_fired: true,
                        done: false,
                    }
                } else {
                    let pose = abs_pose(cfg, n, self.phase0).expect("slot in range");
                    let res = robust_power_allocation(cfg, &pose, &self.estimate, radius);
                    self.cum_user_rate += res.user_rate;
                    let shortfall = (cfg.rate_min - self.cum_user_rate / n as f64).max(0.0);
                    SlotOutcome {
                        slot: n,
                        frame: self.frame,
                        action,
                        reward: res.secrecy_rate - cfg.rho_rate * shortfall,
                        user_rate: res.user_rate,
                        worst_eve_rate: res.worst_eve_rate,
                        secrecy_rate: res.secrecy_rate,
                        alpha: res.alpha_star,
                        radius,
                        scr_frozen_db,
                        eve_speed: self.track.speed(n),
                        scr_penalty_fired: false,
                        done: false,
                    }
                }
            }
        };
        self.prev_prev_action = self.prev_action;
        self.prev_action = Some(action);
        let mut outcome = outcome;
        if n == cfg.slots {
            self.done = true;
            outcome.done = true;
        } else {
            self.slot = n + 1;
        }
        Ok((self.observation(), outcome))
    }
}

/// One frame of the reconstructed schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frame {
    /// First slot of the frame, 1-based.
    pub start: usize,
    /// Frame length in slots (T).
    pub len: usize,
    /// Leading sensing slots (L).
    pub aperture: usize,
    /// Last sensing slot of the frame (l).
    pub last_sense: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub frames: Vec<Frame>,
}

impl Schedule {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Structural frame constraints: frames tile the horizon, every frame
    /// has at least two slots, and each aperture leaves at least one
    /// communication slot.
    pub fn check(&self, horizon: usize) -> Result<()> {
        let total: usize = self.frames.iter().map(|f| f.len).sum();
        if total != horizon {
            return Err(Error::InvalidSchedule(format!(
                "frames cover {total} slots, horizon is {horizon}"
            )));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.len < 2 {
                return Err(Error::InvalidSchedule(format!(
                    "frame {} has length {} < 2",
                    i + 1,
                    f.len
                )));
            }
            if f.aperture < 1 || f.aperture > f.len - 1 {
                return Err(Error::InvalidSchedule(format!(
                    "frame {} aperture {} outside 1..={}",
                    i + 1,
                    f.aperture,
                    f.len - 1
                )));
            }
            if f.last_sense != f.start + f.aperture - 1 {
                return Err(Error::InvalidSchedule(format!(
                    "frame {} last sensing slot {} inconsistent",
                    i + 1,
                    f.last_sense
                )));
            }
        }
        Ok(())
    }
}

/// Recovers the frame structure (I, {T_i}, {L_i}, {l_i}) from a per-slot
/// action sequence. Frames are delimited at communicate-to-sense
/// transitions; the first sensing slot of a burst opens its frame.
pub fn reconstruct_schedule(actions: &[Action]) -> Result<Schedule> {
    if actions.is_empty() {
        return Err(Error::InvalidSchedule("empty action sequence".into()));
    }
    if actions[0] != Action::Sense {
        return Err(Error::InvalidSchedule("first slot must sense".into()));
    }
    if *actions.last().unwrap() != Action::Communicate {
        return Err(Error::InvalidSchedule("last slot must communicate".into()));
    }
    let mut frames = Vec::new();
    let mut start = 0usize; // 0-based frame start
    let mut aperture = 1usize;
    let mut in_aperture = true;
    for (i, pair) in actions.windows(2).enumerate() {
        match (pair[0], pair[1]) {
            (Action::Sense, Action::Sense) => aperture += 1,
            (Action::Sense, Action::Communicate) => in_aperture = false,
            (Action::Communicate, Action::Communicate) => {}
            (Action::Communicate, Action::Sense) => {
                frames.push(Frame {
                    start: start + 1,
                    len: i + 1 - start,
                    aperture,
                    last_sense: start + aperture,
                });
                start = i + 1;
                aperture = 1;
                in_aperture = true;
            }
        }
    }
    debug_assert!(!in_aperture);
    frames.push(Frame {
        start: start + 1,
        len: actions.len() - start,
        aperture,
        last_sense: start + aperture,
    });
    let schedule = Schedule { frames };
    schedule.check(actions.len())?;
    Ok(schedule)
}

/// Complete record of one evaluated episode.
#[derive(Clone, Debug)]
pub struct EpisodeLog {
    pub outcomes: Vec<SlotOutcome>,
    pub actions: Vec<Action>,
    pub schedule: Schedule,
    /// Episode objective: mean worst-case secrecy rate over all slots.
    pub mean_secrecy: f64,
    pub mean_user_rate: f64,
    pub mean_reward: f64,
    pub scr_violations: usize,
    /// Whether the average user rate met the configured minimum.
    pub min_rate_satisfied: bool,
}

impl EpisodeLog {
    pub fn from_outcomes(cfg: &ScenarioConfig, outcomes: Vec<SlotOutcome>) -> Result<EpisodeLog> {
        let n = outcomes.len() as f64;
        let actions: Vec<Action> = outcomes.iter().map(|o| o.action).collect();
        let schedule = reconstruct_schedule(&actions)?;
        let mean_secrecy = outcomes.iter().map(|o| o.secrecy_rate).sum::<f64>() / n;
        let mean_user_rate = outcomes.iter().map(|o| o.user_rate).sum::<f64>() / n;
        let mean_reward = outcomes.iter().map(|o| o.reward).sum::<f64>() / n;
        let scr_violations = outcomes.iter().filter(|o| o.scr_penalty_fired).count();
        Ok(EpisodeLog {
            min_rate_satisfied: mean_user_rate >= cfg.rate_min,
            outcomes,
            actions,
            schedule,
            mean_secrecy,
            mean_user_rate,
            mean_reward,
            scr_violations,
        })
    }
}

/// Runs one full episode, choosing actions through `policy`.
pub fn run_episode<F>(
    cfg: &ScenarioConfig,
    track: Arc<EveTrack>,
    phase0: f64,
    seed: u64,
    mut policy: F,
) -> Result<EpisodeLog>
where
    F: FnMut(&Observation, ActionMask) -> Action,
{
    let mut env = Env::new(cfg.clone(), track, phase0, seed)?;
    let mut obs = env.reset();
    let mut outcomes = Vec::with_capacity(cfg.slots);
    loop {
        let action = policy(&obs, env.mask());
        let (next, outcome) = env.step(action)?;
        let done = outcome.done;
        outcomes.push(outcome);
        obs = next;
        if done {
            break;
        }
    }
    EpisodeLog::from_outcomes(cfg, outcomes)
}

/// Writes the per-slot trace in the documented CSV schema.
pub fn write_trace_csv<W: Write>(log: &EpisodeLog, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "n",
        "frame_i",
        "action",
        "alpha",
        "R_u",
        "R_e_worst",
        "R",
        "r_e_m",
        "scr_db_frozen",
        "eve_speed_mps",
        "reward",
    ])?;
    for o in &log.outcomes {
        w.write_record([
            o.slot.to_string(),
            o.frame.to_string(),
            o.action.as_flag().to_string(),
            o.alpha.to_string(),
            o.user_rate.to_string(),
            o.worst_eve_rate.to_string(),
            o.secrecy_rate.to_string(),
            o.radius.to_string(),
            o.scr_frozen_db.to_string(),
            o.eve_speed.to_string(),
            o.reward.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-frame statistics for schedule analyses (aperture-to-communication
/// ratio alongside the mean eavesdropper speed over the frame).
#[derive(Clone, Copy, Debug)]
pub struct FrameStats {
    pub frame: usize,
    pub aperture: usize,
    pub comm_slots: usize,
    pub s2c_ratio: f64,
    pub mean_eve_speed: f64,
}

pub fn frame_stats(log: &EpisodeLog) -> Vec<FrameStats> {
    log.schedule
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let comm = f.len - f.aperture;
            let speeds: f64 = log.outcomes[f.start - 1..f.start - 1 + f.len]
                .iter()
                .map(|o| o.eve_speed)
                .sum();
            FrameStats {
                frame: i + 1,
                aperture: f.aperture,
                comm_slots: comm,
                s2c_ratio: f.aperture as f64 / comm as f64,
                mean_eve_speed: speeds / f.len as f64,
            }
        })
        .collect()
}

pub fn write_frames_csv<W: Write>(log: &EpisodeLog, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "frame_i",
        "L_i",
        "C_i",
        "s2c_ratio",
        "mean_speed",
    ])?;
    for f in frame_stats(log) {
        w.write_record([
            f.frame.to_string(),
            f.aperture.to_string(),
            f.comm_slots.to_string(),
            f.s2c_ratio.to_string(),
            f.mean_eve_speed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

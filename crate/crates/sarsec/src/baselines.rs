//! Non-learning benchmark schedulers and a shared fixed-schedule evaluator.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{BaselineConfig, ScenarioConfig};
use crate::env::{run_episode, Action, EpisodeLog};
use crate::error::{Error, Result};
use crate::sar::min_feasible_aperture;
use crate::scenario::EveTrack;
use crate::seeding::{derive_seed, stream};

/// Replays a scripted action sequence through the environment.
pub fn evaluate_schedule(
    cfg: &ScenarioConfig,
    actions: &[Action],
    track: Arc<EveTrack>,
    phase0: f64,
) -> Result<EpisodeLog> {
    if actions.len() != cfg.slots {
        return Err(Error::InvalidSchedule(format!(
            "schedule has {} actions for a {}-slot horizon",
            actions.len(),
            cfg.slots
        )));
    }
    let mut i = 0;
    run_episode(cfg, track, phase0, 0, |_, _| {
        let a = actions[i];
        i += 1;
        a
    })
}

/// Builds the fixed schedule: `frames` frames tiling the horizon (longer
/// frames first when it does not divide evenly), each opening with
/// `aperture` sensing slots.
pub fn equal_aperture_schedule(
    cfg: &ScenarioConfig,
    aperture: usize,
    frames: usize,
) -> Result<Vec<Action>> {
    let n = cfg.slots;
    if aperture < 1 || frames < 1 {
        return Err(Error::InvalidSchedule(
            "aperture and frame count must be at least 1".into(),
        ));
    }
    let base = n / frames;
    if base < aperture + 1 {
        return Err(Error::InvalidSchedule(format!(
            "aperture {aperture} does not fit {frames} frames over {n} slots"
        )));
    }
    let remainder = n % frames;
    let mut actions = Vec::with_capacity(n);
    for f in 0..frames {
        let len = base + usize::from(f < remainder);
        actions.extend(std::iter::repeat_n(Action::Sense, aperture));
        actions.extend(std::iter::repeat_n(Action::Communicate, len - aperture));
    }
    debug_assert_eq!(actions.len(), n);
    Ok(actions)
}

/// Evaluates the equal-aperture schedule on one track.
pub fn equal_aperture(
    cfg: &ScenarioConfig,
    track: Arc<EveTrack>,
    phase0: f64,
    aperture: usize,
    frames: usize,
) -> Result<EpisodeLog> {
    let actions = equal_aperture_schedule(cfg, aperture, frames)?;
    evaluate_schedule(cfg, &actions, track, phase0)
}

#[derive(Clone, Copy, Debug)]
pub struct GridSearchEntry {
    pub aperture: usize,
    pub frames: usize,
    pub mean_secrecy: f64,
    pub mean_user_rate: f64,
    pub min_rate_satisfied_frac: f64,
}

#[derive(Clone, Debug)]
pub struct GridSearchResult {
    pub best: GridSearchEntry,
    /// All feasible grid points, in scan order (aperture outer, frames inner).
    pub table: Vec<GridSearchEntry>,
}

/// Exhaustive search over aperture length and frame count, scoring each
/// feasible pair by mean secrecy across the provided tracks. Ties keep the
/// first (smallest aperture, then fewest frames).
pub fn equal_aperture_grid_search(
    cfg: &ScenarioConfig,
    tracks: &[(Arc<EveTrack>, f64)],
    bounds: &BaselineConfig,
) -> Result<GridSearchResult> {
    if tracks.is_empty() {
        return Err(Error::Domain("grid search needs at least one track".into()));
    }
    let l_min = min_feasible_aperture(cfg);
    let mut table = Vec::new();
    let mut best: Option<GridSearchEntry> = None;
    for aperture in l_min..=bounds.grid_aperture_max {
        for frames in 1..=bounds.grid_frames_max {
            let Ok(actions) = equal_aperture_schedule(cfg, aperture, frames) else {
                continue;
            };
            let mut secrecy = 0.0;
            let mut user = 0.0;
            let mut satisfied = 0usize;
            for (track, phase0) in tracks {
                let log = evaluate_schedule(cfg, &actions, track.clone(), *phase0)?;
                secrecy += log.mean_secrecy;
                user += log.mean_user_rate;
                satisfied += usize::from(log.min_rate_satisfied);
            }
            let k = tracks.len() as f64;
            let entry = GridSearchEntry {
                aperture,
                frames,
                mean_secrecy: secrecy / k,
                mean_user_rate: user / k,
                min_rate_satisfied_frac: satisfied as f64 / k,
            };
            if best.is_none_or(|b| entry.mean_secrecy > b.mean_secrecy + 1e-12) {
                best = Some(entry);
            }
            table.push(entry);
        }
    }
    let best = best.ok_or_else(|| {
        Error::InvalidSchedule("no feasible equal-aperture schedule in the grid".into())
    })?;
    Ok(GridSearchResult { best, table })
}

/// Draws one random schedule: frames are generated sequentially with the
/// aperture uniform in `[L_min, aperture_max]` and the communication run
/// uniform in `[1, comm_max]`, clamped to what remains; a tail too short to
/// host another feasible frame is absorbed into the last communication run,
/// so every aperture clears the SCR gate and the final slot communicates.
pub fn random_schedule(
    cfg: &ScenarioConfig,
    bounds: &BaselineConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Action>> {
    let n = cfg.slots;
    let l_min = min_feasible_aperture(cfg);
    if l_min + 1 > n {
        return Err(Error::InvalidSchedule(format!(
            "horizon {n} cannot fit the minimum feasible aperture {l_min}"
        )));
    }
    let mut actions = Vec::with_capacity(n);
    let mut remaining = n;
    while remaining >= l_min + 1 {
        let l_hi = bounds.aperture_max.clamp(l_min, remaining - 1);
        let aperture = rng.random_range(l_min..=l_hi);
        let c_hi = bounds.comm_max.clamp(1, remaining - aperture);
        let mut comm = rng.random_range(1..=c_hi);
        // Absorb a tail that cannot host another frame.
        if remaining - aperture - comm < l_min + 1 {
            comm = remaining - aperture;
        }
        actions.extend(std::iter::repeat_n(Action::Sense, aperture));
        actions.extend(std::iter::repeat_n(Action::Communicate, comm));
        remaining -= aperture + comm;
    }
    debug_assert_eq!(remaining, 0);
    debug_assert_eq!(actions.len(), n);
    Ok(actions)
}

#[derive(Clone, Copy, Debug)]
pub struct RandomAllocStats {
    pub trials: usize,
    pub mean_secrecy: f64,
    /// Sample standard deviation across trials (0 for a single trial).
    pub std_secrecy: f64,
    pub mean_user_rate: f64,
    pub scr_violation_rate: f64,
    pub min_rate_satisfied_frac: f64,
}

/// Evaluates `trials` random schedules on one track; per-trial seeds are
/// split deterministically from `seed`.
pub fn random_allocation(
    cfg: &ScenarioConfig,
    track: Arc<EveTrack>,
    phase0: f64,
    seed: u64,
    trials: usize,
    bounds: &BaselineConfig,
) -> Result<RandomAllocStats> {
    if trials < 1 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let mut secrecy = Vec::with_capacity(trials);
    let mut user = 0.0;
    let mut violations = 0usize;
    let mut comm_slots = 0usize;
    let mut satisfied = 0usize;
    for t in 0..trials {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(seed, stream::RANDOM_BASELINE, t as u64));
        let actions = random_schedule(cfg, bounds, &mut rng)?;
        let log = evaluate_schedule(cfg, &actions, track.clone(), phase0)?;
        secrecy.push(log.mean_secrecy);
        user += log.mean_user_rate;
        violations += log.scr_violations;
        comm_slots += actions.iter().filter(|a| **a == Action::Communicate).count();
        satisfied += usize::from(log.min_rate_satisfied);
    }
    let k = trials as f64;
    let mean = secrecy.iter().sum::<f64>() / k;
    let std = if trials > 1 {
        (secrecy.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(RandomAllocStats {
        trials,
        mean_secrecy: mean,
        std_secrecy: std,
        mean_user_rate: user / k,
        scr_violation_rate: violations as f64 / comm_slots.max(1) as f64,
        min_rate_satisfied_frac: satisfied as f64 / k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::reconstruct_schedule;
    use crate::scenario::gen_eve_circular;
    use approx::assert_relative_eq;

    fn cfg(slots: usize) -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.slots = slots;
        c
    }

    fn track(cfg: &ScenarioConfig) -> Arc<EveTrack> {
        Arc::new(gen_eve_circular(cfg, 55.0, 10.0, 3).unwrap())
    }

    #[test]
    fn equal_aperture_tiles_the_horizon() {
        let cfg = cfg(103);
        let actions = equal_aperture_schedule(&cfg, 3, 4).unwrap();
        assert_eq!(actions.len(), 103);
        let schedule = reconstruct_schedule(&actions).unwrap();
        assert_eq!(schedule.frame_count(), 4);
        for f in &schedule.frames {
            assert_eq!(f.aperture, 3);
            assert!(f.len == 25 || f.len == 26);
        }
    }

    #[test]
    fn equal_aperture_single_frame() {
        let cfg = cfg(2500);
        let actions = equal_aperture_schedule(&cfg, 3, 1).unwrap();
        let comm = actions.iter().filter(|a| **a == Action::Communicate).count();
        assert_eq!(comm, 2497);
        let schedule = reconstruct_schedule(&actions).unwrap();
        assert_eq!(schedule.frame_count(), 1);
    }

    #[test]
    fn equal_aperture_rejects_overlong_aperture() {
        let cfg = cfg(100);
        // 10 frames of 10 slots: aperture 10 leaves no communication slot.
        assert!(equal_aperture_schedule(&cfg, 10, 10).is_err());
        assert!(equal_aperture_schedule(&cfg, 9, 10).is_ok());
    }

    #[test]
    fn starvation_schedule_has_negligible_secrecy() {
        let cfg = cfg(60);
        let mut actions = vec![Action::Sense; 59];
        actions.push(Action::Communicate);
        let log = evaluate_schedule(&cfg, &actions, track(&cfg), 0.0).unwrap();
        // One communication slot out of 60.
        assert!(log.mean_secrecy < 0.1, "mean secrecy {}", log.mean_secrecy);
        assert_eq!(log.scr_violations, 0);
    }

    #[test]
    fn short_apertures_fire_penalty_everywhere() {
        let cfg = cfg(60);
        // Frames of [S, S, C]: aperture 2 < feasible minimum 3.
        let mut actions = Vec::new();
        for _ in 0..20 {
            actions.extend([Action::Sense, Action::Sense, Action::Communicate]);
        }
        let log = evaluate_schedule(&cfg, &actions, track(&cfg), 0.0).unwrap();
        assert_eq!(log.scr_violations, 20);
        assert_relative_eq!(log.mean_user_rate, 0.0);
        assert!(log.outcomes.iter().all(|o| o.secrecy_rate == 0.0));
    }

    #[test]
    fn random_schedules_always_feasible() {
        let cfg = cfg(250);
        let bounds = BaselineConfig::default();
        let l_min = min_feasible_aperture(&cfg);
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let actions = random_schedule(&cfg, &bounds, &mut rng).unwrap();
            assert_eq!(actions.len(), cfg.slots);
            let schedule = reconstruct_schedule(&actions).unwrap();
            for f in &schedule.frames {
                assert!(f.aperture >= l_min, "aperture {} below minimum", f.aperture);
            }
        }
    }

    #[test]
    fn random_allocation_deterministic_and_violation_free() {
        let cfg = cfg(120);
        let bounds = BaselineConfig::default();
        let t = track(&cfg);
        let a = random_allocation(&cfg, t.clone(), 0.0, 9, 5, &bounds).unwrap();
        let b = random_allocation(&cfg, t.clone(), 0.0, 9, 5, &bounds).unwrap();
        assert_eq!(a.mean_secrecy.to_bits(), b.mean_secrecy.to_bits());
        assert_eq!(a.scr_violation_rate, 0.0);
        assert!(a.mean_secrecy > 0.0);
        let c = random_allocation(&cfg, t, 0.0, 10, 5, &bounds).unwrap();
        assert_ne!(a.mean_secrecy.to_bits(), c.mean_secrecy.to_bits());
    }

    #[test]
    fn grid_search_beats_mean_random_trial() {
        let cfg = cfg(150);
        let mut bounds = BaselineConfig::default();
        bounds.grid_aperture_max = 10;
        bounds.grid_frames_max = 12;
        let t = track(&cfg);
        let grid = equal_aperture_grid_search(&cfg, &[(t.clone(), 0.0)], &bounds).unwrap();
        assert!(!grid.table.is_empty());
        let rand_stats = random_allocation(&cfg, t, 0.0, 4, 20, &bounds).unwrap();
        assert!(
            grid.best.mean_secrecy >= rand_stats.mean_secrecy,
            "grid winner {} vs random mean {}",
            grid.best.mean_secrecy,
            rand_stats.mean_secrecy
        );
        // The winner is the max of its own table.
        let table_max = grid
            .table
            .iter()
            .map(|e| e.mean_secrecy)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(grid.best.mean_secrecy, table_max);
    }
}

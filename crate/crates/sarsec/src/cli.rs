//! Command implementations behind the `sarsec` binary: train, eval, sweep,
//! and baseline. Each command writes CSV/JSON artifacts into an output
//! directory; identical inputs and seeds reproduce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::agent::ppo::{self, Checkpoint, CHECKPOINT_VERSION};
use crate::baselines::{equal_aperture_grid_search, random_allocation};
use crate::config::{linear_to_db, load_config, AppConfig, ScenarioConfig};
use crate::env::{write_frames_csv, write_trace_csv, EpisodeLog};
use crate::error::{Error, Result};
use crate::scenario::{gen_eve_circular, EveTrack, ScenarioSpec};
use crate::seeding::{derive_seed, stream};

pub struct TrainArtifacts {
    pub checkpoint: PathBuf,
    pub final_checkpoint: PathBuf,
    pub curve: PathBuf,
    pub config_snapshot: PathBuf,
    pub best_eval_reward: f64,
}

/// Trains a policy and writes the checkpoint, training curve, and a config
/// snapshot (prefixed with its hash) into `out_dir`.
pub fn cmd_train(config_path: &Path, out_dir: &Path, seed: u64) -> Result<TrainArtifacts> {
    let app = load_config(config_path)?;
    fs::create_dir_all(out_dir)?;

    let output = ppo::train(&app.scenario, &app.training, seed, |point| {
        println!(
            "iter {:4}  reward/slot {:+.4}  secrecy {:.4}  user-rate {:.4}  scr-violations {}",
            point.iteration,
            point.mean_reward,
            point.mean_secrecy,
            point.mean_user_rate,
            point.scr_violations
        );
    })?;

    let curve_path = out_dir.join("training_curve.csv");
    write_curve_csv(&output.curve, &curve_path)?;

    let make_ckpt = |params: &ppo::PolicyParams| Checkpoint {
        version: CHECKPOINT_VERSION,
        obs_dim: ppo::OBS_DIM,
        action_dim: ppo::ACTION_DIM,
        config_hash: app.hash.clone(),
        seed,
        scenario: app.scenario.clone(),
        training: app.training.clone(),
        baselines: app.baselines.clone(),
        evaluation: app.evaluation.clone(),
        params: params.clone(),
    };
    let ckpt_path = out_dir.join("checkpoint.json");
    make_ckpt(&output.best).save(&ckpt_path)?;
    let final_path = out_dir.join("checkpoint_final.json");
    make_ckpt(&output.r#final).save(&final_path)?;

    let snapshot_path = out_dir.join("config_snapshot.toml");
    fs::write(
        &snapshot_path,
        format!("# sha256: {}\n{}", app.hash, app.source),
    )?;

    Ok(TrainArtifacts {
        checkpoint: ckpt_path,
        final_checkpoint: final_path,
        curve: curve_path,
        config_snapshot: snapshot_path,
        best_eval_reward: output.best_eval_reward,
    })
}

fn write_curve_csv(curve: &[ppo::TrainPoint], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "iteration",
        "mean_reward",
        "mean_secrecy",
        "mean_user_rate",
        "scr_violations",
    ])?;
    for p in curve {
        w.write_record([
            p.iteration.to_string(),
            p.mean_reward.to_string(),
            p.mean_secrecy.to_string(),
            p.mean_user_rate.to_string(),
            p.scr_violations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EvalSummary {
    pub mean_secrecy: f64,
    pub mean_user_rate: f64,
    pub mean_reward: f64,
    pub frames: usize,
    pub scr_violations: usize,
    /// Every slot that carried data had adequate sensing behind it.
    pub data_slots_scr_ok: bool,
    /// Average user rate met the configured minimum.
    pub min_rate_satisfied: bool,
}

fn summarize(cfg: &ScenarioConfig, log: &EpisodeLog) -> EvalSummary {
    let scr_min_db = linear_to_db(cfg.scr_min);
    EvalSummary {
        mean_secrecy: log.mean_secrecy,
        mean_user_rate: log.mean_user_rate,
        mean_reward: log.mean_reward,
        frames: log.schedule.frame_count(),
        scr_violations: log.scr_violations,
        data_slots_scr_ok: log
            .outcomes
            .iter()
            .filter(|o| o.user_rate > 0.0)
            .all(|o| o.scr_frozen_db >= scr_min_db - 1e-9),
        min_rate_satisfied: log.min_rate_satisfied,
    }
}

/// Evaluates a checkpoint on a scenario file; writes the per-slot trace,
/// per-frame schedule statistics, and a JSON summary.
pub fn cmd_eval(checkpoint: &Path, scenario: &Path, out_dir: &Path) -> Result<EvalSummary> {
    let ckpt = Checkpoint::load(checkpoint)?;
    let spec = ScenarioSpec::load(scenario)?;
    fs::create_dir_all(out_dir)?;
    let track = Arc::new(spec.track.build(&ckpt.scenario)?);
    let phase0 = spec.phase0(&ckpt.scenario);
    let log = ppo::run_greedy_episode(&ckpt.scenario, &ckpt.params, track, phase0)?;

    write_trace_csv(&log, fs::File::create(out_dir.join("trace.csv"))?)?;
    write_frames_csv(&log, fs::File::create(out_dir.join("frames.csv"))?)?;
    let summary = summarize(&ckpt.scenario, &log);
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Checkpoint(format!("serialize summary: {e}")))?;
    fs::write(out_dir.join("summary.json"), json)?;
    Ok(summary)
}

/// One row of the sweep CSV.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub speed: f64,
    pub method: &'static str,
    pub mean_secrecy: f64,
    pub std_secrecy: f64,
    pub mean_user_rate: f64,
    pub scr_violation_rate: f64,
    pub min_rate_satisfied_frac: f64,
}

pub const SWEEP_METHODS: [&str; 3] = ["ppo", "equal_aperture", "random"];

fn aggregate_logs(speed: f64, method: &'static str, logs: &[EpisodeLog]) -> SweepRow {
    let k = logs.len() as f64;
    let mean = logs.iter().map(|l| l.mean_secrecy).sum::<f64>() / k;
    let std = if logs.len() > 1 {
        (logs
            .iter()
            .map(|l| (l.mean_secrecy - mean) * (l.mean_secrecy - mean))
            .sum::<f64>()
            / (k - 1.0))
            .sqrt()
    } else {
        0.0
    };
    let comm_slots: usize = logs
        .iter()
        .map(|l| l.outcomes.iter().filter(|o| o.action.as_flag() == 0).count())
        .sum();
    let violations: usize = logs.iter().map(|l| l.scr_violations).sum();
    SweepRow {
        speed,
        method,
        mean_secrecy: mean,
        std_secrecy: std,
        mean_user_rate: logs.iter().map(|l| l.mean_user_rate).sum::<f64>() / k,
        scr_violation_rate: violations as f64 / comm_slots.max(1) as f64,
        min_rate_satisfied_frac: logs.iter().filter(|l| l.min_rate_satisfied).count() as f64 / k,
    }
}

/// Held-out circular evaluation tracks for one sweep point. Shared across
/// methods so the comparison sees identical adversary motion.
pub fn sweep_tracks(
    cfg: &ScenarioConfig,
    radius: f64,
    speed: f64,
    count: usize,
    seed: u64,
    speed_idx: usize,
) -> Result<Vec<(Arc<EveTrack>, f64)>> {
    (0..count)
        .map(|k| {
            let track_seed = derive_seed(seed, stream::SWEEP, (speed_idx * 1000 + k) as u64);
            let track = gen_eve_circular(cfg, radius, speed, track_seed)?;
            Ok((Arc::new(track), cfg.abs_phase0))
        })
        .collect()
}

/// Computes all three method rows for one sweep speed.
pub fn sweep_point(
    ckpt: &Checkpoint,
    speed: f64,
    speed_idx: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let cfg = &ckpt.scenario;
    let tracks = sweep_tracks(
        cfg,
        ckpt.evaluation.circle_radius,
        speed,
        ckpt.evaluation.tracks_per_point,
        seed,
        speed_idx,
    )?;

    // Learned policy, greedy.
    let ppo_logs: Vec<EpisodeLog> = tracks
        .iter()
        .map(|(t, p)| ppo::run_greedy_episode(cfg, &ckpt.params, t.clone(), *p))
        .collect::<Result<_>>()?;

    // Equal-aperture winner over the same tracks.
    let grid = equal_aperture_grid_search(cfg, &tracks, &ckpt.baselines)?;
    let grid_logs: Vec<EpisodeLog> = tracks
        .iter()
        .map(|(t, p)| {
            crate::baselines::equal_aperture(cfg, t.clone(), *p, grid.best.aperture, grid.best.frames)
        })
        .collect::<Result<_>>()?;

    // Random allocation: trials spread across the tracks.
    let trials = ckpt.evaluation.sweep_random_trials.max(1);
    let per_track = trials.div_ceil(tracks.len());
    let mut rand_secrecy = Vec::new();
    let mut rand_user = 0.0;
    let mut rand_viol = 0.0;
    let mut rand_satisfied = 0.0;
    for (k, (t, p)) in tracks.iter().enumerate() {
        let stats = random_allocation(
            cfg,
            t.clone(),
            *p,
            derive_seed(seed, stream::RANDOM_BASELINE, (speed_idx * 1000 + k) as u64),
            per_track,
            &ckpt.baselines,
        )?;
        rand_secrecy.push(stats.mean_secrecy);
        rand_user += stats.mean_user_rate;
        rand_viol += stats.scr_violation_rate;
        rand_satisfied += stats.min_rate_satisfied_frac;
    }
    let kt = tracks.len() as f64;
    let rand_mean = rand_secrecy.iter().sum::<f64>() / kt;
    let rand_std = if rand_secrecy.len() > 1 {
        (rand_secrecy
            .iter()
            .map(|s| (s - rand_mean) * (s - rand_mean))
            .sum::<f64>()
            / (kt - 1.0))
            .sqrt()
    } else {
        0.0
    };

    Ok(vec![
        aggregate_logs(speed, "ppo", &ppo_logs),
        aggregate_logs(speed, "equal_aperture", &grid_logs),
        SweepRow {
            speed,
            method: "random",
            mean_secrecy: rand_mean,
            std_secrecy: rand_std,
            mean_user_rate: rand_user / kt,
            scr_violation_rate: rand_viol / kt,
            min_rate_satisfied_frac: rand_satisfied / kt,
        },
    ])
}

/// Speed sweep comparing the learned policy against both benchmarks on
/// circular tracks around the user. Points run in parallel; rows are merged
/// in (speed, method) order.
pub fn cmd_sweep(checkpoint: &Path, speeds: &[f64], out_dir: &Path, seed: u64) -> Result<PathBuf> {
    let ckpt = Checkpoint::load(checkpoint)?;
    if speeds.is_empty() {
        return Err(Error::Config("sweep needs at least one speed".into()));
    }
    for &s in speeds {
        if s < 0.0 || s > ckpt.scenario.eve_speed_max {
            return Err(Error::SpeedLimit {
                speed: s,
                max: ckpt.scenario.eve_speed_max,
            });
        }
    }
    fs::create_dir_all(out_dir)?;

    let mut cells: Vec<Result<Vec<SweepRow>>> = Vec::with_capacity(speeds.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = speeds
            .iter()
            .enumerate()
            .map(|(idx, &speed)| {
                let ckpt = &ckpt;
                scope.spawn(move || sweep_point(ckpt, speed, idx, seed))
            })
            .collect();
        for h in handles {
            cells.push(h.join().expect("sweep worker panicked"));
        }
    });

    let path = out_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "speed_mps",
        "method",
        "mean_secrecy",
        "std_secrecy",
        "mean_user_rate",
        "scr_violation_rate",
        "r_min_satisfied",
    ])?;
    for cell in cells {
        for row in cell? {
            w.write_record([
                row.speed.to_string(),
                row.method.to_string(),
                row.mean_secrecy.to_string(),
                row.std_secrecy.to_string(),
                row.mean_user_rate.to_string(),
                row.scr_violation_rate.to_string(),
                row.min_rate_satisfied_frac.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// Benchmark metrics on one scenario: the full equal-aperture grid table
/// (winner flagged) plus the random-allocation row.
pub fn cmd_baseline(
    config_path: &Path,
    scenario: &Path,
    out_dir: &Path,
    seed: u64,
) -> Result<PathBuf> {
    let app: AppConfig = load_config(config_path)?;
    let spec = ScenarioSpec::load(scenario)?;
    fs::create_dir_all(out_dir)?;
    let track = Arc::new(spec.track.build(&app.scenario)?);
    let phase0 = spec.phase0(&app.scenario);

    let grid = equal_aperture_grid_search(
        &app.scenario,
        &[(track.clone(), phase0)],
        &app.baselines,
    )?;
    let rand_stats = random_allocation(
        &app.scenario,
        track,
        phase0,
        derive_seed(seed, stream::RANDOM_BASELINE, 0),
        app.baselines.random_trials,
        &app.baselines,
    )?;

    let path = out_dir.join("metrics.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "method",
        "aperture",
        "frames",
        "trials",
        "mean_secrecy",
        "std_secrecy",
        "mean_user_rate",
        "scr_violation_rate",
        "r_min_satisfied",
        "winner",
    ])?;
    for e in &grid.table {
        let winner = e.aperture == grid.best.aperture && e.frames == grid.best.frames;
        w.write_record([
            "equal_aperture".to_string(),
            e.aperture.to_string(),
            e.frames.to_string(),
            "1".to_string(),
            e.mean_secrecy.to_string(),
            "0".to_string(),
            e.mean_user_rate.to_string(),
            "0".to_string(),
            e.min_rate_satisfied_frac.to_string(),
            (winner as u8).to_string(),
        ])?;
    }
    w.write_record([
        "random".to_string(),
        String::new(),
        String::new(),
        rand_stats.trials.to_string(),
        rand_stats.mean_secrecy.to_string(),
        rand_stats.std_secrecy.to_string(),
        rand_stats.mean_user_rate.to_string(),
        rand_stats.scr_violation_rate.to_string(),
        rand_stats.min_rate_satisfied_frac.to_string(),
        "0".to_string(),
    ])?;
    w.flush()?;
    Ok(path)
}

/// Exit code contract: 0 success, 2 configuration error, 3 runtime error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::ConfigIo { .. }
        | Error::ConfigParse { .. }
        | Error::SpeedLimit { .. }
        | Error::TrackLength { .. } => 2,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn desk_config_text() -> String {
        let base = r#"
[system]
slots = 60
slot_duration_s = 0.1
roi_radius_m = 100.0
orbit_radius_m = 200.0
abs_speed_mps = 10.0
altitude_m = 100.0
radar_wavelength_m = 0.12
carrier_wavelength_m = 0.12
radar_bandwidth_hz = 1e9
comm_bandwidth_hz = 1e8
target_rcs_dbsm = 5.0
backscatter_db = -5.0
scr_min_db = 10.0
total_antennas = 12
beta0_db = -30.0
p_com_max_w = 1.0
noise_user_dbm = -50.0
noise_eve_dbm = -50.0
user_position_m = [-50.0, -20.0, 0.0]
eve_speed_max_mps = 28.0
eve_accel_max_mps2 = 2.0
rate_min_bps_hz = 1.0
rho_rate = 0.5
rho_scr = 0.5
alpha_step = 0.01
theta_step_rad = 0.01

[training]
iterations = 2
episodes_per_iteration = 2
hidden_layers = [8]
minibatch = 32
epochs = 2
eval_every = 1
eval_episodes = 1

[baselines]
grid_aperture_max = 6
grid_frames_max = 6
random_trials = 5

[evaluation]
tracks_per_point = 2
sweep_random_trials = 4
"#;
        base.to_string()
    }

    #[test]
    fn train_eval_sweep_baseline_pipeline() {
        let dir = std::env::temp_dir().join(format!("sarsec_cli_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let config = dir.join("config.toml");
        fs::write(&config, desk_config_text()).unwrap();
        let scenario = dir.join("scenario.toml");
        fs::write(
            &scenario,
            "kind = \"circular\"\nradius_m = 55.0\nspeed_mps = 10.0\nseed = 2\n",
        )
        .unwrap();

        let train_out = dir.join("train");
        let artifacts = cmd_train(&config, &train_out, 1).unwrap();
        assert!(artifacts.checkpoint.exists());
        assert!(artifacts.curve.exists());
        let snapshot = fs::read_to_string(&artifacts.config_snapshot).unwrap();
        assert!(snapshot.starts_with("# sha256: "));

        let eval_out = dir.join("eval");
        let summary = cmd_eval(&artifacts.checkpoint, &scenario, &eval_out).unwrap();
        assert!(eval_out.join("trace.csv").exists());
        assert!(eval_out.join("frames.csv").exists());
        assert!(eval_out.join("summary.json").exists());
        assert!(summary.data_slots_scr_ok);
        // Summary secrecy equals the mean of the trace column.
        let trace = fs::read_to_string(eval_out.join("trace.csv")).unwrap();
        let mut sum = 0.0;
        let mut count = 0;
        for line in trace.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            sum += fields[6].parse::<f64>().unwrap();
            count += 1;
        }
        assert_eq!(count, 60);
        assert!((sum / 60.0 - summary.mean_secrecy).abs() < 1e-12);

        let sweep_out = dir.join("sweep");
        let sweep_path = cmd_sweep(&artifacts.checkpoint, &[6.0, 10.0], &sweep_out, 3).unwrap();
        let text = fs::read_to_string(&sweep_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 3, "one row per (speed, method)");
        for line in &lines[1..] {
            let method = line.split(',').nth(1).unwrap();
            assert!(SWEEP_METHODS.contains(&method), "unknown method {method}");
        }

        let base_out = dir.join("baseline");
        let metrics = cmd_baseline(&config, &scenario, &base_out, 5).unwrap();
        let text = fs::read_to_string(&metrics).unwrap();
        assert!(text.lines().count() > 2);
        let winners = text
            .lines()
            .skip(1)
            .filter(|l| l.ends_with(",1"))
            .count();
        assert_eq!(winners, 1, "exactly one winner row");
        assert!(text.lines().last().unwrap().starts_with("random,"));

        // Excessive speed is a config-class error (exit code 2).
        let err = cmd_sweep(&artifacts.checkpoint, &[99.0], &sweep_out, 3).unwrap_err();
        assert_eq!(exit_code(&err), 2);

        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn identical_seeds_reproduce_identical_outputs() {
        let dir = std::env::temp_dir().join(format!("sarsec_det_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let config = dir.join("config.toml");
        fs::write(&config, desk_config_text()).unwrap();

        let out_a = dir.join("a");
        let out_b = dir.join("b");
        cmd_train(&config, &out_a, 7).unwrap();
        cmd_train(&config, &out_b, 7).unwrap();
        let curve_a = fs::read(out_a.join("training_curve.csv")).unwrap();
        let curve_b = fs::read(out_b.join("training_curve.csv")).unwrap();
        assert_eq!(curve_a, curve_b, "training curves must be byte-identical");
        let ckpt_a = fs::read(out_a.join("checkpoint.json")).unwrap();
        let ckpt_b = fs::read(out_b.join("checkpoint.json")).unwrap();
        assert_eq!(ckpt_a, ckpt_b, "checkpoints must be byte-identical");

        fs::remove_dir_all(&dir).ok();
    }
}

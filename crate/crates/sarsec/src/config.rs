//! System constants and experiment configuration.
//!
//! Configuration files are TOML trees with four sections: `[system]`
//! (physical constants, required), `[training]`, `[baselines]`, and
//! `[evaluation]` (all optional, defaulted). Fields whose on-disk unit is
//! dB are converted once at load time with `linear = 10^(dB/10)`
//! (`watts = 10^(dBm/10) * 1e-3` for dBm); everything downstream operates
//! on linear quantities.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::sar::VelocityBound;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

/// Resolved physical/system constants (all linear units).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Episode horizon in slots (N).
    pub slots: usize,
    /// Slot duration in seconds.
    pub slot_duration: f64,
    /// Region-of-interest radius in meters.
    pub roi_radius: f64,
    /// Platform orbit radius in meters.
    pub orbit_radius: f64,
    /// Platform speed in m/s.
    pub abs_speed: f64,
    /// Platform altitude in meters.
    pub altitude: f64,
    /// Radar wavelength in meters.
    pub radar_wavelength: f64,
    /// Carrier wavelength in meters (half-wavelength element spacing).
    pub carrier_wavelength: f64,
    /// Radar bandwidth in Hz.
    pub radar_bandwidth: f64,
    /// Communication bandwidth in Hz (metadata; rates are per-Hz).
    pub comm_bandwidth: f64,
    /// Target radar cross section, linear m^2.
    pub target_rcs: f64,
    /// Terrain backscatter coefficient, linear.
    pub backscatter: f64,
    /// Minimum signal-to-clutter ratio, linear.
    pub scr_min: f64,
    /// Total antenna elements; two are reserved for sensing.
    pub total_antennas: usize,
    /// Channel power gain at 1 m reference distance, linear.
    pub beta0: f64,
    /// Maximum communication power in watts.
    pub p_com_max: f64,
    /// User receiver noise power in watts.
    pub noise_user: f64,
    /// Eavesdropper receiver noise power in watts.
    pub noise_eve: f64,
    /// Ground user position in meters (z must be 0).
    pub user_pos: Vec3,
    /// Eavesdropper maximum speed in m/s.
    pub eve_speed_max: f64,
    /// Eavesdropper maximum acceleration in m/s^2.
    pub eve_accel_max: f64,
    /// Minimum average user rate, bits/s/Hz.
    pub rate_min: f64,
    /// Penalty weight on the average-rate constraint.
    pub rho_rate: f64,
    /// Penalty weight on communicating with inadequate sensing.
    pub rho_scr: f64,
    /// Power-split grid step.
    pub alpha_step: f64,
    /// Azimuth grid step in radians.
    pub theta_step: f64,
    /// Speed of light in m/s.
    pub light_speed: f64,
    /// Initial orbit phase of the platform in radians.
    pub abs_phase0: f64,
    /// How the eavesdropper speed bound evolves between estimates.
    pub velocity_bound: VelocityBound,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            slots: 2500,
            slot_duration: 0.1,
            roi_radius: 100.0,
            orbit_radius: 200.0,
            abs_speed: 10.0,
            altitude: 100.0,
            radar_wavelength: 0.12,
            carrier_wavelength: 0.12,
            radar_bandwidth: 1e9,
            comm_bandwidth: 1e8,
            target_rcs: db_to_linear(5.0),
            backscatter: db_to_linear(-5.0),
            scr_min: db_to_linear(10.0),
            total_antennas: 12,
            beta0: db_to_linear(-30.0),
            p_com_max: 1.0,
            noise_user: dbm_to_watts(-50.0),
            noise_eve: dbm_to_watts(-50.0),
            user_pos: Vec3::new(-50.0, -20.0, 0.0),
            eve_speed_max: 28.0,
            eve_accel_max: 2.0,
            rate_min: 1.0,
            rho_rate: 0.5,
            rho_scr: 0.5,
            alpha_step: 0.01,
            theta_step: 0.01,
            light_speed: 3e8,
            abs_phase0: 0.0,
            velocity_bound: VelocityBound::Capped,
        }
    }
}

impl ScenarioConfig {
    /// Antenna elements available for downlink communication.
    pub fn comm_antennas(&self) -> usize {
        self.total_antennas - 2
    }

    /// Incidence angle toward the scene, radians.
    pub fn incidence_angle(&self) -> f64 {
        (self.orbit_radius / self.altitude).atan()
    }

    /// Ground-range resolution in meters (aperture independent).
    pub fn range_resolution(&self) -> f64 {
        self.light_speed / (2.0 * self.radar_bandwidth * self.incidence_angle().sin())
    }

    /// Signal-to-clutter ratio gained per sensing slot, linear.
    pub fn scr_per_slot(&self) -> f64 {
        4.0 * self.target_rcs
            * self.abs_speed
            * self.slot_duration
            * self.radar_bandwidth
            * self.incidence_angle().sin()
            / (self.backscatter * self.light_speed * self.radar_wavelength * self.orbit_radius)
    }

    /// Total mission duration in seconds.
    pub fn mission_duration(&self) -> f64 {
        self.slots as f64 * self.slot_duration
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be strictly positive, got {v}")))
            }
        }
        if self.slots <= 2 {
            return Err(Error::Config(format!(
                "slots must exceed 2, got {}",
                self.slots
            )));
        }
        positive("slot_duration_s", self.slot_duration)?;
        positive("roi_radius_m", self.roi_radius)?;
        positive("orbit_radius_m", self.orbit_radius)?;
        if self.orbit_radius <= self.roi_radius {
            return Err(Error::Config(format!(
                "orbit_radius_m ({}) must exceed roi_radius_m ({})",
                self.orbit_radius, self.roi_radius
            )));
        }
        positive("abs_speed_mps", self.abs_speed)?;
        positive("altitude_m", self.altitude)?;
        positive("radar_wavelength_m", self.radar_wavelength)?;
        positive("carrier_wavelength_m", self.carrier_wavelength)?;
        positive("radar_bandwidth_hz", self.radar_bandwidth)?;
        positive("comm_bandwidth_hz", self.comm_bandwidth)?;
        positive("target_rcs (linear)", self.target_rcs)?;
        positive("backscatter (linear)", self.backscatter)?;
        positive("scr_min (linear)", self.scr_min)?;
        if self.total_antennas < 3 {
            return Err(Error::Config(format!(
                "total_antennas must be at least 3, got {}",
                self.total_antennas
            )));
        }
        positive("beta0 (linear)", self.beta0)?;
        positive("p_com_max_w", self.p_com_max)?;
        positive("noise_user (W)", self.noise_user)?;
        positive("noise_eve (W)", self.noise_eve)?;
        if self.user_pos.z != 0.0 {
            return Err(Error::Config(format!(
                "user_position_m must lie on the ground plane, got z = {}",
                self.user_pos.z
            )));
        }
        if self.eve_speed_max < 0.0 || self.eve_accel_max < 0.0 {
            return Err(Error::Config(
                "eve_speed_max_mps and eve_accel_max_mps2 must be nonnegative".into(),
            ));
        }
        if self.rate_min < 0.0 || self.rho_rate < 0.0 || self.rho_scr < 0.0 {
            return Err(Error::Config(
                "rate_min_bps_hz, rho_rate, and rho_scr must be nonnegative".into(),
            ));
        }
        if !(self.alpha_step > 0.0 && self.alpha_step <= 1.0) {
            return Err(Error::Config(format!(
                "alpha_step must lie in (0, 1], got {}",
                self.alpha_step
            )));
        }
        positive("theta_step_rad", self.theta_step)?;
        positive("light_speed_mps", self.light_speed)?;
        Ok(())
    }
}

/// PPO training hyperparameters (none are fixed by the system model).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub iterations: usize,
    pub episodes_per_iteration: usize,
    pub hidden_layers: Vec<usize>,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch: usize,
    pub entropy_coeff: f64,
    pub value_coeff: f64,
    /// Linear learning-rate anneal: final lr as a fraction of the initial
    /// (1.0 disables).
    pub lr_final_frac: f64,
    /// Linear entropy-bonus anneal: final coefficient as a fraction of the
    /// initial (1.0 disables).
    pub entropy_final_frac: f64,
    /// Evaluate and checkpoint every this many iterations.
    pub eval_every: usize,
    /// Held-out episodes per evaluation.
    pub eval_episodes: usize,
    /// Randomize the platform orbit phase per training episode.
    pub randomize_abs_phase: bool,
    /// Running observation normalization (fixed scaling is already applied
    /// by the environment, so this is off by default).
    pub normalize_observations: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            iterations: 200,
            episodes_per_iteration: 8,
            hidden_layers: vec![64, 64],
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            learning_rate: 3e-4,
            epochs: 4,
            minibatch: 256,
            entropy_coeff: 0.01,
            value_coeff: 0.5,
            lr_final_frac: 0.1,
            entropy_final_frac: 0.1,
            eval_every: 10,
            eval_episodes: 4,
            randomize_abs_phase: true,
            normalize_observations: false,
        }
    }
}

/// Bounds for the non-learning benchmark schedulers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Largest aperture the random scheduler may draw.
    pub aperture_max: usize,
    /// Largest communication run the random scheduler may draw.
    pub comm_max: usize,
    /// Upper end of the equal-aperture grid search over aperture length.
    pub grid_aperture_max: usize,
    /// Upper end of the equal-aperture grid search over frame count.
    pub grid_frames_max: usize,
    /// Realizations for the random-allocation benchmark.
    pub random_trials: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            aperture_max: 40,
            comm_max: 100,
            grid_aperture_max: 40,
            grid_frames_max: 60,
            random_trials: 1000,
        }
    }
}

/// Evaluation / sweep protocol knobs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Held-out tracks per sweep point.
    pub tracks_per_point: usize,
    /// Random-allocation realizations per sweep point.
    pub sweep_random_trials: usize,
    /// Radius of the circular evaluation track around the user, meters.
    pub circle_radius: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tracks_per_point: 3,
            sweep_random_trials: 200,
            circle_radius: 55.0,
        }
    }
}

/// Everything a command needs, resolved from one file.
#[derive(Clone, Debug)]
pub struct AppConfig {
    pub scenario: ScenarioConfig,
    pub training: TrainingConfig,
    pub baselines: BaselineConfig,
    pub evaluation: EvalConfig,
    /// Original file contents, kept for snapshotting.
    pub source: String,
    /// SHA-256 of the file contents, hex.
    pub hash: String,
}

/// On-disk `[system]` section; dB-valued fields carry their unit in the name.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    slots: usize,
    slot_duration_s: f64,
    roi_radius_m: f64,
    orbit_radius_m: f64,
    abs_speed_mps: f64,
    altitude_m: f64,
    radar_wavelength_m: f64,
    carrier_wavelength_m: f64,
    radar_bandwidth_hz: f64,
    comm_bandwidth_hz: f64,
    target_rcs_dbsm: f64,
    backscatter_db: f64,
    scr_min_db: f64,
    total_antennas: usize,
    beta0_db: f64,
    p_com_max_w: f64,
    noise_user_dbm: f64,
    noise_eve_dbm: f64,
    user_position_m: [f64; 3],
    eve_speed_max_mps: f64,
    eve_accel_max_mps2: f64,
    rate_min_bps_hz: f64,
    rho_rate: f64,
    rho_scr: f64,
    alpha_step: f64,
    theta_step_rad: f64,
    #[serde(default = "default_light_speed")]
    light_speed_mps: f64,
    #[serde(default)]
    abs_phase0_rad: f64,
    #[serde(default)]
    velocity_bound: VelocityBound,
}

fn default_light_speed() -> f64 {
    3e8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    system: SystemSection,
    #[serde(default)]
    training: TrainingConfig,
    #[serde(default)]
    baselines: BaselineConfig,
    #[serde(default)]
    evaluation: EvalConfig,
}

impl From<SystemSection> for ScenarioConfig {
    fn from(s: SystemSection) -> Self {
        ScenarioConfig {
            slots: s.slots,
            slot_duration: s.slot_duration_s,
            roi_radius: s.roi_radius_m,
            orbit_radius: s.orbit_radius_m,
            abs_speed: s.abs_speed_mps,
            altitude: s.altitude_m,
            radar_wavelength: s.radar_wavelength_m,
            carrier_wavelength: s.carrier_wavelength_m,
            radar_bandwidth: s.radar_bandwidth_hz,
            comm_bandwidth: s.comm_bandwidth_hz,
            target_rcs: db_to_linear(s.target_rcs_dbsm),
            backscatter: db_to_linear(s.backscatter_db),
            scr_min: db_to_linear(s.scr_min_db),
            total_antennas: s.total_antennas,
            beta0: db_to_linear(s.beta0_db),
            p_com_max: s.p_com_max_w,
            noise_user: dbm_to_watts(s.noise_user_dbm),
            noise_eve: dbm_to_watts(s.noise_eve_dbm),
            user_pos: s.user_position_m.into(),
            eve_speed_max: s.eve_speed_max_mps,
            eve_accel_max: s.eve_accel_max_mps2,
            rate_min: s.rate_min_bps_hz,
            rho_rate: s.rho_rate,
            rho_scr: s.rho_scr,
            alpha_step: s.alpha_step,
            theta_step: s.theta_step_rad,
            light_speed: s.light_speed_mps,
            abs_phase0: s.abs_phase0_rad,
            velocity_bound: s.velocity_bound,
        }
    }
}

/// Loads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<AppConfig> {
    let source = fs::read_to_string(path).map_err(|source| Error::ConfigIo {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&source, path)
}

/// Parses configuration text; `path` is only used in error messages.
pub fn parse_config(source: &str, path: &Path) -> Result<AppConfig> {
    let file: ConfigFile = toml::from_str(source).map_err(|e| Error::ConfigParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let scenario: ScenarioConfig = file.system.into();
    scenario.validate()?;
    if file.training.minibatch == 0 || file.training.episodes_per_iteration == 0 {
        return Err(Error::Config(
            "training.minibatch and training.episodes_per_iteration must be nonzero".into(),
        ));
    }
    let hash = hex::encode(Sha256::digest(source.as_bytes()));
    Ok(AppConfig {
        scenario,
        training: file.training,
        baselines: file.baselines,
        evaluation: file.evaluation,
        source: source.to_string(),
        hash,
    })
}

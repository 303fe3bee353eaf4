//! C ABI over the simulator core: configuration, track generation, the
//! scheduling environment, and the robust power-split solver.
//!
//! Conventions:
//! - Handles (`SarsecConfig`, `SarsecTrack`, `SarsecEnv`) are opaque;
//!   create/free in matched pairs. Handles are not thread-safe; use one
//!   per thread or synchronize externally.
//! - Fallible functions return a [`SarsecStatus`]; on any non-OK status
//!   the thread-local message from [`sarsec_last_error_message`] explains
//!   the failure.
//! - Slot indices are 1-based, matching the trace schema. Actions encode
//!   1 = sense, 0 = communicate.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use sarsec::config::{linear_to_db, load_config, ScenarioConfig};
use sarsec::env::{Action, Env};
use sarsec::geom::Vec3;
use sarsec::sar::{self, UncertaintyState};
use sarsec::scenario::{self, abs_pose, EveTrack};
use sarsec::secrecy::robust_power_allocation;
use sarsec::Error;

/// Status codes for fallible calls.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SarsecStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidUtf8 = -2,
    ConfigError = -3,
    DomainError = -4,
    MaskedAction = -5,
    IoError = -6,
    Internal = -99,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SarsecStatus {
    match err {
        Error::Config(_) | Error::ConfigParse { .. } => SarsecStatus::ConfigError,
        Error::ConfigIo { .. } | Error::Io(_) | Error::Csv(_) => SarsecStatus::IoError,
        Error::MaskedAction { .. } => SarsecStatus::MaskedAction,
        _ => SarsecStatus::DomainError,
    }
}

fn fail(err: Error) -> SarsecStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

/// Returns a copy of the last error message on this thread, or NULL if no
/// error occurred. Free with [`sarsec_string_free`].
#[no_mangle]
pub extern "C" fn sarsec_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `sarsec_*` function and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sarsec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opaque configuration handle.
pub struct SarsecConfig(ScenarioConfig);

/// Opaque eavesdropper-track handle.
pub struct SarsecTrack(Arc<EveTrack>);

/// Opaque environment handle (one episode at a time).
pub struct SarsecEnv(Env);

/// Built-in default configuration.
#[no_mangle]
pub extern "C" fn sarsec_config_default() -> *mut SarsecConfig {
    Box::into_raw(Box::new(SarsecConfig(ScenarioConfig::default())))
}

/// Loads the `[system]` section of a configuration file. Returns NULL on
/// failure (see [`sarsec_last_error_message`]).
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sarsec_config_load(path: *const c_char) -> *mut SarsecConfig {
    if path.is_null() {
        set_error("path is NULL".into());
        return ptr::null_mut();
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        set_error("path is not valid UTF-8".into());
        return ptr::null_mut();
    };
    match load_config(Path::new(path)) {
        Ok(app) => Box::into_raw(Box::new(SarsecConfig(app.scenario))),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `cfg` must come from `sarsec_config_default`/`sarsec_config_load` and
/// not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sarsec_config_free(cfg: *mut SarsecConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Episode horizon in slots.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn sarsec_config_slots(cfg: *const SarsecConfig) -> u32 {
    if cfg.is_null() {
        return 0;
    }
    (*cfg).0.slots as u32
}

/// Azimuth resolution in meters after `aperture_slots` sensing slots.
///
/// # Safety
/// `cfg` must be live; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn sarsec_azimuth_resolution(
    cfg: *const SarsecConfig,
    aperture_slots: u32,
    out: *mut f64,
) -> SarsecStatus {
    if cfg.is_null() || out.is_null() {
        set_error("NULL argument".into());
        return SarsecStatus::NullPointer;
    }
    match sar::azimuth_resolution(&(*cfg).0, aperture_slots as usize) {
        Ok(v) => {
            *out = v;
            SarsecStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Signal-to-clutter ratio in dB after `aperture_slots` sensing slots.
///
/// # Safety
/// `cfg` must be live; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn sarsec_scr_db(
    cfg: *const SarsecConfig,
    aperture_slots: u32,
    out: *mut f64,
) -> SarsecStatus {
    if cfg.is_null() || out.is_null() {
        set_error("NULL argument".into());
        return SarsecStatus::NullPointer;
    }
    match sar::scr(&(*cfg).0, aperture_slots as usize) {
        Ok(v) => {
            *out = linear_to_db(v);
            SarsecStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Smallest aperture (slots) whose SCR clears the configured threshold.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn sarsec_min_feasible_aperture(cfg: *const SarsecConfig) -> u32 {
    if cfg.is_null() {
        return 0;
    }
    sar::min_feasible_aperture(&(*cfg).0) as u32
}

/// Circular track around the user. Returns NULL on invalid parameters.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn sarsec_track_circular(
    cfg: *const SarsecConfig,
    radius_m: f64,
    speed_mps: f64,
    seed: u64,
) -> *mut SarsecTrack {
    if cfg.is_null() {
        set_error("cfg is NULL".into());
        return ptr::null_mut();
    }
    match scenario::gen_eve_circular(&(*cfg).0, radius_m, speed_mps, seed) {
        Ok(t) => Box::into_raw(Box::new(SarsecTrack(Arc::new(t)))),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Straight-line track with sinusoidally oscillating speed.
///
/// # Safety
/// `cfg` must be live; `start_m` must point to three readable doubles.
#[no_mangle]
pub unsafe extern "C" fn sarsec_track_linear_oscillating(
    cfg: *const SarsecConfig,
    heading_rad: f64,
    v_lo_mps: f64,
    v_hi_mps: f64,
    period_slots: u32,
    start_m: *const f64,
    seed: u64,
) -> *mut SarsecTrack {
    if cfg.is_null() || start_m.is_null() {
        set_error("NULL argument".into());
        return ptr::null_mut();
    }
    let start = Vec3::new(*start_m, *start_m.add(1), *start_m.add(2));
    match scenario::gen_eve_linear_oscillating(
        &(*cfg).0,
        heading_rad,
        v_lo_mps,
        v_hi_mps,
        period_slots as usize,
        start,
        seed,
    ) {
        Ok(t) => Box::into_raw(Box::new(SarsecTrack(Arc::new(t)))),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Random-acceleration walk confined near the region of interest.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn sarsec_track_random(
    cfg: *const SarsecConfig,
    seed: u64,
) -> *mut SarsecTrack {
    if cfg.is_null() {
        set_error("cfg is NULL".into());
        return ptr::null_mut();
    }
    let track = scenario::gen_eve_random(&(*cfg).0, seed);
    Box::into_raw(Box::new(SarsecTrack(Arc::new(track))))
}

/// # Safety
/// `track` must come from a `sarsec_track_*` constructor and not have been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn sarsec_track_free(track: *mut SarsecTrack) {
    if !track.is_null() {
        drop(Box::from_raw(track));
    }
}

/// Number of slots covered by the track.
///
/// # Safety
/// `track` must be a live track handle.
#[no_mangle]
pub unsafe extern "C" fn sarsec_track_len(track: *const SarsecTrack) -> u32 {
    if track.is_null() {
        return 0;
    }
    (*track).0.len() as u32
}

/// Ground-truth position at a 1-based slot.
///
/// # Safety
/// `track` must be live; `out_xyz` must point to three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sarsec_track_position(
    track: *const SarsecTrack,
    slot: u32,
    out_xyz: *mut f64,
) -> SarsecStatus {
    if track.is_null() || out_xyz.is_null() {
        set_error("NULL argument".into());
        return SarsecStatus::NullPointer;
    }
    let t = &(*track).0;
    if slot < 1 || slot as usize > t.len() {
        set_error(format!("slot {slot} out of range 1..={}", t.len()));
        return SarsecStatus::DomainError;
    }
    let p = t.position(slot as usize);
    *out_xyz = p.x;
    *out_xyz.add(1) = p.y;
    *out_xyz.add(2) = p.z;
    SarsecStatus::Ok
}

/// Per-slot outcome of an environment step.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SarsecStepOutcome {
    pub slot: u32,
    pub frame: u32,
    /// 1 = sense, 0 = communicate.
    pub action: i32,
    pub reward: f64,
    pub user_rate: f64,
    pub worst_eve_rate: f64,
    pub secrecy_rate: f64,
    pub alpha: f64,
    pub radius_m: f64,
    pub scr_frozen_db: f64,
    pub eve_speed_mps: f64,
    pub scr_penalty_fired: i32,
    pub done: i32,
}

/// Creates an episode environment over the given track. The track is
/// reference-counted; the handle may be freed independently.
///
/// # Safety
/// `cfg` and `track` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn sarsec_env_new(
    cfg: *const SarsecConfig,
    track: *const SarsecTrack,
    phase0_rad: f64,
    seed: u64,
) -> *mut SarsecEnv {
    if cfg.is_null() || track.is_null() {
        set_error("NULL argument".into());
        return ptr::null_mut();
    }
    match Env::new((*cfg).0.clone(), (*track).0.clone(), phase0_rad, seed) {
        Ok(env) => Box::into_raw(Box::new(SarsecEnv(env))),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `env` must come from `sarsec_env_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sarsec_env_free(env: *mut SarsecEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Resets the episode and writes the 6-component observation.
///
/// # Safety
/// `env` must be live; `obs_out` must point to six writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sarsec_env_reset(env: *mut SarsecEnv, obs_out: *mut f64) -> SarsecStatus {
    if env.is_null() || obs_out.is_null() {
        set_error("NULL argument".into());
        return SarsecStatus::NullPointer;
    }
    let obs = (*env).0.reset();
    write_obs(obs.to_array(), obs_out);
    SarsecStatus::Ok
}

unsafe fn write_obs(obs: [f64; 6], out: *mut f64) {
    for (i, v) in obs.into_iter().enumerate() {
        *out.add(i) = v;
    }
}

/// Current action mask: nonzero means permitted.
///
/// # Safety
/// All pointers must be valid; `env` must be live.
#[no_mangle]
pub unsafe extern "C" fn sarsec_env_mask(
    env: *const SarsecEnv,
    sense_allowed: *mut i32,
    communicate_allowed: *mut i32,
) -> SarsecStatus {
    if env.is_null() || sense_allowed.is_null() || communicate_allowed.is_null() {
        set_error("NULL argument".into());
        return SarsecStatus::NullPointer;
    }
    let mask = (*env).0.mask();
    *sense_allowed = mask.sense as i32;
    *communicate_allowed = mask.communicate as i32;
    SarsecStatus::Ok
}

/// Executes one slot (action: 1 = sense, 0 = communicate), writing the
/// next observation and the slot outcome.
///
/// # Safety
/// `env` must be live; `obs_out` must point to six writable doubles and
/// `outcome_out` to a writable [`SarsecStepOutcome`].
#[no_mangle]
pub unsafe extern "C" fn sarsec_env_step(
    env: *mut SarsecEnv,
    action: i32,
    obs_out: *mut f64,
    outcome_out: *mut SarsecStepOutcome,
) -> SarsecStatus {
    if env.is_null() || obs_out.is_null() || outcome_out.is_null() {
        set_error("NULL argument".into());
        return SarsecStatus::NullPointer;
    }
    let act = match action {
        1 => Action::Sense,
        0 => Action::Communicate,
        other => {
            set_error(format!("action must be 0 or 1, got {other}"));
            return SarsecStatus::DomainError;
        }
    };
    let env = &mut (*env).0;
    let result = catch_unwind(AssertUnwindSafe(|| env.step(act)));
    match result {
        Ok(Ok((obs, o))) => {
            write_obs(obs.to_array(), obs_out);
            *outcome_out = SarsecStepOutcome {
                slot: o.slot as u32,
                frame: o.frame as u32,
                action: o.action.as_flag() as i32,
                reward: o.reward,
                user_rate: o.user_rate,
                worst_eve_rate: o.worst_eve_rate,
                secrecy_rate: o.secrecy_rate,
                alpha: o.alpha,
                radius_m: o.radius,
                scr_frozen_db: o.scr_frozen_db,
                eve_speed_mps: o.eve_speed,
                scr_penalty_fired: o.scr_penalty_fired as i32,
                done: o.done as i32,
            };
            SarsecStatus::Ok
        }
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_error("internal panic during step".into());
            SarsecStatus::Internal
        }
    }
}

/// Output of the robust power-split search.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SarsecRobustResult {
    pub alpha_star: f64,
    pub secrecy_rate: f64,
    pub worst_theta_rad: f64,
    pub worst_distance_m: f64,
    pub worst_eve_rate: f64,
    pub user_rate: f64,
}

/// Solves the worst-case power split for an arbitrary geometry: platform
/// at 1-based `slot` with orbit phase `phase0_rad`, last estimate made at
/// `estimate_slot` with `aperture_slots`, centered at `center_m` moving at
/// `velocity_mps`. Pass a negative `radius_m` to derive the uncertainty
/// radius from the model; a nonnegative value overrides it.
///
/// # Safety
/// `cfg` must be live; `center_m`/`velocity_mps` must point to three
/// readable doubles each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sarsec_robust_power_allocation(
    cfg: *const SarsecConfig,
    slot: u32,
    phase0_rad: f64,
    estimate_slot: u32,
    aperture_slots: u32,
    center_m: *const f64,
    velocity_mps: *const f64,
    radius_m: f64,
    out: *mut SarsecRobustResult,
) -> SarsecStatus {
    if cfg.is_null() || center_m.is_null() || velocity_mps.is_null() || out.is_null() {
        set_error("NULL argument".into());
        return SarsecStatus::NullPointer;
    }
    let cfg = &(*cfg).0;
    let center = Vec3::new(*center_m, *center_m.add(1), *center_m.add(2));
    let velocity = Vec3::new(*velocity_mps, *velocity_mps.add(1), *velocity_mps.add(2));
    if center.z != 0.0 {
        set_error("estimate center must be on the ground plane (z = 0)".into());
        return SarsecStatus::DomainError;
    }
    let u = UncertaintyState {
        estimate_slot: estimate_slot as usize,
        aperture: aperture_slots as usize,
        center,
        velocity,
    };
    let pose = match abs_pose(cfg, slot as usize, phase0_rad) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let radius = if radius_m >= 0.0 {
        radius_m
    } else {
        match sar::uncertainty_radius(cfg, &u, slot as usize, cfg.velocity_bound) {
            Ok(r) => r,
            Err(e) => return fail(e),
        }
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        robust_power_allocation(cfg, &pose, &u, radius)
    }));
    match result {
        Ok(r) => {
            *out = SarsecRobustResult {
                alpha_star: r.alpha_star,
                secrecy_rate: r.secrecy_rate,
                worst_theta_rad: r.worst_theta,
                worst_distance_m: r.worst_distance,
                worst_eve_rate: r.worst_eve_rate,
                user_rate: r.user_rate,
            };
            SarsecStatus::Ok
        }
        Err(_) => {
            set_error("internal panic during power allocation".into());
            SarsecStatus::Internal
        }
    }
}

//! Aperture-dependent imaging metrics and the eavesdropper uncertainty
//! model.
//!
//! A sensing sub-frame of `L` slots yields a position estimate accurate to
//! the resolution cell (ground range x azimuth). Between estimates the
//! uncertainty disk grows with the elapsed time and the bounded target
//! kinematics.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// How the speed bound used for uncertainty growth treats the configured
/// maximum speed.
///
/// `Capped` clamps the propagated estimate at the maximum speed, so the
/// bound actually reflects the previously estimated velocity.
/// `Pessimistic` floors the bound at the maximum speed instead, which makes
/// it independent of the estimate for any recent estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityBound {
    #[default]
    Capped,
    Pessimistic,
}

/// Constants derived from the system geometry.
#[derive(Clone, Copy, Debug)]
pub struct SarDerived {
    /// Incidence angle, radians.
    pub eta: f64,
    /// Ground-range resolution, meters.
    pub delta_r: f64,
    /// Signal-to-clutter ratio per sensing slot, linear.
    pub scr_slope: f64,
}

impl SarDerived {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            eta: cfg.incidence_angle(),
            delta_r: cfg.range_resolution(),
            scr_slope: cfg.scr_per_slot(),
        }
    }
}

/// Azimuth resolution after an aperture of `aperture_slots` slots, meters.
pub fn azimuth_resolution(cfg: &ScenarioConfig, aperture_slots: usize) -> Result<f64> {
    if aperture_slots < 1 {
        return Err(Error::InvalidAperture(aperture_slots));
    }
    Ok(cfg.radar_wavelength * cfg.orbit_radius
        / (2.0 * cfg.abs_speed * aperture_slots as f64 * cfg.slot_duration))
}

/// Signal-to-clutter ratio after an aperture of `aperture_slots` slots,
/// linear. Grows linearly with the aperture.
pub fn scr(cfg: &ScenarioConfig, aperture_slots: usize) -> Result<f64> {
    if aperture_slots < 1 {
        return Err(Error::InvalidAperture(aperture_slots));
    }
    Ok(cfg.scr_per_slot() * aperture_slots as f64)
}

/// Smallest aperture whose SCR clears the configured threshold.
pub fn min_feasible_aperture(cfg: &ScenarioConfig) -> usize {
    let slope = cfg.scr_per_slot();
    let l = (cfg.scr_min / slope).ceil() as usize;
    // Ceil can land one short under floating-point division; scan locally.
    let mut l = l.max(1);
    while scr(cfg, l).unwrap() < cfg.scr_min {
        l += 1;
    }
    while l > 1 && scr(cfg, l - 1).unwrap() >= cfg.scr_min {
        l -= 1;
    }
    l
}

/// Latest position/velocity estimate and the aperture that produced it.
#[derive(Clone, Copy, Debug)]
pub struct UncertaintyState {
    /// Slot in which the estimate was produced (`l`).
    pub estimate_slot: usize,
    /// Aperture length backing the estimate, slots (`L`).
    pub aperture: usize,
    /// Estimated position (ground plane).
    pub center: Vec3,
    /// Estimated velocity.
    pub velocity: Vec3,
}

impl UncertaintyState {
    pub fn validate(&self) -> Result<()> {
        if self.aperture < 1 {
            return Err(Error::InvalidAperture(self.aperture));
        }
        if self.estimate_slot < 1 {
            return Err(Error::Domain("estimate slot must be at least 1".into()));
        }
        if self.center.z != 0.0 {
            return Err(Error::Domain("estimate center must be on the ground".into()));
        }
        Ok(())
    }
}

/// Upper bound on the eavesdropper speed at slot `n`, given the estimate.
///
/// The propagated term is `|v_est| + (n - l) * a_max * dt`; elapsed slots
/// are scaled by the slot duration so the units come out in m/s.
pub fn velocity_upper_bound(
    cfg: &ScenarioConfig,
    u: &UncertaintyState,
    n: usize,
    mode: VelocityBound,
) -> Result<f64> {
    if n < u.estimate_slot {
        return Err(Error::Domain(format!(
            "slot {n} precedes the estimate slot {}",
            u.estimate_slot
        )));
    }
    let elapsed = (n - u.estimate_slot) as f64 * cfg.slot_duration;
    let propagated = u.velocity.norm() + elapsed * cfg.eve_accel_max;
    Ok(match mode {
        VelocityBound::Capped => propagated.min(cfg.eve_speed_max),
        VelocityBound::Pessimistic => propagated.max(cfg.eve_speed_max),
    })
}

/// Radius of the uncertainty disk at slot `n`.
///
/// At the estimate slot this is half the resolution-cell diagonal; later
/// slots add the reachable distance under the speed bound. During a sensing
/// burst (`n < l`) the partial aperture accumulated by slot `n` applies.
pub fn uncertainty_radius(
    cfg: &ScenarioConfig,
    u: &UncertaintyState,
    n: usize,
    mode: VelocityBound,
) -> Result<f64> {
    u.validate()?;
    let lag = u.estimate_slot.saturating_sub(n);
    if lag >= u.aperture {
        return Err(Error::InvalidAperture(u.aperture - lag.min(u.aperture)));
    }
    let effective_aperture = u.aperture - lag;
    let da = azimuth_resolution(cfg, effective_aperture)?;
    let dr = cfg.range_resolution();
    let half_cell = 0.5 * (dr * dr + da * da).sqrt();
    let growth = if n > u.estimate_slot {
        let vbar = velocity_upper_bound(cfg, u, n, mode)?;
        (n - u.estimate_slot) as f64 * vbar * cfg.slot_duration
    } else {
        0.0
    };
    Ok(half_cell + growth)
}

/// Membership test for the ground-plane uncertainty disk.
pub fn in_region(u: &UncertaintyState, radius: f64, q: Vec3) -> bool {
    q.z == 0.0 && q.distance(u.center) <= radius
}

//! Transmit design, achievable rates, and the robust power-split solver.
//!
//! During a communication slot the array splits its power between an MRT
//! beam toward the user and artificial noise steered at the last
//! eavesdropper estimate. The eavesdropper's true position is only known
//! to lie in a disk, so the power split is chosen to maximize the
//! worst-case secrecy rate over that disk via an exhaustive grid over the
//! split factor and the candidate azimuth.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{azimuth, channel, inner, steering};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Vec3};
use crate::sar::UncertaintyState;
use crate::scenario::AbsPose;

/// Distance floor for worst-case candidates; the reference gain `beta0` is
/// defined at 1 m, so closer candidates would extrapolate the path-loss
/// model outside its domain.
pub const MIN_CANDIDATE_DISTANCE: f64 = 1.0;

/// Ties in the max-min objective within this margin resolve toward the
/// smaller power split.
const TIE_EPS: f64 = 1e-12;

/// Beamformer and artificial-noise configuration for one slot.
#[derive(Clone, Debug)]
pub struct TxDesign {
    /// MRT beamforming vector, `|w|^2 = (1 - alpha) * P`.
    pub beamformer: Vec<Complex64>,
    /// Unit-norm artificial-noise direction (toward the last estimate).
    pub an_direction: Vec<Complex64>,
    /// Power split: fraction assigned to artificial noise.
    pub alpha: f64,
}

impl TxDesign {
    pub fn beam_power(&self) -> f64 {
        self.beamformer.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn an_power(&self, cfg: &ScenarioConfig) -> f64 {
        self.alpha * cfg.p_com_max
    }
}

/// MRT beam toward the user plus AN steered at the estimate center, both
/// computed in the current pose's frame.
pub fn tx_design(cfg: &ScenarioConfig, pose: &AbsPose, u: &UncertaintyState, alpha: f64) -> TxDesign {
    let h_u = channel(cfg, pose, cfg.user_pos).expect("platform is above the ground plane");
    let h_an = channel(cfg, pose, u.center).expect("platform is above the ground plane");
    let hu_norm = h_u.norm_sq().sqrt();
    let han_norm = h_an.norm_sq().sqrt();
    let w_scale = ((1.0 - alpha) * cfg.p_com_max).sqrt() / hu_norm;
    TxDesign {
        beamformer: h_u.entries.iter().map(|e| e * w_scale).collect(),
        an_direction: h_an.entries.iter().map(|e| e / han_norm).collect(),
        alpha,
    }
}

fn rate(signal: f64, interference: f64, noise: f64) -> f64 {
    (1.0 + signal / (interference + noise)).log2()
}

/// Achievable user rate (bits/s/Hz) for the given power split.
pub fn user_rate(cfg: &ScenarioConfig, pose: &AbsPose, u: &UncertaintyState, alpha: f64) -> f64 {
    let design = tx_design(cfg, pose, u, alpha);
    let h_u = channel(cfg, pose, cfg.user_pos).expect("platform is above the ground plane");
    let signal = inner(&design.beamformer, &h_u.entries).norm_sqr();
    let an_leak =
        design.an_power(cfg) * inner(&design.an_direction, &h_u.entries).norm_sqr();
    rate(signal, an_leak, cfg.noise_user)
}

/// Achievable eavesdropper rate (bits/s/Hz) at a concrete ground position.
pub fn eve_rate_at(
    cfg: &ScenarioConfig,
    pose: &AbsPose,
    u: &UncertaintyState,
    alpha: f64,
    q_e: Vec3,
) -> Result<f64> {
    let design = tx_design(cfg, pose, u, alpha);
    let h_e = channel(cfg, pose, q_e)?;
    let signal = inner(&design.beamformer, &h_e.entries).norm_sqr();
    let jam = design.an_power(cfg) * inner(&design.an_direction, &h_e.entries).norm_sqr();
    Ok(rate(signal, jam, cfg.noise_eve))
}

/// Half-width of the azimuth interval covering the uncertainty disk as
/// seen from distance `d_hat`.
pub fn delta_theta(d_hat: f64, r_e: f64) -> f64 {
    if d_hat <= r_e {
        PI
    } else {
        (r_e / d_hat).asin()
    }
}

/// Closest range to the uncertainty disk along azimuth offset
/// `theta - theta_hat`: the smaller nonnegative root of the law-of-cosines
/// quadratic, floored at [`MIN_CANDIDATE_DISTANCE`].
pub fn worst_distance(d_hat: f64, theta_hat: f64, theta: f64, r_e: f64) -> Result<f64> {
    if d_hat <= 0.0 {
        return Err(Error::Domain(format!("d_hat must be positive, got {d_hat}")));
    }
    if r_e < 0.0 {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r_e}")));
    }
    let delta = wrap_angle(theta - theta_hat);
    let sin_d = delta.sin();
    let disc = r_e * r_e - (d_hat * sin_d) * (d_hat * sin_d);
    if disc < -1e-9 {
        return Err(Error::Geometry(disc));
    }
    let s = disc.max(0.0).sqrt();
    let near = d_hat * delta.cos() - s;
    let far = d_hat * delta.cos() + s;
    let d = if near >= 0.0 { near } else { far };
    Ok(d.max(MIN_CANDIDATE_DISTANCE))
}

/// Output of the robust power-split search.
#[derive(Clone, Copy, Debug)]
pub struct RobustResult {
    /// Maximizing power split.
    pub alpha_star: f64,
    /// Max-min secrecy rate, bits/s/Hz.
    pub secrecy_rate: f64,
    /// Azimuth of the inner minimizer.
    pub worst_theta: f64,
    /// Range of the inner minimizer, meters.
    pub worst_distance: f64,
    /// Eavesdropper rate at the inner minimizer, bits/s/Hz.
    pub worst_eve_rate: f64,
    /// User rate at the chosen split, bits/s/Hz.
    pub user_rate: f64,
}

/// Azimuth grid over the uncertainty interval. The far endpoint is always
/// included; when the interval spans the full circle the grid wraps so the
/// circle is covered exactly once.
fn theta_grid(theta_hat: f64, dtheta: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if dtheta >= PI {
        let mut k = 0usize;
        loop {
            let t = -PI + k as f64 * step;
            if t >= PI - 1e-12 {
                break;
            }
            out.push(theta_hat + t);
            k += 1;
        }
    } else {
        let mut k = 0usize;
        loop {
            let t = -dtheta + k as f64 * step;
            if t >= dtheta - 1e-12 {
                break;
            }
            out.push(theta_hat + t);
            k += 1;
        }
        out.push(theta_hat + dtheta);
    }
    out
}

fn alpha_grid(step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let a = k as f64 * step;
        if a >= 1.0 - 1e-12 {
            break;
        }
        out.push(a);
        k += 1;
    }
    out.push(1.0);
    out
}

/// Exhaustive max-min search over the power split and the worst-case
/// eavesdropper azimuth, at the configured grid steps.
pub fn robust_power_allocation(
    cfg: &ScenarioConfig,
    pose: &AbsPose,
    u: &UncertaintyState,
    r_e: f64,
) -> RobustResult {
    robust_power_allocation_with_steps(cfg, pose, u, r_e, cfg.alpha_step, cfg.theta_step)
}

/// Same search with explicit grid steps (used by refinement oracles).
pub fn robust_power_allocation_with_steps(
    cfg: &ScenarioConfig,
    pose: &AbsPose,
    u: &UncertaintyState,
    r_e: f64,
    alpha_step: f64,
    theta_step: f64,
) -> RobustResult {
    solve(cfg, pose, u, r_e, &alpha_grid(alpha_step), theta_step)
}

/// Worst-case secrecy for one fixed power split over a theta grid of the
/// given step (the inner minimization alone).
pub fn worst_case_at_alpha(
    cfg: &ScenarioConfig,
    pose: &AbsPose,
    u: &UncertaintyState,
    r_e: f64,
    alpha: f64,
    theta_step: f64,
) -> RobustResult {
    solve(cfg, pose, u, r_e, &[alpha], theta_step)
}

fn solve(
    cfg: &ScenarioConfig,
    pose: &AbsPose,
    u: &UncertaintyState,
    r_e: f64,
    alphas: &[f64],
    theta_step: f64,
) -> RobustResult {
    let p = cfg.p_com_max;
    let h_u = channel(cfg, pose, cfg.user_pos).expect("platform is above the ground plane");
    let hu_norm_sq = h_u.norm_sq();
    let h_an = channel(cfg, pose, u.center).expect("platform is above the ground plane");
    let han_norm = h_an.norm_sq().sqrt();
    let an: Vec<Complex64> = h_an.entries.iter().map(|e| e / han_norm).collect();
    let an_user_gain = inner(&an, &h_u.entries).norm_sqr();

    let d_hat = pose.position.distance(u.center);
    let theta_hat = azimuth(pose, u.center).expect("estimate is on the ground plane");
    let dtheta = delta_theta(d_hat, r_e);

    // Candidate channels depend on theta only; precompute the two gains
    // each alpha evaluation needs.
    struct Candidate {
        theta: f64,
        dist: f64,
        beam_gain: f64,
        an_gain: f64,
    }
    let gain0 = cfg.beta0.sqrt();
    let candidates: Vec<Candidate> = theta_grid(theta_hat, dtheta, theta_step)
        .into_iter()
        .map(|theta| {
            let dist = worst_distance(d_hat, theta_hat, theta, r_e)
                .expect("grid azimuth lies inside the uncertainty interval");
            let v = steering(cfg, theta);
            let scale = (gain0 / dist) * (gain0 / dist);
            Candidate {
                theta,
                dist,
                beam_gain: inner(&h_u.entries, &v).norm_sqr() / hu_norm_sq * scale,
                an_gain: inner(&an, &v).norm_sqr() * scale,
            }
        })
        .collect();

    let mut best: Option<RobustResult> = None;
    for &alpha in alphas {
        let beam_power = (1.0 - alpha) * p;
        let an_power = alpha * p;
        let r_user = rate(beam_power * hu_norm_sq, an_power * an_user_gain, cfg.noise_user);
        // The inner minimizer of the secrecy rate maximizes the
        // eavesdropper SNR, so the scan compares SNRs and takes one log at
        // the end.
        let mut worst_snr = -1.0;
        let mut worst_cand = &candidates[0];
        for cand in &candidates {
            let snr = beam_power * cand.beam_gain / (an_power * cand.an_gain + cfg.noise_eve);
            if snr > worst_snr {
                worst_snr = snr;
                worst_cand = cand;
            }
        }
        let r_eve = (1.0 + worst_snr).log2();
        let secrecy = (r_user - r_eve).max(0.0);
        let improved = match &best {
            None => true,
            Some(b) => secrecy > b.secrecy_rate + TIE_EPS,
        };
        if improved {
            best = Some(RobustResult {
                alpha_star: alpha,
                secrecy_rate: secrecy,
                worst_theta: worst_cand.theta,
                worst_distance: worst_cand.dist,
                worst_eve_rate: r_eve,
                user_rate: r_user,
            });
        }
    }
    best.expect("alpha grid is never empty")
}

/// Worst-case secrecy rate and the maximizing power split. Sensing slots
/// carry no rate by definition; callers must not invoke this for them.
pub fn worst_case_secrecy(
    cfg: &ScenarioConfig,
    pose: &AbsPose,
    u: &UncertaintyState,
    r_e: f64,
) -> (f64, f64) {
    let res = robust_power_allocation(cfg, pose, u, r_e);
    (res.secrecy_rate, res.alpha_star)
}

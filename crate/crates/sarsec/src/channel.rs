//! ULA steering vectors and line-of-sight channels.

use num_complex::Complex64;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::scenario::AbsPose;

/// Line-of-sight channel toward a point.
#[derive(Clone, Debug)]
pub struct ChannelVec {
    pub entries: Vec<Complex64>,
    pub to_point: Vec3,
    pub at_slot: usize,
}

impl ChannelVec {
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }
}

/// Steering vector for azimuth `theta` (half-wavelength spacing): entry `k`
/// is `exp(-j k pi sin(theta))`.
pub fn steering(cfg: &ScenarioConfig, theta: f64) -> Vec<Complex64> {
    steering_dim(cfg.comm_antennas(), theta)
}

pub(crate) fn steering_dim(m: usize, theta: f64) -> Vec<Complex64> {
    let phase = -std::f64::consts::PI * theta.sin();
    (0..m)
        .map(|k| Complex64::from_polar(1.0, phase * k as f64))
        .collect()
}

/// Azimuth of `q` in the pose's local frame, range (-pi, pi]. Zero is
/// broadside (toward the orbit center), positive toward the flight
/// direction.
pub fn azimuth(pose: &AbsPose, q: Vec3) -> Result<f64> {
    let d = q - pose.position;
    if d.norm_sq() == 0.0 {
        return Err(Error::Domain(
            "azimuth undefined for a point at the platform position".into(),
        ));
    }
    Ok(f64::atan2(d.dot(pose.e_t), d.dot(pose.e_perp)))
}

/// Free-space line-of-sight channel from the platform to `q`.
pub fn channel(cfg: &ScenarioConfig, pose: &AbsPose, q: Vec3) -> Result<ChannelVec> {
    let theta = azimuth(pose, q)?;
    let d = pose.position.distance(q);
    let gain = cfg.beta0.sqrt() / d;
    let entries = steering(cfg, theta)
        .into_iter()
        .map(|e| e * gain)
        .collect();
    Ok(ChannelVec {
        entries,
        to_point: q,
        at_slot: pose.slot,
    })
}

/// Hermitian inner product `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::abs_pose;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn steering_broadside_is_ones() {
        let cfg = cfg();
        for e in steering(&cfg, 0.0) {
            assert_relative_eq!(e.re, 1.0);
            assert_relative_eq!(e.im, 0.0);
        }
    }

    #[test]
    fn steering_endfire_alternates() {
        let cfg = cfg();
        let v = steering(&cfg, std::f64::consts::FRAC_PI_2);
        for (k, e) in v.iter().enumerate() {
            let expect = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(e.re, expect, epsilon = 1e-12);
            assert_relative_eq!(e.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_norm_is_element_count() {
        let cfg = cfg();
        for theta in [-3.1, -1.0, 0.0, 0.4, 1.5, 3.14] {
            let v = steering(&cfg, theta);
            let n2: f64 = v.iter().map(|e| e.norm_sqr()).sum();
            assert_relative_eq!(n2, cfg.comm_antennas() as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn azimuth_toward_origin_is_broadside() {
        let cfg = cfg();
        let pose = abs_pose(&cfg, 1, 0.0).unwrap();
        // Direction to origin is (-200, 0, -100): aligned with e_perp.
        let theta = azimuth(&pose, Vec3::ZERO).unwrap();
        assert_relative_eq!(theta, 0.0, epsilon = 1e-12);
        // A point along e_t gives +pi/2.
        let q = pose.position + pose.e_t * 50.0;
        assert_relative_eq!(
            azimuth(&pose, q).unwrap(),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-12
        );
        assert!(azimuth(&pose, pose.position).is_err());
    }

    #[test]
    fn channel_distance_golden() {
        let cfg = cfg();
        let pose = abs_pose(&cfg, 1, 0.0).unwrap();
        let d = pose.position.distance(cfg.user_pos);
        assert_relative_eq!(d, 270.0, epsilon = 1e-12);
        let h = channel(&cfg, &pose, cfg.user_pos).unwrap();
        assert_relative_eq!(
            h.norm_sq(),
            cfg.beta0 * cfg.comm_antennas() as f64 / (d * d),
            max_relative = 1e-12
        );
    }

    #[test]
    fn inverse_distance_law() {
        let cfg = cfg();
        let pose = abs_pose(&cfg, 10, 0.2).unwrap();
        let q1 = Vec3::new(30.0, -40.0, 0.0);
        // Same direction, twice the distance from the platform.
        let q2 = pose.position + (q1 - pose.position) * 2.0;
        let h1 = channel(&cfg, &pose, q1).unwrap();
        let h2 = channel(&cfg, &pose, q2).unwrap();
        for (a, b) in h1.entries.iter().zip(&h2.entries) {
            assert_relative_eq!(a.norm() / 2.0, b.norm(), max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn channel_norm_identity(
            slot in 1usize..2500,
            phase in -3.0f64..3.0,
            x in -150.0f64..150.0,
            y in -150.0f64..150.0,
        ) {
            let cfg = cfg();
            let pose = abs_pose(&cfg, slot, phase).unwrap();
            let q = Vec3::new(x, y, 0.0);
            let d = pose.position.distance(q);
            let h = channel(&cfg, &pose, q).unwrap();
            let expect = cfg.beta0 * cfg.comm_antennas() as f64 / (d * d);
            prop_assert!((h.norm_sq() - expect).abs() <= 1e-12 * expect);
        }

        #[test]
        fn azimuth_scale_invariant(
            slot in 1usize..2500,
            phase in -3.0f64..3.0,
            x in -150.0f64..150.0,
            y in -150.0f64..150.0,
            scale in 0.01f64..50.0,
        ) {
            let cfg = cfg();
            let pose = abs_pose(&cfg, slot, phase).unwrap();
            let q = Vec3::new(x, y, 0.0);
            let d = q - pose.position;
            prop_assume!(d.norm() > 1e-6);
            let q_scaled = pose.position + d * scale;
            let a = azimuth(&pose, q).unwrap();
            let b = azimuth(&pose, q_scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

//! Desk-scale simulator and reinforcement-learning harness for an aerial
//! base station that time-shares a single antenna array between SAR-based
//! tracking of a ground-moving eavesdropper and secure downlink
//! communication toward a fixed ground user.
//!
//! The crate is organized around the simulation pipeline:
//!
//! - [`config`]: system constants, file schema, dB-to-linear conversion.
//! - [`scenario`]: platform orbit geometry and eavesdropper track generators.
//! - [`sar`]: aperture-dependent resolution, signal-to-clutter ratio, and
//!   the growing position-uncertainty disk.
//! - [`channel`]: ULA steering vectors and line-of-sight channels.
//! - [`secrecy`]: beamforming/jamming design, achievable rates, and the
//!   robust max-min power-split solver.
//! - [`env`]: the per-slot sense/communicate decision process with reward
//!   shaping and schedule reconstruction.
//! - [`agent`]: a self-contained PPO implementation (MLP policy + value,
//!   GAE, clipped surrogate updates).
//! - [`baselines`]: equal-aperture and random scheduling benchmarks.
//! - [`cli`]: train / eval / sweep / baseline entry points and CSV outputs.

pub mod agent;
pub mod baselines;
pub mod channel;
pub mod cli;
pub mod config;
pub mod env;
mod error;
pub mod geom;
pub mod sar;
pub mod scenario;
pub mod secrecy;
pub mod seeding;

pub use config::ScenarioConfig;
pub use error::{Error, Result};

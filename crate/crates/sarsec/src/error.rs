use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("failed to read {path}: {source}")]
    ConfigIo {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("slot index {slot} out of range 1..={max}")]
    SlotOutOfRange { slot: usize, max: usize },

    #[error("aperture length must be at least 1 (got {0})")]
    InvalidAperture(usize),

    #[error("{0}")]
    Domain(String),

    #[error("track speed {speed:.3} m/s exceeds the configured maximum {max:.3} m/s")]
    SpeedLimit { speed: f64, max: f64 },

    #[error("track has {got} positions but the episode horizon is {want}")]
    TrackLength { got: usize, want: usize },

    #[error("action {action} is masked in slot {slot}")]
    MaskedAction { action: &'static str, slot: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("worst-case geometry violated: discriminant {0:.3e} below tolerance")]
    Geometry(f64),

    #[error("non-finite loss during update (iteration {iteration}): {detail}")]
    NonFiniteLoss { iteration: usize, detail: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

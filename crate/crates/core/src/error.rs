use std::io;
use thiserror::Error;

/// Failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rewards are costs and must be non-negative, got {0}")]
    NegativeReward(f64),

    #[error("arm statistics are undefined before the first pull")]
    NoPulls,

    #[error("policy expects rewards in {{0, 1}}, got {0}")]
    NonBinaryReward(f64),

    #[error(
        "no threshold reaches a shortfall of {demand}; the support cap tops out at {reachable}"
    )]
    TargetOutOfReach { demand: f64, reachable: f64 },

    #[error("played arm {arm} but only {open} arms are open")]
    UnknownArm { arm: usize, open: usize },

    #[error("all {horizon} plays of the horizon are already spent")]
    HorizonSpent { horizon: u64 },

    #[error("arm {arm} replay exhausted after {len} samples")]
    TraceExhausted { arm: usize, len: usize },

    #[error("dataset line {line}: {message}")]
    DatasetParse { line: usize, message: String },

    #[error("dataset arm {arm} has no samples")]
    EmptyArm { arm: usize },

    #[error("series truncated at k = {k_max} before the tail became negligible")]
    TailTruncated { k_max: u64 },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True when the underlying cause is the output stream vanishing
    /// mid-write (for example stdout piped into a pager that quit).
    pub fn is_broken_pipe(&self) -> bool {
        match self {
            Error::Io(e) => e.kind() == io::ErrorKind::BrokenPipe,
            Error::Csv(e) => {
                matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe)
            }
            _ => false,
        }
    }
}

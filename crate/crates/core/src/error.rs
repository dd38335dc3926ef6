use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate array: {0}")]
    DegenerateArray(String),

    #[error("invalid beamformer for user {user}: combining vector is zero")]
    InvalidBeamformer { user: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "exhaustive search too large: {branches} branches x {rf_chains} RF chains \
         exceeds the guard ({max_branches} branches, {max_rf_chains} chains); use the greedy strategy"
    )]
    SizeGuard {
        branches: usize,
        rf_chains: usize,
        max_branches: usize,
        max_rf_chains: usize,
    },

    #[error("no break-even antenna price: RAA does not use more antennas than the ULA sectors")]
    NoBreakeven,
}

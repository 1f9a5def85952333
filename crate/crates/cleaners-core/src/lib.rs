//! Simulator and analytic toolkit for the cooperative cleaners problem:
//! k agents clean a connected contaminated region on the integer grid while
//! every frontier tile independently becomes contaminated with probability p
//! per step. The crate computes probabilistic lower bounds on the region size,
//! the matching impossibility threshold, and validates both against seeded
//! Monte Carlo simulation.

pub mod bounds;
pub mod config;
pub mod polyomino;
pub mod protocol;
pub mod region;
pub mod report;
pub mod shape;
pub mod sim;
pub mod spread;
pub mod stats;
pub mod tile;

/// Crate version stamped into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// RNG stamped into every output file. Same (seed, stream) gives a
/// bit-identical draw sequence on every platform.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, 64-bit seed, 64-bit streams)";

/// Tail-bound exponent convention stamped into every output file: the
/// per-step probability uses exp(-delta^2 * mu / 2) with mu = 2p*sqrt(2(s-k)-1).
pub const EXPONENT_CONVENTION: &str = "chernoff-exponent=delta^2*mu/2";

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("tile ({x}, {y}) is not contaminated")]
    NotContaminated { x: i64, y: i64 },

    #[error("region is empty")]
    EmptyRegion,

    #[error("shape size must be at least 1")]
    EmptyShape,

    #[error("spread neighborhood radius {0} is not supported (only radius 1)")]
    UnsupportedRadius(u32),

    #[error("{name} = {value} is out of range: {reason}")]
    InvalidParam {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("bound undefined for s - k < 1 (s = {s}, k = {k}): region cleanable within one step")]
    BoundDomain { s: u64, k: u64 },

    #[error(
        "region grows under these parameters (net spread exceeds k at both s0 = {s0} and s_hat = {s_hat}); \
         the impossibility threshold applies instead"
    )]
    GrowthRegime { s0: u64, s_hat: u64 },

    #[error(
        "region grows at s0 = {s0} but would shrink at s_hat = {s_hat}; \
         the closed-form time bound is undefined for this mixed regime"
    )]
    MixedRegime { s0: u64, s_hat: u64 },

    #[error("s0 = {s0} does not exceed the growth threshold {threshold} at this slack")]
    BelowThreshold { s0: u64, threshold: u64 },

    #[error("no delta in the grid admits a feasible s_hat at this probability target")]
    AllInfeasible,

    #[error("protocol invariant breach: {0}")]
    InvariantBreach(String),

    #[error("config parse error at line {line}, column {col}: {msg}")]
    ConfigParse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("config validation: {0}")]
    ConfigValidation(String),

    #[error("trajectories were not recorded for this batch")]
    NoTrajectory,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Simulation and bound evaluation for discrete-time multipath fading
//! channels whose path gains decay with the path delay.
//!
//! The channel model is non-coherent: neither transmitter nor receiver
//! knows the fading realization. Output at time k is
//!
//! ```text
//! Y_k = sum_{l=1..k} H_k^(k-l) x_l + Z_k
//! ```
//!
//! where `H_k^(p)` is the gain of the path with delay p at time k and
//! `Z_k` is IID circularly symmetric complex Gaussian noise. Paths with
//! different delays are independent (uncorrelated scattering), each one
//! a stationary complex Gaussian process with variance `alpha_p`.
//!
//! The toolkit answers one question from several angles: when the
//! power-delay profile `alpha_p` decays no faster than geometrically,
//! mutual information per channel use stays bounded as SNR grows.
//!
//! * [`channel`] describes profiles and classifies their decay.
//! * [`gauss`] holds the Gaussian machinery: tap autocovariances,
//!   entropy rates, conditional covariances and their Cholesky chain.
//! * [`bound`] evaluates the analytic capacity bound constant and its
//!   finite-blocklength form.
//! * [`mi`] estimates mutual information by Monte Carlo with exact
//!   finite-mixture marginals, evaluates the duality upper bound, and
//!   cross-checks every inequality the analytic bound rests on.
//!
//! Estimators are deterministic given a seed: work is split into fixed
//! chunks, each chunk draws from its own derived RNG stream, and chunk
//! results are combined in chunk order. The number of worker threads
//! never changes a result, only how fast it arrives.

pub mod bound;
pub mod channel;
pub mod gauss;
pub mod mi;
pub mod par;
pub mod seed;
pub mod stats;

use thiserror::Error;

/// Euler-Mascheroni constant. `E[log |Z|^2] = log sigma^2 - gamma` for
/// circularly symmetric Gaussian Z with variance sigma^2.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Errors reported by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Profile head entries must be finite and non-negative.
    #[error("profile head entry {index} is {value}, want finite and >= 0")]
    BadHeadEntry { index: usize, value: f64 },

    /// The head must contain at least the delay-zero variance.
    #[error("profile head is empty")]
    EmptyHead,

    /// A geometric tail continues the last head entry, which must be positive.
    #[error("geometric tail anchored at zero head entry (alpha_m = 0)")]
    ZeroAnchor,

    /// Tail parameter outside its legal range.
    #[error("tail parameter {name} = {value}, want {want}")]
    BadTailParam {
        name: &'static str,
        value: f64,
        want: &'static str,
    },

    /// Tap coefficient magnitudes above one have no stationary process.
    #[error("tap coefficient has |a| = {magnitude} > 1, no stationary process")]
    UnstableTap { magnitude: f64 },

    /// Entropy rate of a zero-variance tap is undefined.
    #[error("entropy rate requested for zero-variance tap")]
    ZeroVarianceTap,

    /// One or more channel assumptions fail; every violation is listed.
    #[error("invalid channel configuration: {}", issues.join("; "))]
    InvalidConfig { issues: Vec<String> },

    /// Conditional covariance must stay positive definite.
    #[error("covariance factorization failed at pivot {index}: {value} (floor {floor})")]
    NotPositiveDefinite {
        index: usize,
        value: f64,
        floor: f64,
    },

    /// Exhaustive marginals are only possible for small alphabets.
    #[error("input alphabet has {size} sequences, cap is {cap}")]
    AlphabetTooLarge { size: u128, cap: u64 },

    /// The operation needs a finite input alphabet.
    #[error("{op} needs a finite input alphabet, got a continuous input model")]
    ContinuousInput { op: &'static str },

    /// Input model parameter outside its legal range.
    #[error("input model: {0}")]
    BadInputModel(String),

    /// Finite-blocklength bound needs room for both boundary windows.
    #[error("blocklength n = {n} too small, want n >= {min}")]
    BlocklengthTooSmall { n: usize, min: usize },

    /// Grid optimization over an empty grid has no answer.
    #[error("empty {name} grid")]
    EmptyGrid { name: &'static str },

    /// Every bound evaluation must know which epsilon term it used.
    #[error("epsilon term disabled, cannot evaluate the offset constant")]
    EpsilonUnavailable,

    /// Table-backed epsilon has no entry for the requested point.
    #[error("epsilon table has no entry for delta = {delta}, eta = {eta}")]
    EpsilonTableMiss { delta: f64, eta: f64 },

    /// Profile fails the floor inequality the bound is built on.
    #[error("floor inequality violated at delay {ell}: beta * alpha_ell > alpha_(ell+l0)")]
    FloorViolated { ell: usize },

    /// The normalizing constant must sit strictly inside (0, 1).
    #[error("beta = {beta} outside (0, 1)")]
    BetaOutOfRange { beta: f64 },

    /// Bound parameter outside its legal range.
    #[error("bound parameter {name} = {value}, want {want}")]
    BadBoundParam {
        name: &'static str,
        value: f64,
        want: &'static str,
    },

    /// Estimators need at least one sample.
    #[error("sample count must be >= 1")]
    NoSamples,

    /// Requested audit point lies outside the valid range.
    #[error("audit point k = {k} outside {min}..={max}")]
    BadAuditPoint { k: usize, min: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

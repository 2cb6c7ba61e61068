use thiserror::Error;

/// Everything that can go wrong while evaluating, optimizing, sweeping, or
/// simulating a plan.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar input failed its range check.
    #[error("{name} = {value} is invalid: {constraint}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// The split ratios do not factor the user count.
    #[error("split ratios {n1} x {n2} do not factor the user count {n_users}")]
    SplitMismatch { n_users: u32, n1: u32, n2: u32 },

    /// A probability argument fell outside [0, 1].
    #[error("probability {value} lies outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    /// QBER at or above 1/2: the entropy cost meets the sifted rate and no
    /// key can be distilled.
    #[error("QBER {qber} is at or above 0.5; the secure fraction is undefined")]
    QberAboveHalf { qber: f64 },

    /// The baseline QBER is so high that no mean photon number gives a
    /// positive rate.
    #[error("no positive optimal mean photon number for baseline QBER {qber}")]
    NoPositiveMu { qber: f64 },

    /// Splitter-to-fiber equivalence needs a positive attenuation.
    #[error("attenuation must be positive to express splitter loss as fiber length")]
    ZeroAttenuation,

    /// The signal term underflowed to zero, leaving the QBER undefined.
    #[error("signal transmission underflowed to zero; QBER undefined")]
    OpaquePath,

    /// Discrete selection only covers 1x2^I splitters.
    #[error("user count {n_users} is not a power of 2")]
    NotPowerOfTwo { n_users: u32 },

    /// Every candidate split drives the QBER to 0.5 or beyond.
    #[error("no split ratio keeps the QBER below 0.5")]
    AllCandidatesDegenerate,

    /// A sweep specification is malformed.
    #[error("invalid sweep: {reason}")]
    InvalidSweep { reason: String },

    /// The preset name is not one of the canned studies.
    #[error("unknown preset '{name}' (expected fig3, fig4, fig5, or fig6)")]
    UnknownPreset { name: String },

    /// The linearized detection model needs a click probability of at most 1.
    #[error(
        "signal click probability {p} exceeds 1; the linearized detection model does not apply"
    )]
    ClickProbabilityTooHigh { p: f64 },

    /// The simulation recorded no clicks, so no QBER estimate exists.
    #[error("simulation recorded zero clicks; QBER estimate undefined")]
    NoClicks,
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by state construction, disorder parameter validation and
/// the statistics toolkit. Messages name the violated constraint so a CLI
/// front end can surface them verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("channel count must be even and greater than 2, got N={n}")]
    InvalidChannelCount { n: usize },

    #[error("channel slot {slot} out of range for N={n} channels")]
    SlotOutOfRange { slot: usize, n: usize },

    #[error("{channel} is not a half-integer channel coordinate of an N={n} cycle")]
    InvalidChannelCoordinate { channel: f64, n: usize },

    #[error(
        "vertex state (position {position}, {chirality}) lies outside the \
         parity-allowed image at t={time}"
    )]
    OutsideParityImage {
        position: usize,
        chirality: &'static str,
        time: usize,
    },

    #[error("state norm² = {norm_sqr} deviates from 1 by more than {tolerance}")]
    NotNormalized { norm_sqr: f64, tolerance: f64 },

    #[error("jump size must satisfy 0 < j < N, got j={j}, N={n}")]
    InvalidJumpSize { j: usize, n: usize },

    #[error("N/gcd(N,j) must exceed 2, got N={n}, j={j} (gcd {g})")]
    JumpCycleTooShort { n: usize, j: usize, g: usize },

    #[error("pair-error probability must lie in [0,1], got p={p}")]
    ProbabilityOutOfRange { p: f64 },

    #[error(
        "p=1 is rejected for N={n}, j={j}: N/gcd(N,j)={m} is odd, so the \
         partition function vanishes and the jump measure is undefined"
    )]
    DegenerateMeasure { n: usize, j: usize, m: usize },

    #[error("jump starts {a} and {b} touch a common slot (transpositions must be non-incident)")]
    IncidentTranspositions { a: usize, b: usize },

    #[error("matching count is defined for cycle length M > 2, got M={m}")]
    MatchingCycleTooShort { m: usize },

    #[error("brute-force enumeration is limited to N <= {max}, got N={n}")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error(
        "T={steps} needs N >= {required} to rule out wrap-around of the \
         unperturbed light cone, got N={n} (set allow_wraparound to override)"
    )]
    WrapAround {
        steps: usize,
        required: usize,
        n: usize,
    },

    #[error("number of Monte Carlo runs must be >= 1")]
    NoRuns,

    #[error("record_every must be >= 1")]
    InvalidStride,

    #[error("distribution must be normalized: sum={sum} deviates from 1 beyond {tolerance}")]
    NotADistribution { sum: f64, tolerance: f64 },

    #[error("Tsallis order q must be positive, got q={q}")]
    InvalidTsallisOrder { q: f64 },

    #[error("fit window contains {found} usable points, need at least {need}")]
    TooFewFitPoints { found: usize, need: usize },

    #[error("x values are degenerate, cannot fit a line")]
    DegenerateFit,

    #[error("need at least {need} points to locate a minimum, got {found}")]
    TooFewPoints { need: usize, found: usize },

    #[error("no interior minimum: the smoothed data is monotone over the scanned range")]
    NoInteriorMinimum,
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("box length must be positive, got {0}")]
    NonPositiveLength(f64),

    #[error("{positions} positions but {heights} heights")]
    LengthMismatch { positions: usize, heights: usize },

    #[error(
        "scatterer positions must be strictly increasing (index {index}: {previous} >= {current})"
    )]
    NonMonotonePositions {
        index: usize,
        previous: f64,
        current: f64,
    },

    #[error("scatterer {index} at y = {position} lies outside the box [-{half}, {half}]")]
    PositionOutOfBox {
        index: usize,
        position: f64,
        half: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reflection recursion hits a pole at k = {k} (barrier {barrier})")]
    RecursionPole { k: f64, barrier: usize },

    #[error("explicit subset sum over {m} scatterers exceeds the cap of {cap}")]
    SubsetBlowup { m: usize, cap: usize },

    #[error("could not resolve roots in the interval [{lo}, {hi}]")]
    BracketExhaustion { lo: f64, hi: f64 },

    #[error("k = {k} is not an eigenvalue: wall shots disagree by {residual:e}")]
    InvalidRoot { k: f64, residual: f64 },

    #[error("x = {x} lies outside the box")]
    OutOfDomain { x: f64 },

    #[error("band {band} not found at q = {q}")]
    BandNotFound { q: f64, band: usize },

    #[error("band {band} lies below zero energy at q = {q}")]
    NegativeEnergyBand { q: f64, band: usize },

    #[error("cannot pin the gauge: every sample is below 1e-8")]
    GaugePinFailure,

    #[error("adjacent Bloch states nearly orthogonal (overlap {min_overlap:.3e}); gap closes or grid too coarse")]
    GapClosure { min_overlap: f64 },

    #[error("scatterers {first} and {second} snap to the same grid point {index}")]
    GridTooCoarse {
        first: usize,
        second: usize,
        index: usize,
    },

    #[error("oracle counts {found} states below the reference energy, expected {expected}")]
    CountMismatch { expected: usize, found: usize },

    #[error("at {name} = {value}: {source}")]
    AtParameter {
        name: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

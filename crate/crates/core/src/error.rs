use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("key text must be exactly 20 hexadecimal digits: {0}")]
    KeyFormat(String),

    /// The global chaotic map starts at the fixed point 0.
    #[error("invalid key: global seed X0 evaluates to 0")]
    InvalidKey,

    #[error("chaotic orbit never entered [0.1, 0.9) within {iterations} iterations (state {state})")]
    NonConvergence { state: f64, iterations: u32 },

    #[error("state {0} lies outside the window [0.1, 0.9)")]
    OutOfWindow(f64),

    #[error("image of {width}x{height} pixels cannot be split into 16-pixel blocks")]
    BadDimensions { width: usize, height: usize },

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("malformed PPM: {0}")]
    MalformedPpm(String),

    #[error("chosen plain-images are not an XOR family of the base image")]
    NotXorFamily,

    #[error("set of size {0} is not a valid A* estimate (expected 2, 4 or 8)")]
    MalformedSet(usize),

    #[error("no identical cipher-block pairs supplied")]
    EmptyEvidence,

    #[error("requested {requested} trials exceeds the configured cap of {cap}")]
    BudgetExceeded { requested: u64, cap: u64 },

    #[error("every K10 guess was eliminated; not enough XOR-equivalent evidence")]
    NoCandidate,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

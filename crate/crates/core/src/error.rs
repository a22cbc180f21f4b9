use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter tuple: {0}")]
    InvalidTuple(String),

    #[error("could not parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("invalid grid geometry: {0}")]
    InvalidGeometry(String),

    #[error("dilation by 2^{k} leaves the representable range: {reason}")]
    DomainOverflow { k: i32, reason: String },

    #[error("L^{{inf,q}} with q < inf only contains 0, but the input is nonzero")]
    ConventionViolation,

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("exponent preconditions fail: {0}")]
    ExponentMismatch(String),

    #[error("grid resolves only {bands} dyadic bands, at least 6 are needed")]
    GridTooCoarse { bands: usize },

    #[error("band {j} is outside the family range [{min}, {max}]")]
    BandOutOfRange { j: i32, min: i32, max: i32 },

    #[error("spectral content not resolved by the family: relative leakage {leakage:e}")]
    UnresolvedTail { leakage: f64 },

    #[error("riesz potential of negative order needs a zero-mean input, mean mode is {mean:e}")]
    MeanModeViolation { mean: f64 },

    #[error("unknown theorem id {0:?}")]
    UnknownTheorem(String),

    #[error("catalog inconsistency ({check}) in {theorem} at {tuple}")]
    InconsistencyFound {
        check: String,
        theorem: String,
        tuple: String,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("sequence interpolation needs s1 != s2")]
    EqualSmoothness,

    #[error("function is not band-limited on this grid: {0}")]
    NotBandLimited(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use ndarray::Array2;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch on {axis}: expected {expected}, found {found}")]
    DimensionMismatch { axis: &'static str, expected: usize, found: usize },

    #[error("non-uniform sampling at sample {index}: step {step} s differs from {dt} s")]
    NonUniformSampling { index: usize, step: f64, dt: f64 },

    #[error("fewer than d separable peaks: found {found}, requested {requested}")]
    TooFewPeaks { found: usize, requested: usize },

    #[error("width {value} of feature {index} is below the floor {floor}")]
    WidthBelowFloor { index: usize, value: f64, floor: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("coordinate descent did not converge in {sweeps} sweeps (kkt violation {kkt:e})")]
    NotConverged { sweeps: usize, kkt: f64, last: Box<Array2<f64>> },

    #[error("empty model after prune at iteration {iteration}")]
    EmptyModel { iteration: usize },

    #[error("path solve failed at lambda {lambda:e}: {source}")]
    PathSolve {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("nothing to rank: no feature is active at the smallest lambda")]
    NothingToRank,

    #[error("ranking undefined for this method ({0})")]
    RankingUndefined(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("time {time} s outside the primitive domain [0, {duration}] s")]
    OutsideDomain { time: f64, duration: f64 },

    #[error("degenerate fold {fold}: {samples} samples")]
    DegenerateFold { fold: usize, samples: usize },

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

use thiserror::Error;

/// Errors raised by model assembly, solvers, basis construction and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular reaction coefficient: node ({x}, {y}) coincides with the parameter point")]
    SingularCoefficient { x: f64, y: f64 },

    #[error("factorization of the step matrix failed at step {step}: zero pivot in column {column}")]
    Factorization { step: usize, column: usize },

    #[error("oracle-scale limit exceeded: {size} unknowns > cap {cap}")]
    OracleCap { size: usize, cap: usize },

    #[error("SVD failed: {0}")]
    Svd(String),

    #[error("mode count {requested} out of range (must be between 1 and {bound})")]
    ModeCount { requested: usize, bound: usize },

    #[error("temporal mode count {requested} exceeds min(N_t, n_mu) = {bound}")]
    BasisRank { requested: usize, bound: usize },

    #[error("spatial singular value {index} is numerically zero ({ratio:e} of the largest)")]
    DegenerateMode { index: usize, ratio: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("reduced system is ill posed (condition estimate {condition:e})")]
    IllPosedReduction { condition: f64 },

    #[error("relative error undefined: reference trajectory has zero norm")]
    UndefinedRelativeError,

    #[error("at parameter ({}, {}): {source}", mu[0], mu[1])]
    AtParameter { mu: [f64; 2], source: Box<Error> },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error in {file}: {message}")]
    Parse { file: String, message: String },
}

impl Error {
    pub fn at(self, mu: [f64; 2]) -> Self {
        match self {
            e @ Error::AtParameter { .. } => e,
            e => Error::AtParameter { mu, source: Box::new(e) },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

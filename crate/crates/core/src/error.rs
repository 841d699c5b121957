use thiserror::Error;

pub type Result<T> = std::result::Result<T, QremError>;

#[derive(Debug, Error)]
pub enum QremError {
    #[error("{what}: n = {n} exceeds the supported maximum of {max}")]
    Capacity {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("root not bracketed in [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Search {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("norm drift {drift:e} exceeds {limit:e}; reduce dt (currently {dt:e})")]
    StepSize { drift: f64, limit: f64, dt: f64 },

    #[error("instance has no reproducible seed (crafted energies)")]
    NotReproducible,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl QremError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        QremError::Domain(msg.into())
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbdpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),

    #[error("non-finite argument {0}")]
    NonFinite(f64),

    #[error("rate table covers states 0..={n_max}, state {n} requested")]
    TableExtent { n: usize, n_max: usize },

    #[error("k = {k} exceeds the table's k_max = {k_max}")]
    KBeyondTable { k: usize, k_max: usize },

    #[error("quadrature did not converge (estimate {value}, error estimate {error})")]
    Quadrature { value: f64, error: f64 },

    #[error("series truncation exhausted after {terms} terms (tail bound {tail})")]
    Truncation { terms: usize, tail: f64 },

    #[error("derivative order {0} exceeds the supported maximum of 60")]
    DerivativeOrder(usize),

    #[error("unsupported regime: {0}")]
    Regime(String),

    #[error("overflow evaluating {0}")]
    Overflow(String),

    #[error("simulation exceeded {0} events")]
    EventCap(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for FbdpError {
    fn from(e: std::io::Error) -> Self {
        FbdpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FbdpError>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FbdpError::AlphaOutOfRange(alpha));
    }
    Ok(())
}

pub(crate) fn check_finite(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(FbdpError::NonFinite(x));
    }
    Ok(())
}

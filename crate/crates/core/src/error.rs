use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("monochromatic limit (sigma = 0) has no square-integrable amplitude; use the closed-form rates instead")]
    MonochromaticLimit,

    #[error("grid too narrow: {edge_fraction:.3e} of |B|^2 mass lies on the outermost cells (limit {limit:.1e})")]
    GridTooNarrow { edge_fraction: f64, limit: f64 },

    #[error("degenerate antisymmetric state: normalization denominator {denominator:.3e} vanishes")]
    DegenerateAntisymmetric { denominator: f64 },

    #[error("argument {0} outside the documented range |Re z|, |Im z| <= 30")]
    OutOfRange(String),

    #[error("covariance not positive semidefinite: required jitter {required:.3e} exceeds budget {budget:.3e}")]
    NotPositiveSemidefinite { required: f64, budget: f64 },

    #[error("quadrature not converged: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("insufficient realizations: std_error {std_error:.3e} exceeds requested {requested:.3e}")]
    InsufficientRealizations { std_error: f64, requested: f64 },

    #[error("tail not converged: relative change {change:.3e} over the last decade of tau (limit {limit:.1e})")]
    TailNotConverged { change: f64, limit: f64 },

    #[error("curve has no point at tau = 0")]
    MissingOrigin,

    #[error("unknown figure {0}; expected 2..=10")]
    UnknownFigure(u32),

    #[error("figure 2 needs crystal parameters nu_o and nu_e")]
    MissingCrystal,

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveSemidefinite { .. }
                | Error::QuadratureNotConverged { .. }
                | Error::InsufficientRealizations { .. }
                | Error::TailNotConverged { .. }
                | Error::GridTooNarrow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

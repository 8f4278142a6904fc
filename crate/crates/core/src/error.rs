use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("unsupported Meijer-G shape (m,n,p,q)=({m},{n},{p},{q}) with b={b:?}")]
    UnsupportedShape {
        m: usize,
        n: usize,
        p: usize,
        q: usize,
        b: Vec<f64>,
    },

    #[error("contour separation impossible: left pole at {left} (from a[{left_index}]) is not below right pole at {right} (from b[{right_index}])")]
    ContourSeparation {
        left: f64,
        left_index: usize,
        right: f64,
        right_index: usize,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("closed form unavailable: {0}; use the general quadrature path")]
    UnsupportedClosedForm(String),

    #[error("closed-form CDF left the unit interval: {0:e}")]
    ClosedFormRange(f64),

    #[error("asymptotic approximation out of regime: {0}")]
    OutOfRegime(String),

    #[error("quantile unbounded at p = 1")]
    Unbounded,

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}

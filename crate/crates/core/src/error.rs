use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is singular to working precision (condition estimate {cond:e})")]
    Singular { cond: f64 },

    #[error("spectral point z = {re}{im:+}i is too close to the interval [{a}, {b}]")]
    NearCut { re: f64, im: f64, a: f64, b: f64 },

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("integration exceeded {steps} steps before reaching x = {x}")]
    TooManySteps { steps: usize, x: f64 },

    #[error("S(x) is singular at x = {x} (condition estimate {cond:e})")]
    SingularS { x: f64, cond: f64 },

    #[error("z = {re}{im:+}i lies on the spectrum of B")]
    OnSpectrum { re: f64, im: f64 },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("closed form unavailable: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

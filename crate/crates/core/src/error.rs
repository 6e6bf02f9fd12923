use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },

    #[error("no section crossing before t = {t_max}")]
    NoCrossing { t_max: f64 },

    #[error("tangential section crossing at t = {t} (dg/dt = {slope:e})")]
    TangentialCrossing { t: f64, slope: f64 },

    #[error("orbit left the working box at t = {t}")]
    LeftBox { t: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: estimate {value}, error {error:e}")]
    Quadrature { a: f64, b: f64, value: f64, error: f64 },

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no sign change of the splitting distance on [{lo}, {hi}]: d = {d_lo}, {d_hi}")]
    NoBracket { lo: f64, hi: f64, d_lo: f64, d_hi: f64 },

    #[error("non-positive drift integral A_L = {0}")]
    NonPositiveDrift(f64),

    #[error("map evaluated at an escape point (F = {f:e})")]
    EscapePoint { f: f64 },

    #[error("singular jacobian (det = {0:e})")]
    Singular(f64),

    #[error("orbit escaped after {survived} iterations")]
    Escaped { survived: usize },

    #[error("circle map is not monotone near theta = {0}")]
    NotMonotone(f64),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("section missed: {0}")]
    SectionMiss(String),
}

pub type Result<T> = std::result::Result<T, Error>;

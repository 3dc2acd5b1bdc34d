use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Bernoulli constant outside the admissible interval (R_c, R_0).
    #[error("Bernoulli constant r = {r} outside the admissible interval ({r_c}, {r_0})")]
    OutOfRange { r: f64, r_c: f64, r_0: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("quadrature did not reach tolerance {tolerance:e} on [{a}, {b}] (estimate {estimate:e})")]
    Quadrature {
        a: f64,
        b: f64,
        tolerance: f64,
        estimate: f64,
    },

    #[error("convergence failure: {0}")]
    Convergence(String),

    /// The stream is in the wrong regime for the requested quantity.
    #[error("regime error: {0}")]
    Regime(String),

    /// Unidirectionality is about to fail: h_p fell to or below the threshold.
    #[error("degenerate height function: h_p = {value:e} <= {threshold:e} at node (i = {i}, j = {j})")]
    Degenerate {
        i: usize,
        j: usize,
        value: f64,
        threshold: f64,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("linear solve failed: {0}")]
    Linear(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

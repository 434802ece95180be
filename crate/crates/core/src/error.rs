use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which arbitrage bound an option price violated during implied-vol inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Below,
    Above,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Below => f.write_str("below intrinsic value"),
            Bound::Above => f.write_str("above the no-arbitrage upper bound"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("requires -1 < rho < 0 and 0 <= beta < 1 (got beta = {beta}, rho = {rho})")]
    AssumptionViolated { beta: f64, rho: f64 },

    #[error(
        "quadrature on [{lo}, {hi}] did not converge after {subdivisions} subdivisions \
         (error estimate {error:e})"
    )]
    QuadratureNonConvergence {
        lo: f64,
        hi: f64,
        subdivisions: usize,
        error: f64,
    },

    #[error("computation cancelled")]
    Cancelled,

    #[error("tail fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    TailFit { residual: f64, tolerance: f64 },

    #[error("option price {price} is {bound}")]
    OutOfBounds { bound: Bound, price: f64 },

    #[error("root finding failed: {0}")]
    RootNotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

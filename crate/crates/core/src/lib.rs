//! VIX futures and options under SABR with a capped volatility process.
//!
//! - [`model`]: coefficients of the volatility process `v = sigma S^(beta-1)` and its capped form.
//! - [`scale`]: scale function, Feller test for explosion and the martingale check.
//! - [`mc`]: Monte Carlo simulation of the capped process and a nested VIX estimator.
//! - [`asymptotics`]: short-maturity rate function and implied-volatility limit.
//! - [`pricing`]: Black-formula inversion and smile construction.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod mc;
pub mod model;
pub mod pricing;
pub mod quadrature;
pub mod scale;

pub use error::{Bound, Error, Result};
pub use mc::{McConfig, McEstimate, OptionKind, PathSet, Scheme};
pub use model::{CapSpec, CappedModel, SabrParams};
pub use quadrature::{CancelToken, QuadratureConfig};
pub use scale::{ScaleAnalysis, ScaleReport};

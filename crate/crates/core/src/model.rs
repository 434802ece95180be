//! SABR volatility-process coefficients.
//!
//! Under SABR, `dS = S^beta sigma dB`, `d sigma = omega sigma dZ` with `corr(B, Z) = rho`,
//! the effective log-normal volatility `v = sigma S^(beta - 1)` solves the one-dimensional SDE
//!
//! ```text
//! dv / v = sigma_V(v) dW + mu_V(v) dt
//! sigma_V(v) = sqrt(omega^2 + (beta - 1)^2 v^2 + 2 rho (beta - 1) omega v)
//! mu_V(v)    = v (beta - 1) (0.5 (beta - 2) v + rho omega)
//! ```
//!
//! so that `dv = (alpha v^3 + delta v^2) dt + v sigma_V(v) dW`. The uncapped process explodes
//! when `rho < 0`; [`CappedModel`] clamps the diffusion at `a` and the drift to `[-b, b]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// SABR parameters. All rates are annualised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SabrParams {
    /// CEV exponent, `0 <= beta < 1`.
    pub beta: f64,
    /// Spot/vol correlation, `-1 < rho < 1`.
    pub rho: f64,
    /// Vol-of-vol per sqrt(year).
    pub omega: f64,
    /// Initial effective volatility `v0 = sigma0 * S0^(beta - 1)`.
    pub v0: f64,
}

impl SabrParams {
    pub fn new(beta: f64, rho: f64, omega: f64, v0: f64) -> Result<Self> {
        let p = Self {
            beta,
            rho,
            omega,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameter set of the numerical example with `beta = 0.5`.
    pub fn reference(rho: f64) -> Self {
        Self {
            beta: 0.5,
            rho,
            omega: 1.0,
            v0: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: self.beta,
                reason: "must satisfy 0 <= beta < 1",
            });
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: self.rho,
                reason: "must satisfy -1 < rho < 1",
            });
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: self.omega,
                reason: "must be positive and finite",
            });
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "v0",
                value: self.v0,
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }

    /// True when `0 <= beta < 1` and `-1 < rho < 0`; the explosion analysis needs it.
    pub fn assumption1_holds(&self) -> bool {
        self.beta >= 0.0 && self.beta < 1.0 && self.rho > -1.0 && self.rho < 0.0
    }

    pub fn require_assumption1(&self) -> Result<()> {
        if self.assumption1_holds() {
            Ok(())
        } else {
            Err(Error::AssumptionViolated {
                beta: self.beta,
                rho: self.rho,
            })
        }
    }

    /// `sqrt(1 - rho^2)`.
    pub fn rho_perp(&self) -> f64 {
        (1.0 - self.rho * self.rho).sqrt()
    }

    /// Cubic drift coefficient `alpha = (1 - beta)(2 - beta) / 2`.
    pub fn alpha(&self) -> f64 {
        0.5 * (1.0 - self.beta) * (2.0 - self.beta)
    }

    /// Quadratic drift coefficient `delta = -(1 - beta) rho omega`.
    pub fn delta(&self) -> f64 {
        -(1.0 - self.beta) * self.rho * self.omega
    }

    pub fn alpha_delta(&self) -> (f64, f64) {
        (self.alpha(), self.delta())
    }

    /// Radicand of `sigma_V`. Positive for every real `v` when `|rho| < 1`.
    pub fn sigma_v_sq(&self, v: f64) -> f64 {
        let bm1 = self.beta - 1.0;
        self.omega * self.omega + bm1 * bm1 * v * v + 2.0 * self.rho * bm1 * self.omega * v
    }

    pub fn sigma_v(&self, v: f64) -> f64 {
        let r = self.sigma_v_sq(v);
        debug_assert!(r > 0.0, "sigma_V radicand {r} <= 0 at v = {v}");
        r.sqrt()
    }

    pub fn mu_v(&self, v: f64) -> f64 {
        let bm1 = self.beta - 1.0;
        v * bm1 * (0.5 * (self.beta - 2.0) * v + self.rho * self.omega)
    }

    /// Level-space drift `alpha v^3 + delta v^2 = v mu_V(v)`.
    pub fn level_drift(&self, v: f64) -> f64 {
        let (alpha, delta) = self.alpha_delta();
        v * v * (alpha * v + delta)
    }

    /// Level at which `sigma_V` reaches `a`:
    /// `(rho omega + sqrt(a^2 + (rho^2 - 1) omega^2)) / (1 - beta)`.
    pub fn v_hat(&self, a: f64) -> f64 {
        let w = self.omega;
        let disc = a * a + (self.rho * self.rho - 1.0) * w * w;
        (self.rho * w + disc.max(0.0).sqrt()) / (1.0 - self.beta)
    }
}

/// Volatility cap `a`, drift cap `b`, and the switch level `v_hat` where `sigma_V(v_hat) = a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapSpec {
    pub a: f64,
    pub b: f64,
    pub v_hat: f64,
}

impl CapSpec {
    pub fn new(params: &SabrParams, a: f64, b: f64) -> Result<Self> {
        if !(a > params.omega && a.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "volatility cap must exceed omega",
            });
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "b",
                value: b,
                reason: "drift cap must be positive",
            });
        }
        Ok(Self {
            a,
            b,
            v_hat: params.v_hat(a),
        })
    }

    /// Caps of the numerical example, `a = 2`, `b = 1`.
    pub fn reference(params: &SabrParams) -> Self {
        Self::new(params, 2.0, 1.0).expect("reference caps are valid")
    }
}

/// The capped volatility process `dv / v = min(a, sigma_V) dW + clamp(mu_V, -b, b) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CappedModel {
    pub params: SabrParams,
    pub caps: CapSpec,
}

impl CappedModel {
    pub fn new(params: SabrParams, a: f64, b: f64) -> Result<Self> {
        params.validate()?;
        let caps = CapSpec::new(&params, a, b)?;
        Ok(Self { params, caps })
    }

    pub fn reference(rho: f64) -> Self {
        let params = SabrParams::reference(rho);
        Self {
            params,
            caps: CapSpec::reference(&params),
        }
    }

    pub fn sigma_v(&self, v: f64) -> f64 {
        self.params.sigma_v(v).min(self.caps.a)
    }

    pub fn mu_v(&self, v: f64) -> f64 {
        let mu = self.params.mu_v(v);
        if mu > 0.0 {
            mu.min(self.caps.b)
        } else {
            mu.max(-self.caps.b)
        }
    }
}

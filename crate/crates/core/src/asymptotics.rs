//! Short-maturity VIX smile of the capped model.
//!
//! As `T, tau -> 0` the OTM option prices decay like `exp(-J_V(K) / T)` with
//!
//! ```text
//! J_V(K) = 0.5 (\int_{v0}^K dz / (z sigma_hat_V(z)))^2
//! ```
//!
//! and the implied volatility tends to `log(K/v0) / \int_{v0}^K dz / (z sigma_hat_V(z))`.
//! Below the switch level `v_hat` the integrand is `1 / (z sigma_V(z))`, whose antiderivative is
//! `-arctanh((rho (beta-1) z + omega) / sigma_V(z)) / omega`; above it the integrand is `1/(a z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CappedModel, SabrParams};

/// `|log(K/v0)|` below which the implied-vol limit returns its ATM value.
pub const ATM_THRESHOLD: f64 = 1e-8;

/// ATM level, skew and convexity of the limiting smile in log-strike `x = log(K/v0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmileExpansion {
    pub atm_level: f64,
    pub skew: f64,
    /// The quoted convexity coefficient
    /// `v0 (beta-1) / (3 sigma_V^4) (2 omega^3 rho + (beta-1) omega^2 (4 + rho^2) v0
    /// + 4 (beta-1)^2 omega rho v0^2 + (beta-1)^3 v0^3)`.
    pub convexity: f64,
    /// Second derivative of the limiting smile at `x = 0`. Same bracket as `convexity` over
    /// `6 sigma_V^3` instead of `3 sigma_V^4`, so `convexity = curvature * 2 / sigma_V(v0)`.
    pub curvature: f64,
}

impl SmileExpansion {
    /// Second-order Taylor polynomial `atm + skew x + curvature x^2 / 2`.
    pub fn eval(&self, x: f64) -> f64 {
        self.atm_level + self.skew * x + 0.5 * self.curvature * x * x
    }
}

/// `\int_lo^hi dz / (z sigma_V(z))` for `0 < lo <= hi`, closed form.
///
/// The arctanh difference is evaluated either through the addition formula
/// `atanh(u) - atanh(w) = atanh((u - w) / (1 - u w))`, with numerator and denominator
/// rewritten without subtraction, or through `atanh(h(z)) = ln((sigma_V + omega + c z) / ((1-beta)
/// rho_perp z))`. The first is used for short intervals, the second elsewhere.
pub fn uncapped_rate_integral(lo: f64, hi: f64, p: &SabrParams) -> f64 {
    if lo == hi {
        return 0.0;
    }
    let w = p.omega;
    let c = p.rho * (p.beta - 1.0);
    let d = 1.0 - p.beta;
    let e = d * d * (1.0 - p.rho * p.rho);
    let (sl, sh) = (p.sigma_v(lo), p.sigma_v(hi));
    let (pl, ph) = (w + c * lo, w + c * hi);
    debug_assert!((pl / sl).abs() < 1.0 + 1e-15 && (ph / sh).abs() < 1.0 + 1e-15);

    if pl > 0.0 && ph > 0.0 {
        let num = w * (hi - lo) * (pl * hi + ph * lo) * (sl * sh + pl * ph);
        let den =
            (pl * sh + ph * sl) * (pl * pl * hi * hi + ph * ph * lo * lo + e * lo * lo * hi * hi);
        let t = num / den;
        if t.abs() <= 0.5 {
            return t.atanh() / w;
        }
    }

    // atanh(h(z)) = ln(n(z) / ((1 - beta) rho_perp z)), n(z) = sigma_V(z) + omega + c z.
    let n = |z: f64, s: f64, pz: f64| {
        if pz >= 0.0 {
            s + pz
        } else {
            e * z * z / (s - pz)
        }
    };
    ((n(lo, sl, pl) / n(hi, sh, ph)).ln() + (hi / lo).ln()) / w
}

/// `\int_lo^hi dz / (z sigma_hat_V(z))`, split at `v_hat`: closed form below, `log / a` above.
pub fn rate_integral(lo: f64, hi: f64, model: &CappedModel) -> Result<f64> {
    if !(lo > 0.0) {
        return Err(Error::Domain(format!(
            "rate integral needs lo > 0, got {lo}"
        )));
    }
    if !(hi >= lo) {
        return Err(Error::Domain(format!(
            "rate integral needs lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let v_hat = model.caps.v_hat;
    let a = model.caps.a;
    Ok(if hi <= v_hat {
        uncapped_rate_integral(lo, hi, &model.params)
    } else if lo >= v_hat {
        (hi / lo).ln() / a
    } else {
        uncapped_rate_integral(lo, v_hat, &model.params) + (hi / v_hat).ln() / a
    })
}

/// Large-deviation rate `J_V(K) = 0.5 (\int_{v0}^K dz / (z sigma_hat_V(z)))^2`.
///
/// The split at `v_hat` inside [`rate_integral`] covers the three call cases (`K > v0`) and the
/// three put cases (`K < v0`) of the piecewise form.
pub fn rate_function_jv(k: f64, model: &CappedModel) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("strike must be positive, got {k}")));
    }
    let v0 = model.params.v0;
    let i = rate_integral(k.min(v0), k.max(v0), model)?;
    Ok(0.5 * i * i)
}

/// Short-maturity implied volatility `log(K/v0) / \int_{v0}^K dz / (z sigma_hat_V(z))`,
/// continuously extended by `sigma_hat_V(v0)` at the money.
pub fn implied_vol_limit(k: f64, model: &CappedModel) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("strike must be positive, got {k}")));
    }
    let v0 = model.params.v0;
    let x = (k / v0).ln();
    if x.abs() < ATM_THRESHOLD {
        return Ok(model.sigma_v(v0));
    }
    Ok(x.abs() / rate_integral(k.min(v0), k.max(v0), model)?)
}

/// [`implied_vol_limit`] at log-strike `x = log(K/v0)`.
pub fn implied_vol_limit_at(x: f64, model: &CappedModel) -> Result<f64> {
    implied_vol_limit(model.params.v0 * x.exp(), model)
}

/// ATM level `sigma_V(v0)`, skew, quoted convexity and exact curvature of the limiting
/// smile, as closed forms.
pub fn smile_expansion(p: &SabrParams) -> SmileExpansion {
    let (b1, v0, w, rho) = (p.beta - 1.0, p.v0, p.omega, p.rho);
    let s0 = p.sigma_v(v0);
    let skew = v0 * b1 * (rho * w + b1 * v0) / (2.0 * s0);
    let bracket = 2.0 * w.powi(3) * rho
        + b1 * w * w * (4.0 + rho * rho) * v0
        + 4.0 * b1 * b1 * w * rho * v0 * v0
        + b1.powi(3) * v0.powi(3);
    SmileExpansion {
        atm_level: s0,
        skew,
        convexity: v0 * b1 / (3.0 * s0.powi(4)) * bracket,
        curvature: v0 * b1 / (6.0 * s0.powi(3)) * bracket,
    }
}

/// One row of an exported asymptotic smile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmileCurvePoint {
    pub log_strike: f64,
    pub strike: f64,
    pub implied_vol_limit: f64,
    pub jv: f64,
}

pub fn asymptotic_smile(strikes: &[f64], model: &CappedModel) -> Result<Vec<SmileCurvePoint>> {
    strikes
        .iter()
        .map(|&k| {
            Ok(SmileCurvePoint {
                log_strike: (k / model.params.v0).ln(),
                strike: k,
                implied_vol_limit: implied_vol_limit(k, model)?,
                jv: rate_function_jv(k, model)?,
            })
        })
        .collect()
}

/// CSV with header `log_strike,strike,implied_vol_limit,J_V`.
pub fn write_smile_curve_csv<W: std::io::Write>(
    mut w: W,
    points: &[SmileCurvePoint],
) -> std::io::Result<()> {
    writeln!(w, "log_strike,strike,implied_vol_limit,J_V")?;
    for pt in points {
        writeln!(
            w,
            "{},{},{},{}",
            pt.log_strike, pt.strike, pt.implied_vol_limit, pt.jv
        )?;
    }
    Ok(())
}

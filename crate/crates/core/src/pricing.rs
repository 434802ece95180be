//! Black-formula inversion of Monte Carlo VIX option prices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::asymptotics::{implied_vol_limit, rate_function_jv, ATM_THRESHOLD};
use crate::error::{Bound, Error, Result};
use crate::mc::{
    price_vix_option, simulate_capped_paths, McConfig, McEstimate, OptionKind, PathSet,
};
use crate::model::CappedModel;

/// Absolute price residual of a converged implied vol, relative to the forward.
pub const IV_PRICE_TOLERANCE: f64 = 1e-12;

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn otm_black(k: f64, f: f64, total_vol: f64, kind: OptionKind) -> f64 {
    if total_vol <= 0.0 {
        return kind.payoff(f, k);
    }
    let d1 = (f / k).ln() / total_vol + 0.5 * total_vol;
    let d2 = d1 - total_vol;
    match kind {
        OptionKind::Call => f * norm_cdf(d1) - k * norm_cdf(d2),
        OptionKind::Put => k * norm_cdf(-d2) - f * norm_cdf(-d1),
    }
}

fn otm_kind(k: f64, f: f64) -> OptionKind {
    if k >= f {
        OptionKind::Call
    } else {
        OptionKind::Put
    }
}

/// Undiscounted Black price with forward `f`, strike `k`, maturity `t` and volatility `vol`.
///
/// The out-of-the-money side is evaluated directly and the other by put-call parity, so
/// in-the-money prices keep full relative accuracy in their time value.
pub fn bs_price(k: f64, t: f64, f: f64, vol: f64, kind: OptionKind) -> f64 {
    let total_vol = vol * t.sqrt();
    let side = otm_kind(k, f);
    let otm = otm_black(k, f, total_vol, side);
    if side == kind {
        otm
    } else {
        otm + kind.payoff(f, k)
    }
}

/// Black vega `f phi(d1) sqrt(t)`.
pub fn bs_vega(k: f64, t: f64, f: f64, vol: f64) -> f64 {
    let total_vol = vol * t.sqrt();
    if total_vol <= 0.0 {
        return 0.0;
    }
    let d1 = (f / k).ln() / total_vol + 0.5 * total_vol;
    f * norm_pdf(d1) * t.sqrt()
}

/// Volatility whose undiscounted Black price equals `price`.
///
/// Fails with [`Error::OutOfBounds`] unless `intrinsic < price < upper`, where `upper` is `f`
/// for calls and `k` for puts. Newton steps on the out-of-the-money time value, safeguarded by
/// bisection, run until the price residual is at most `IV_PRICE_TOLERANCE * f`.
pub fn implied_vol(price: f64, k: f64, t: f64, f: f64, kind: OptionKind) -> Result<f64> {
    if !(k > 0.0 && t > 0.0 && f > 0.0) {
        return Err(Error::Domain(format!(
            "implied vol needs positive strike, maturity and forward (k={k}, t={t}, f={f})"
        )));
    }
    let intrinsic = kind.payoff(f, k);
    let upper = match kind {
        OptionKind::Call => f,
        OptionKind::Put => k,
    };
    if !(price > intrinsic) {
        return Err(Error::OutOfBounds {
            bound: Bound::Below,
            price,
        });
    }
    if !(price < upper) {
        return Err(Error::OutOfBounds {
            bound: Bound::Above,
            price,
        });
    }

    let side = otm_kind(k, f);
    let target = price - intrinsic;
    let tol = IV_PRICE_TOLERANCE * f;
    let value = |vol: f64| otm_black(k, f, vol * t.sqrt(), side);

    let mut hi = 1.0;
    while value(hi) < target {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::RootNotFound(format!(
                "no volatility below {hi:e} reaches price {price}"
            )));
        }
    }
    let mut lo = 0.0;
    let mut vol = 0.5 * hi;
    for _ in 0..500 {
        let diff = value(vol) - target;
        if diff.abs() <= tol {
            return Ok(vol);
        }
        if diff > 0.0 {
            hi = vol;
        } else {
            lo = vol;
        }
        let vega = bs_vega(k, t, f, vol);
        let newton = vol - diff / vega;
        vol = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let diff = value(vol) - target;
    if diff.abs() <= tol {
        Ok(vol)
    } else {
        Err(Error::RootNotFound(format!(
            "implied vol residual {diff:e} above {tol:e} at vol {vol}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmileStatus {
    Ok,
    BelowIntrinsic,
    AboveUpperBound,
    NotConverged,
}

impl SmileStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SmileStatus::Ok => "ok",
            SmileStatus::BelowIntrinsic => "below_intrinsic",
            SmileStatus::AboveUpperBound => "above_upper_bound",
            SmileStatus::NotConverged => "not_converged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    pub strike: f64,
    pub log_strike: f64,
    pub kind: OptionKind,
    /// Discounted Monte Carlo price.
    pub price: McEstimate,
    pub implied_vol: Option<f64>,
    /// Implied vols of `price -/+ one standard error`. The lower end is 0 when the shifted
    /// price is at or below intrinsic, the upper end is infinite when it reaches the upper bound.
    pub implied_vol_band: Option<(f64, f64)>,
    pub status: SmileStatus,
}

fn band_end(price: f64, k: f64, t: f64, f: f64, kind: OptionKind) -> f64 {
    match implied_vol(price, k, t, f, kind) {
        Ok(v) => v,
        Err(Error::OutOfBounds {
            bound: Bound::Below,
            ..
        }) => 0.0,
        Err(_) => f64::INFINITY,
    }
}

/// Monte Carlo smile: out-of-the-money prices against `forward`, inverted to implied vols.
///
/// `forward` should be the sample mean of the same paths so that sample put-call parity holds.
pub fn smile_from_paths(
    paths: &PathSet,
    strikes: &[f64],
    maturity: f64,
    rate: f64,
    forward: f64,
) -> Result<Vec<SmilePoint>> {
    let growth = (rate * maturity).exp();
    strikes
        .par_iter()
        .map(|&k| {
            let kind = otm_kind(k, forward);
            let price = price_vix_option(paths, k, kind, rate, maturity)?;
            let undiscounted = price.value * growth;
            let (implied_vol, implied_vol_band, status) =
                match implied_vol(undiscounted, k, maturity, forward, kind) {
                    Ok(iv) => {
                        let se = price.std_error * growth;
                        let lo = band_end(undiscounted - se, k, maturity, forward, kind);
                        let hi = band_end(undiscounted + se, k, maturity, forward, kind);
                        (Some(iv), Some((lo, hi)), SmileStatus::Ok)
                    }
                    Err(Error::OutOfBounds {
                        bound: Bound::Below,
                        ..
                    }) => (None, None, SmileStatus::BelowIntrinsic),
                    Err(Error::OutOfBounds {
                        bound: Bound::Above,
                        ..
                    }) => (None, None, SmileStatus::AboveUpperBound),
                    Err(Error::RootNotFound(_)) => (None, None, SmileStatus::NotConverged),
                    Err(e) => return Err(e),
                };
            Ok(SmilePoint {
                strike: k,
                log_strike: (k / forward).ln(),
                kind,
                price,
                implied_vol,
                implied_vol_band,
                status,
            })
        })
        .collect()
}

/// CSV of a Monte Carlo smile next to the short-maturity limit; missing values are empty.
pub fn write_smile_csv<W: std::io::Write>(
    mut w: W,
    points: &[SmilePoint],
    model: &CappedModel,
) -> std::io::Result<()> {
    writeln!(
        w,
        "strike,log_strike,price,price_se,implied_vol,iv_lo,iv_hi,asymptotic_iv,status"
    )?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for pt in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            pt.strike,
            pt.log_strike,
            pt.price.value,
            pt.price.std_error,
            opt(pt.implied_vol),
            opt(pt.implied_vol_band.map(|b| b.0)),
            opt(pt.implied_vol_band.map(|b| b.1)),
            opt(implied_vol_limit(pt.strike, model).ok()),
            pt.status.as_str()
        )?;
    }
    Ok(())
}

/// One maturity of a price-decay study at a fixed strike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub maturity: f64,
    pub strike: f64,
    pub kind: OptionKind,
    pub price: McEstimate,
    /// `-T log(price)`; infinite when every payoff was zero.
    pub neg_t_log_price: f64,
    pub jv: f64,
    pub gap: f64,
    /// The price is within two standard errors of zero, so its logarithm is unreliable.
    pub statistically_zero: bool,
}

/// `-T log C(T, K)` against `J_V(K)` along a decreasing list of maturities.
///
/// The option is out of the money relative to `v0`: a call for `K > v0`, a put for `K < v0`.
/// Every maturity reuses `m.seed`.
pub fn rate_convergence_study(
    strike: f64,
    model: &CappedModel,
    maturities: &[f64],
    m: &McConfig,
) -> Result<Vec<ConvergenceRow>> {
    let v0 = model.params.v0;
    if !(strike > 0.0) {
        return Err(Error::Domain(format!(
            "strike must be positive, got {strike}"
        )));
    }
    if (strike / v0).ln().abs() < ATM_THRESHOLD {
        return Err(Error::Domain(format!(
            "strike {strike} is at the money; the decay rate vanishes there"
        )));
    }
    if maturities.is_empty() || maturities.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain(
            "maturities must be non-empty and strictly decreasing".into(),
        ));
    }
    let kind = if strike > v0 {
        OptionKind::Call
    } else {
        OptionKind::Put
    };
    let jv = rate_function_jv(strike, model)?;
    maturities
        .iter()
        .map(|&t| {
            let paths = simulate_capped_paths(model, &m.with_horizon(t))?;
            let price = price_vix_option(&paths, strike, kind, 0.0, t)?;
            let neg_t_log_price = -t * price.value.ln();
            Ok(ConvergenceRow {
                maturity: t,
                strike,
                kind,
                price,
                neg_t_log_price,
                jv,
                gap: (neg_t_log_price - jv).abs(),
                statistically_zero: price.value <= 2.0 * price.std_error,
            })
        })
        .collect()
}

//! Natural-scale analysis of the uncapped volatility process.
//!
//! With `b(x) = alpha x^3 + delta x^2` and `sigma(x) = x sigma_V(x)`, the scale density is
//! `p'(x) = exp(-2 F(x))` where `F(x) = \int_0^x (alpha y + delta) / R(y) dy` and
//! `R = sigma_V^2`. `F` has a closed form, `p`, its inverse `q` and the Feller test function
//! `nu` are computed by adaptive quadrature on top of it.

use std::cell::Cell;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SabrParams;
use crate::quadrature::{CancelToken, Integrator, QuadratureConfig};

/// Lower limit of the Feller test function, as a fraction of `v0`.
pub const FELLER_BASE_FRACTION: f64 = 0.01;

/// Relative residual allowed between `p(X)` and the fitted tail `p_inf - c1 X^(-1/(1-beta))`.
pub const TAIL_FIT_TOLERANCE: f64 = 1e-6;

/// Relative increment below which `nu(10 X) - nu(X)` counts as stabilised.
pub const NU_STABILISATION: f64 = 1e-4;

/// `R(x) = omega^2 + 2 omega_bar (1 - beta) x + (1 - beta)^2 x^2` with `omega_bar = -rho omega`
/// (equal to `omega |rho|` for negative correlation).
pub fn r_quadratic(x: f64, p: &SabrParams) -> f64 {
    let omb = 1.0 - p.beta;
    let omega_bar = -p.rho * p.omega;
    p.omega * p.omega + 2.0 * omega_bar * omb * x + omb * omb * x * x
}

/// `ln(R(x) / omega^2)` without cancellation near `x = 0`.
fn log_r_ratio(x: f64, p: &SabrParams) -> f64 {
    let omb = 1.0 - p.beta;
    let omega_bar = -p.rho * p.omega;
    let w2 = p.omega * p.omega;
    ((2.0 * omega_bar * omb * x + omb * omb * x * x) / w2).ln_1p()
}

/// `\int_0^x (a y + b) / R(y) dy` in closed form.
fn rational_over_r(a: f64, b: f64, x: f64, p: &SabrParams) -> f64 {
    let omb = 1.0 - p.beta;
    let rp = p.rho_perp();
    let w = p.omega;
    let shift = -p.rho * w;
    let arc = ((omb * x + shift) / (w * rp)).atan() - (shift / (w * rp)).atan();
    a / (2.0 * omb * omb) * log_r_ratio(x, p) + (a * p.rho * w / omb + b) / (omb * w * rp) * arc
}

/// Closed form of `F(x) = \int_0^x (alpha y + delta) / sigma_V^2(y) dy`:
///
/// ```text
/// F(x) = (1-beta)^-2 { alpha/2 ln(R(x)/omega^2)
///        + beta (1-beta) rho / (2 rho_perp) [atan(((1-beta) x + omega_bar)/(omega rho_perp))
///                                           - atan(omega_bar/(omega rho_perp))] }
/// ```
///
/// For `rho < 0` the bracket coefficient is `-beta (1-beta) |rho| / (2 rho_perp)`.
pub fn f_closed(x: f64, p: &SabrParams) -> f64 {
    let omb = 1.0 - p.beta;
    let rp = p.rho_perp();
    let w = p.omega;
    let omega_bar = -p.rho * w;
    let arc = ((omb * x + omega_bar) / (w * rp)).atan() - (omega_bar / (w * rp)).atan();
    (0.5 * p.alpha() * log_r_ratio(x, p) + 0.5 * p.beta * omb * (p.rho / rp) * arc) / (omb * omb)
}

/// `kappa = exp(pi/2 * beta/(1-beta) * |rho|/rho_perp)`, the width of the envelope on `exp(-2F)`.
pub fn kappa(p: &SabrParams) -> f64 {
    (std::f64::consts::FRAC_PI_2 * p.beta / (1.0 - p.beta) * p.rho.abs() / p.rho_perp()).exp()
}

/// Envelope exponent `alpha / (1 - beta)^2 = (2 - beta) / (2 (1 - beta))`.
pub fn envelope_exponent(p: &SabrParams) -> f64 {
    let omb = 1.0 - p.beta;
    p.alpha() / (omb * omb)
}

/// Lower envelope `(omega^2 / R(x))^(alpha/(1-beta)^2)` of the scale density.
pub fn envelope(x: f64, p: &SabrParams) -> f64 {
    (-envelope_exponent(p) * log_r_ratio(x, p)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub holds: bool,
    /// First grid point where either side failed.
    pub violation: Option<f64>,
}

/// Checks `env(x) <= exp(-2F(x)) <= kappa env(x)` on a grid, comparing logarithms with a
/// `1e-12` tolerance. Meaningful for `rho < 0`.
pub fn exp_f_bounds_check(x_grid: &[f64], p: &SabrParams) -> BoundsCheck {
    const TOL: f64 = 1e-12;
    let log_kappa = kappa(p).ln();
    let m = envelope_exponent(p);
    for &x in x_grid {
        let log_env = -m * log_r_ratio(x, p);
        let log_density = -2.0 * f_closed(x, p);
        if log_density < log_env - TOL || log_density > log_env + log_kappa + TOL {
            return BoundsCheck {
                holds: false,
                violation: Some(x),
            };
        }
    }
    BoundsCheck {
        holds: true,
        violation: None,
    }
}

/// Classification of an endpoint of the natural-scale diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    Regular,
    Exit,
    Natural,
    /// `beta = 0`, which the CEV-type classification does not cover.
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryClassification {
    /// `y = 0`, behaving like the origin of geometric Brownian motion.
    pub lower: BoundaryClass,
    /// `y = p_inf`, behaving like the origin of a CEV process with exponent `beta`.
    pub upper: BoundaryClass,
}

pub fn classify_boundary(p: &SabrParams) -> BoundaryClassification {
    let upper = if p.beta <= 0.0 {
        BoundaryClass::Unclassified
    } else if p.beta < 0.5 {
        BoundaryClass::Regular
    } else {
        BoundaryClass::Exit
    };
    BoundaryClassification {
        lower: BoundaryClass::Natural,
        upper,
    }
}

/// Result of extrapolating `p(X)` to `X -> inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub p_infinity: f64,
    /// Coefficient of `p(x) = p_inf - c1 x^(-1/(1-beta))`.
    pub c1: f64,
    /// The exponent `1 / (1 - beta)` the fit assumes.
    pub tail_exponent: f64,
    /// Free log-log slope of the tail, for comparison with `-tail_exponent`.
    pub fitted_slope: f64,
    /// Largest relative deviation of `p(X)` from the fitted tail law on the fit points.
    pub residual: f64,
    /// `(X, p(X))` on the geometric grid `10^2 .. large_x`.
    pub grid: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub params: SabrParams,
    pub p_infinity: f64,
    pub c1_fit: f64,
    pub tail_exponent: f64,
    pub kappa: f64,
    /// `nu(large_x)`.
    pub nu_at_large_x: f64,
    /// `(X, nu(X))` on the stabilisation grid.
    pub nu_profile: Vec<(f64, f64)>,
    pub nu_stabilized: bool,
    /// Inner Feller integral blows up like `2 / (omega^2 c)` as `c -> 0`.
    pub nu_zero_divergent: bool,
    pub explosion_flag: bool,
    pub boundary_class: BoundaryClass,
    pub lower_boundary_class: BoundaryClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleDiagnostic {
    /// `(X, p_hat(X))` for growing positive `X`.
    pub positive_tail: Vec<(f64, f64)>,
    /// `(-X, p_hat(-X))` for growing `X`.
    pub negative_tail: Vec<(f64, f64)>,
    pub diverges_up: bool,
    pub diverges_down: bool,
    /// The asset price is a true martingale when both tails diverge.
    pub true_martingale: bool,
}

/// Scale-function machinery for one parameter set.
#[derive(Debug)]
pub struct ScaleAnalysis {
    params: SabrParams,
    cfg: QuadratureConfig,
    cancel: Option<CancelToken>,
    tail: OnceLock<TailFit>,
}

impl ScaleAnalysis {
    pub fn new(params: SabrParams, cfg: QuadratureConfig) -> Self {
        Self {
            params,
            cfg,
            cancel: None,
            tail: OnceLock::new(),
        }
    }

    pub fn with_cancel(mut self, token: CancelToken) -> Self {
        self.cancel = Some(token);
        self
    }

    pub fn params(&self) -> &SabrParams {
        &self.params
    }

    fn integrator(&self) -> Integrator<'_> {
        Integrator::with_cancel(&self.cfg, self.cancel.as_ref())
    }

    /// `p'(x) = exp(-2 F(x))`.
    pub fn scale_density(&self, x: f64) -> f64 {
        (-2.0 * f_closed(x, &self.params)).exp()
    }

    /// `p(x) = \int_0^x exp(-2F)`, with `p(0) = 0`.
    pub fn scale_p(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!(
                "scale function needs x >= 0, got {x}"
            )));
        }
        self.scale_p_between(0.0, x)
    }

    /// `\int_lo^hi p'`, split into a linear piece below 1 and a log-substituted piece above.
    fn scale_p_between(&self, lo: f64, hi: f64) -> Result<f64> {
        let it = self.integrator();
        let f = |y: f64| self.scale_density(y);
        if hi <= 1.0 || lo >= 1.0 {
            if lo >= 1.0 && hi / lo > 10.0 {
                return it.integrate_log(f, lo, hi);
            }
            return it.integrate(f, lo, hi);
        }
        Ok(it.integrate(f, lo, 1.0)? + it.integrate_log(f, 1.0, hi)?)
    }

    /// `p_inf - p(x) = \int_x^inf p'` for `x > 0`.
    pub fn scale_tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("tail needs x > 0, got {x}")));
        }
        let it = self.integrator();
        let f = |y: f64| self.scale_density(y);
        if x >= 1.0 {
            it.integrate_to_infinity(f, x)
        } else {
            Ok(it.integrate(f, x, 1.0)? + it.integrate_to_infinity(f, 1.0)?)
        }
    }

    /// Extrapolated `p_inf` and the tail constant `c1`.
    ///
    /// `p` is evaluated on the half-decade grid `large_x * 10^(-4), ..., large_x`. On the five
    /// largest points the tail `p_inf - p(X)` is integrated directly, `p_inf` is the average of
    /// `p(X) + tail(X)` and `c1` the least-squares constant of `tail(X) = c1 X^-k`,
    /// `k = 1/(1-beta)`. The fit fails if `p` deviates from the tail law by more than
    /// [`TAIL_FIT_TOLERANCE`] relative to `p_inf`.
    pub fn p_infinity(&self) -> Result<&TailFit> {
        if let Some(fit) = self.tail.get() {
            return Ok(fit);
        }
        let fit = self.compute_tail_fit()?;
        Ok(self.tail.get_or_init(|| fit))
    }

    fn compute_tail_fit(&self) -> Result<TailFit> {
        let large = self.cfg.large_x;
        let xs: Vec<f64> = (0..=8)
            .map(|j| large * 10f64.powf((j as f64 - 8.0) / 2.0))
            .collect();
        let mut grid = Vec::with_capacity(xs.len());
        let mut acc = self.scale_p(xs[0])?;
        grid.push((xs[0], acc));
        for w in xs.windows(2) {
            acc += self.scale_p_between(w[0], w[1])?;
            grid.push((w[1], acc));
        }

        let k = 1.0 / (1.0 - self.params.beta);
        let fit_points = &grid[grid.len() - 5..];
        let tails = fit_points
            .iter()
            .map(|&(x, _)| self.scale_tail(x))
            .collect::<Result<Vec<_>>>()?;

        let n = fit_points.len() as f64;
        let p_infinity = fit_points
            .iter()
            .zip(&tails)
            .map(|(&(_, px), t)| px + t)
            .sum::<f64>()
            / n;
        let log_c1 = fit_points
            .iter()
            .zip(&tails)
            .map(|(&(x, _), t)| t.ln() + k * x.ln())
            .sum::<f64>()
            / n;
        let c1 = log_c1.exp();

        let lx: Vec<f64> = fit_points.iter().map(|(x, _)| x.ln()).collect();
        let lt: Vec<f64> = tails.iter().map(|t| t.ln()).collect();
        let fitted_slope = least_squares_slope(&lx, &lt);

        let residual = fit_points
            .iter()
            .map(|&(x, px)| (px - (p_infinity - c1 * x.powf(-k))).abs() / p_infinity)
            .fold(0.0, f64::max);

        if !(p_infinity.is_finite() && c1.is_finite() && c1 > 0.0) || residual > TAIL_FIT_TOLERANCE
        {
            return Err(Error::TailFit {
                residual,
                tolerance: TAIL_FIT_TOLERANCE,
            });
        }
        Ok(TailFit {
            p_infinity,
            c1,
            tail_exponent: k,
            fitted_slope,
            residual,
            grid,
        })
    }

    /// Inverse of the scale function: `x` with `p(x) = y`, `0 <= y < p_inf`.
    pub fn q_inverse(&self, y: f64) -> Result<f64> {
        let p_inf = self.p_infinity()?.p_infinity;
        if !(y >= 0.0 && y < p_inf) {
            return Err(Error::Domain(format!(
                "q(y) needs 0 <= y < p_inf = {p_inf}, got {y}"
            )));
        }
        if y == 0.0 {
            return Ok(0.0);
        }

        // Newton in s = ln x, bracketed. p is advanced incrementally from the last evaluation.
        let mut anchor = (0.0f64, 0.0f64);
        let mut eval = |x: f64| -> Result<f64> {
            let v = anchor.1 + self.scale_p_between(anchor.0, x)?;
            anchor = (x, v);
            Ok(v)
        };

        // p(x) ~ x near the origin; start from y and grow the bracket geometrically.
        let mut s = y.ln();
        let mut g = eval(s.exp())? - y;
        let (mut s_lo, mut s_hi);
        if g < 0.0 {
            s_lo = s;
            s_hi = s + 1.0;
            while eval(s_hi.exp())? - y < 0.0 {
                s_lo = s_hi;
                s_hi += (s_hi - s).max(1.0);
                if s_hi > 700.0 {
                    return Err(Error::RootNotFound(format!("no bracket for q({y})")));
                }
            }
        } else {
            s_hi = s;
            s_lo = s - 1.0;
            while eval(s_lo.exp())? - y > 0.0 {
                s_hi = s_lo;
                s_lo -= 1.0;
                if s_lo < -700.0 {
                    return Err(Error::RootNotFound(format!("no bracket for q({y})")));
                }
            }
        }
        s = 0.5 * (s_lo + s_hi);
        g = eval(s.exp())? - y;

        for _ in 0..200 {
            if g == 0.0 {
                break;
            }
            if g < 0.0 {
                s_lo = s;
            } else {
                s_hi = s;
            }
            let x = s.exp();
            let slope = x * self.scale_density(x);
            let mut next = s - g / slope;
            if !(next > s_lo && next < s_hi) || !next.is_finite() {
                next = 0.5 * (s_lo + s_hi);
            }
            let step = (next - s).abs();
            s = next;
            g = eval(s.exp())? - y;
            if step < 1e-15 * s.abs().max(1.0) || (s_hi - s_lo) < 1e-15 * s.abs().max(1.0) {
                break;
            }
        }
        Ok(s.exp())
    }

    /// Volatility of `Y = p(v)`: `p'(q(y)) q(y) sigma_V(q(y))` on `(0, p_inf)`, zero elsewhere.
    pub fn natural_scale_sigma(&self, y: f64) -> Result<f64> {
        let p_inf = self.p_infinity()?.p_infinity;
        if !(y > 0.0 && y < p_inf) {
            return Ok(0.0);
        }
        let x = self.q_inverse(y)?;
        Ok(self.scale_density(x) * x * self.params.sigma_v(x))
    }

    /// Lower limit `c` used in the Feller test function.
    pub fn feller_base(&self) -> f64 {
        FELLER_BASE_FRACTION * self.params.v0
    }

    /// `2 / (p'(z) sigma^2(z))` with `sigma(z) = z sigma_V(z)`.
    fn feller_inner_density(&self, z: f64) -> f64 {
        2.0 * (2.0 * f_closed(z, &self.params)).exp() / (z * z * self.params.sigma_v_sq(z))
    }

    /// Feller test function `nu(x) = \int_c^x p'(y) \int_c^y 2 dz / (p'(z) sigma^2(z)) dy`
    /// with `c = 0.01 v0`.
    pub fn feller_nu(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("nu needs x > 0, got {x}")));
        }
        let c = self.feller_base();
        if x >= c {
            return Ok(self.feller_nu_profile(&[x])?[0]);
        }
        let it = self.integrator();
        let failure = Cell::new(None);
        let v = it.integrate_log(
            |y| {
                let inner = capture(
                    it.integrate_log(|z| self.feller_inner_density(z), c, y),
                    &failure,
                );
                self.scale_density(y) * inner
            },
            c,
            x,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        v.and_then(finite)
    }

    /// `nu` at increasing points `xs >= c`, computed in one sweep.
    pub fn feller_nu_profile(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let c = self.feller_base();
        if xs.iter().any(|&x| x < c) || xs.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain(format!(
                "nu profile needs increasing points >= {c}"
            )));
        }
        let Some(&last) = xs.last() else {
            return Ok(Vec::new());
        };

        // Breakpoints: a decade grid from c merged with the requested points.
        let mut knots = vec![c];
        let mut t = c;
        while t * 10.0 < last {
            t *= 10.0;
            knots.push(t);
        }
        knots.extend_from_slice(xs);
        knots.sort_by(f64::total_cmp);
        knots.dedup();

        let it = self.integrator();
        let mut out = Vec::with_capacity(xs.len());
        let mut next_x = xs.iter().peekable();
        let (mut inner_acc, mut nu_acc) = (0.0, 0.0);
        let mut prev = c;
        while next_x.peek().is_some_and(|&&x| x == c) {
            out.push(0.0);
            next_x.next();
        }
        for &k in knots.iter().skip(1) {
            let base = inner_acc;
            let failure = Cell::new(None);
            let seg = it.integrate_log(
                |y| {
                    let inner = capture(
                        it.integrate_log(|z| self.feller_inner_density(z), prev, y),
                        &failure,
                    );
                    self.scale_density(y) * (base + inner)
                },
                prev,
                k,
            );
            if let Some(e) = failure.take() {
                return Err(e);
            }
            nu_acc += finite(seg?)?;
            inner_acc += it.integrate_log(|z| self.feller_inner_density(z), prev, k)?;
            prev = k;
            while next_x.peek().is_some_and(|&&x| x == k) {
                out.push(nu_acc);
                next_x.next();
            }
        }
        Ok(out)
    }

    /// Numerical check that `nu(0+) = inf`: `c * \int_c^{v0} 2 dz / (p' sigma^2) -> 2 / omega^2`
    /// as `c -> 0`, i.e. the inner integral diverges like `1/c`.
    pub fn nu_zero_divergent(&self) -> Result<bool> {
        let it = self.integrator();
        let v0 = self.params.v0;
        let target = 2.0 / (self.params.omega * self.params.omega);
        let mut prev = 0.0;
        let mut last_ratio = 0.0;
        for k in 2..=8 {
            let c = v0 * 10f64.powi(-k);
            let inner = it.integrate_log(|z| self.feller_inner_density(z), c, v0)?;
            if inner <= prev {
                return Ok(false);
            }
            prev = inner;
            last_ratio = c * inner / target;
        }
        Ok((last_ratio - 1.0).abs() < 1e-2)
    }

    /// Feller explosion verdict plus the scale-function summary.
    ///
    /// `nu` is evaluated at `X = large_x * 10^j`, `j = -4..=1`; it counts as stabilised when
    /// `|nu(10X) - nu(X)| < max(abs_tol, 1e-4 nu(X))` for the two largest `X` with `10X` on the
    /// grid. A stabilised, finite `nu(inf-)` means explosion with positive probability.
    pub fn explosion_verdict(&self) -> Result<ScaleReport> {
        self.params.require_assumption1()?;
        let tail = self.p_infinity()?.clone();
        let large = self.cfg.large_x;
        let xs: Vec<f64> = (-4..=1).map(|j| large * 10f64.powi(j)).collect();
        let nus = self.feller_nu_profile(&xs)?;
        let n = nus.len();
        let nu_stabilized = nus.iter().all(|v| v.is_finite())
            && (n - 3..n - 1).all(|i| {
                (nus[i + 1] - nus[i]).abs() < self.cfg.abs_tol.max(NU_STABILISATION * nus[i])
            });
        let nu_at_large_x = nus[n - 2];
        let boundary = classify_boundary(&self.params);
        Ok(ScaleReport {
            params: self.params,
            p_infinity: tail.p_infinity,
            c1_fit: tail.c1,
            tail_exponent: tail.tail_exponent,
            kappa: kappa(&self.params),
            nu_at_large_x,
            nu_profile: xs.into_iter().zip(nus).collect(),
            nu_stabilized,
            nu_zero_divergent: self.nu_zero_divergent()?,
            explosion_flag: nu_stabilized && nu_at_large_x.is_finite(),
            boundary_class: boundary.upper,
            lower_boundary_class: boundary.lower,
        })
    }

    /// `F_hat(xi) = 2 beta \int_0^xi (0.5 (1 - beta) y - rho) / sigma_V^2(y) dy`.
    pub fn aux_exponent(&self, xi: f64) -> f64 {
        let p = &self.params;
        rational_over_r(p.beta * (1.0 - p.beta), -2.0 * p.beta * p.rho, xi, p)
    }

    /// Scale function `p_hat` of the auxiliary volatility process; the asset is a true
    /// martingale iff `p_hat(+-inf) = +-inf`. Divergence is declared on each side when the
    /// decade increments `|p_hat(10X) - p_hat(X)|` do not shrink up to `large_x`.
    pub fn martingale_diagnostic(&self) -> Result<MartingaleDiagnostic> {
        let it = self.integrator();
        let large = self.cfg.large_x;
        let xs: Vec<f64> = (-4..=0).map(|j| large * 10f64.powi(j)).collect();

        let side = |sign: f64| -> Result<Vec<(f64, f64)>> {
            let f = |t: f64| self.aux_exponent(sign * t).exp();
            let mut acc = it.integrate(f, 0.0, xs[0])?;
            let mut out = vec![(sign * xs[0], sign * acc)];
            for w in xs.windows(2) {
                acc += it.integrate_log(f, w[0], w[1])?;
                out.push((sign * w[1], sign * acc));
            }
            Ok(out)
        };
        let positive_tail = side(1.0)?;
        let negative_tail = side(-1.0)?;

        let diverges = |tail: &[(f64, f64)]| {
            let n = tail.len();
            let d_prev = (tail[n - 2].1 - tail[n - 3].1).abs();
            let d_last = (tail[n - 1].1 - tail[n - 2].1).abs();
            tail.iter().all(|(_, v)| v.is_finite()) && d_last >= d_prev && d_last > 0.0
        };
        let diverges_up = diverges(&positive_tail);
        let diverges_down = diverges(&negative_tail);
        Ok(MartingaleDiagnostic {
            positive_tail,
            negative_tail,
            diverges_up,
            diverges_down,
            true_martingale: diverges_up && diverges_down,
        })
    }
}

/// Unwraps an inner integral, parking the first error so the outer caller can return it.
fn capture(r: Result<f64>, failure: &Cell<Option<Error>>) -> f64 {
    match r {
        Ok(v) => v,
        Err(e) => {
            let prev = failure.take();
            failure.set(prev.or(Some(e)));
            f64::NAN
        }
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain("non-finite nested integral".into()))
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

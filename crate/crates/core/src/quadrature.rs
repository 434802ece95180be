//! Adaptive Gauss–Kronrod (G7/K15) quadrature with global error control.
//!
//! The interval with the largest local error estimate is bisected until the summed estimate
//! drops below `max(abs_tol, rel_tol * |I|)`. Semi-infinite and many-decade ranges are mapped
//! onto finite, well-scaled intervals before integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation level standing in for infinity in the scale-function diagnostics.
    pub large_x: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 1_000_000,
            large_x: 1e6,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "abs_tol",
                value: self.abs_tol,
                reason: "must be positive",
            });
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must be positive",
            });
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter {
                name: "max_subdivisions",
                value: self.max_subdivisions as f64,
                reason: "must be at least 1",
            });
        }
        if !(self.large_x > 0.0 && self.large_x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "large_x",
                value: self.large_x,
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }
}

/// Cooperative cancellation flag, checked between subdivisions.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, AtomicOrdering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(AtomicOrdering::Relaxed)
    }
}

// Kronrod abscissae (descending, last is the centre) and weights; Gauss weights belong to
// the odd-indexed Kronrod nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, node) in XGK.iter().take(7).enumerate() {
        let dx = half * node;
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv[j] = (f1, f2);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

/// Adaptive integrator bound to a configuration and an optional cancellation token.
#[derive(Debug, Clone, Copy)]
pub struct Integrator<'a> {
    cfg: &'a QuadratureConfig,
    cancel: Option<&'a CancelToken>,
}

impl<'a> Integrator<'a> {
    pub fn new(cfg: &'a QuadratureConfig) -> Self {
        Self { cfg, cancel: None }
    }

    pub fn with_cancel(cfg: &'a QuadratureConfig, cancel: Option<&'a CancelToken>) -> Self {
        Self { cfg, cancel }
    }

    pub fn config(&self) -> &QuadratureConfig {
        self.cfg
    }

    /// `\int_lo^hi f`; reversed limits flip the sign.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        if lo == hi {
            return Ok(0.0);
        }
        if hi < lo {
            return self.integrate(f, hi, lo).map(|v| -v);
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Domain(format!("non-finite limits [{lo}, {hi}]")));
        }

        let first = gauss_kronrod(&f, lo, hi);
        let mut total = first.value;
        let mut total_err = first.error;
        let mut heap = BinaryHeap::new();
        // Segments too narrow to split further; their error is accepted as roundoff.
        let mut frozen_err = 0.0;
        let mut frozen_val = 0.0;
        heap.push(first);
        let mut subdivisions = 0usize;

        while total_err > self.cfg.abs_tol.max(self.cfg.rel_tol * total.abs()) {
            if let Some(token) = self.cancel {
                if token.is_cancelled() {
                    return Err(Error::Cancelled);
                }
            }
            let Some(worst) = heap.pop() else {
                break;
            };
            let mid = 0.5 * (worst.lo + worst.hi);
            if !(mid > worst.lo && mid < worst.hi)
                || (worst.hi - worst.lo) <= 64.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs())
            {
                frozen_err += worst.error;
                frozen_val += worst.value;
                continue;
            }
            if subdivisions >= self.cfg.max_subdivisions {
                return Err(Error::QuadratureNonConvergence {
                    lo,
                    hi,
                    subdivisions,
                    error: total_err,
                });
            }
            subdivisions += 1;
            let left = gauss_kronrod(&f, worst.lo, mid);
            let right = gauss_kronrod(&f, mid, worst.hi);
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }

        // Re-sum to shed drift from the incremental updates.
        let value = heap.iter().map(|s| s.value).sum::<f64>() + frozen_val;
        let error = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
        if !value.is_finite() {
            return Err(Error::Domain(format!(
                "integrand produced a non-finite value on [{lo}, {hi}]"
            )));
        }
        let tol = self.cfg.abs_tol.max(self.cfg.rel_tol * value.abs());
        if error > tol && error > 1e3 * f64::EPSILON * value.abs() {
            return Err(Error::QuadratureNonConvergence {
                lo,
                hi,
                subdivisions,
                error,
            });
        }
        Ok(value)
    }

    /// Integrates over `[lo, hi]`, `0 < lo`, in the variable `t = ln x`. Suited to ranges that
    /// span many decades.
    pub fn integrate_log<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::Domain(format!(
                "log-substituted integral needs positive limits, got [{lo}, {hi}]"
            )));
        }
        self.integrate(
            |t| {
                let x = t.exp();
                f(x) * x
            },
            lo.ln(),
            hi.ln(),
        )
    }

    /// `\int_lo^inf f` for `lo > 0` via `x = lo / u`; exact for `f ~ x^-2` tails and smooth for
    /// faster power decay.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, lo: f64) -> Result<f64> {
        if !(lo > 0.0) {
            return Err(Error::Domain(format!(
                "tail integral needs a positive lower limit, got {lo}"
            )));
        }
        self.integrate(
            |u| {
                let x = lo / u;
                let fx = f(x);
                if fx == 0.0 {
                    0.0
                } else {
                    fx * lo / (u * u)
                }
            },
            0.0,
            1.0,
        )
    }
}

/// Convenience wrapper around [`Integrator::integrate`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Integrator::new(cfg).integrate(f, lo, hi)
}

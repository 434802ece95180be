use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{capped_path_rng, normal, step, stream_rng, McConfig, McEstimate, DOMAIN_INNER};
use crate::error::{Error, Result};
use crate::model::CappedModel;

/// Standard errors of inner-MC noise tolerated before a path counts as violating the bounds.
pub const VIOLATION_Z: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedVixEstimate {
    pub maturity: f64,
    pub window: f64,
    /// `v_T` on each outer path.
    pub v_t: Vec<f64>,
    /// Inner-MC estimate of `VIX_T` on each outer path.
    pub vix: Vec<McEstimate>,
    /// `e^{-b tau}`.
    pub lower_factor: f64,
    /// `e^{b tau + a^2 tau / 2}`.
    pub upper_factor: f64,
    /// Fraction of outer paths where `v_T e^{-b tau} <= VIX_T <= v_T e^{b tau + a^2 tau/2}`
    /// fails by more than [`VIOLATION_Z`] standard errors.
    pub violation_fraction: f64,
}

/// Nested estimator of `VIX_T = sqrt(E[(1/tau) \int_T^{T+tau} v_t^2 dt | F_T])`.
///
/// Outer paths are the ones [`super::simulate_capped_paths`] produces for the same seed, run to
/// `maturity` with `m.n_steps` steps. From each `v_T`, `m.inner_paths` continuations of
/// `m.inner_steps` steps cover `[T, T + window]`; `v^2` is integrated by the trapezoid rule
/// and the square root of the inner mean is reported.
pub fn estimate_vix_nested(
    model: &CappedModel,
    m: &McConfig,
    maturity: f64,
    window: f64,
) -> Result<NestedVixEstimate> {
    let m = m.with_horizon(maturity);
    m.validate()?;
    if !(window > 0.0) {
        return Err(Error::Domain(format!(
            "VIX window must be positive, got {window}"
        )));
    }
    if m.inner_paths < 2 {
        return Err(Error::Domain(
            "nested VIX needs at least 2 inner paths".into(),
        ));
    }

    let dt = maturity / m.n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let idt = window / m.inner_steps as f64;
    let sqrt_idt = idt.sqrt();
    let lower_factor = (-model.caps.b * window).exp();
    let upper_factor = (model.caps.b * window + 0.5 * model.caps.a * model.caps.a * window).exp();

    let per_path: Vec<(f64, McEstimate)> = (0..m.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = capped_path_rng(m.seed, i);
            let mut v_t = model.params.v0;
            for _ in 0..m.n_steps {
                v_t = step(model, m.scheme, v_t, dt, sqrt_dt, normal(&mut rng));
            }
            let mut inner = Vec::with_capacity(m.inner_paths);
            for j in 0..m.inner_paths {
                let mut rng = stream_rng(m.seed, DOMAIN_INNER, i as u64, j as u64);
                let mut v = v_t;
                let mut acc = 0.5 * v * v;
                for k in 0..m.inner_steps {
                    v = step(model, m.scheme, v, idt, sqrt_idt, normal(&mut rng));
                    acc += if k + 1 == m.inner_steps {
                        0.5 * v * v
                    } else {
                        v * v
                    };
                }
                inner.push(acc / m.inner_steps as f64);
            }
            let var = McEstimate::from_samples(&inner).expect("inner sample is non-empty");
            let vix = var.value.sqrt();
            let se = if vix > 0.0 {
                var.std_error / (2.0 * vix)
            } else {
                0.0
            };
            (
                v_t,
                McEstimate {
                    value: vix,
                    std_error: se,
                    n_effective: var.n_effective,
                },
            )
        })
        .collect();

    let violations = per_path
        .iter()
        .filter(|(v_t, est)| {
            est.value + VIOLATION_Z * est.std_error < v_t * lower_factor
                || est.value - VIOLATION_Z * est.std_error > v_t * upper_factor
        })
        .count();

    let (v_t, vix) = per_path.into_iter().unzip();
    Ok(NestedVixEstimate {
        maturity,
        window,
        v_t,
        vix,
        lower_factor,
        upper_factor,
        violation_fraction: violations as f64 / m.n_paths as f64,
    })
}

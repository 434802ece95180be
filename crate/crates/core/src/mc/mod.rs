//! Monte Carlo simulation of the capped volatility process.
//!
//! Every path draws from its own ChaCha8 stream keyed by `(seed, domain)` and indexed by the
//! path number, so output is bit-identical for any worker count. Reductions run sequentially
//! in path order.

mod nested;
mod sabr2d;

pub use nested::{estimate_vix_nested, NestedVixEstimate, VIOLATION_Z};
pub use sabr2d::{simulate_sabr_2d, Sabr2dSample};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CappedModel;

/// Time-stepping scheme for `dv / v = sigma dW + mu dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `v <- v exp((mu - sigma^2/2) dt + sigma sqrt(dt) xi)`; always positive.
    #[default]
    LogEuler,
    /// `v <- v (1 + mu dt + sigma sqrt(dt) xi)`, floored at the smallest positive double.
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    /// Maturity `T` in years.
    pub horizon: f64,
    /// VIX averaging window `tau` in years.
    pub vix_window: f64,
    pub seed: u64,
    /// Inner paths per outer path for the nested VIX estimator.
    pub inner_paths: usize,
    pub inner_steps: usize,
    pub scheme: Scheme,
    /// Keep every path, not just the terminal values.
    pub store_paths: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 100,
            horizon: 0.1,
            vix_window: 30.0 / 365.0,
            seed: 20_250_715,
            inner_paths: 1000,
            inner_steps: 20,
            scheme: Scheme::LogEuler,
            store_paths: false,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::InvalidParameter {
                name: "n_paths",
                value: self.n_paths as f64,
                reason: "must be at least 1",
            });
        }
        if self.n_steps < 1 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                value: self.n_steps as f64,
                reason: "must be at least 1",
            });
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: self.horizon,
                reason: "must be positive and finite",
            });
        }
        if !(self.vix_window >= 0.0 && self.vix_window.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "vix_window",
                value: self.vix_window,
                reason: "must be non-negative and finite",
            });
        }
        if self.inner_steps < 1 {
            return Err(Error::InvalidParameter {
                name: "inner_steps",
                value: self.inner_steps as f64,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    pub fn with_horizon(&self, horizon: f64) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }
}

/// Sample mean with its standard error `sd / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_effective: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::Domain("estimate from an empty sample".into()));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            value: mean,
            std_error,
            n_effective: n,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
            n_effective: self.n_effective,
        }
    }
}

/// Simulated capped paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub n_steps: usize,
    pub horizon: f64,
    pub terminal_values: Vec<f64>,
    /// Full paths in step-major layout: entry `step * n_paths + path`, `n_steps + 1` rows.
    pub paths: Option<Vec<f64>>,
}

impl PathSet {
    pub fn n_paths(&self) -> usize {
        self.terminal_values.len()
    }

    pub fn value_at(&self, step: usize, path: usize) -> Option<f64> {
        self.paths
            .as_ref()
            .and_then(|p| p.get(step * self.n_paths() + path).copied())
    }

    /// One terminal value per line with 17 significant digits.
    pub fn write_terminal_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.terminal_values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn payoff(self, underlying: f64, strike: f64) -> f64 {
        match self {
            OptionKind::Call => (underlying - strike).max(0.0),
            OptionKind::Put => (strike - underlying).max(0.0),
        }
    }
}

pub(crate) const DOMAIN_CAPPED: u64 = 0x6361_7070_6564_0001;
pub(crate) const DOMAIN_INNER: u64 = 0x696e_6e65_7200_0002;
pub(crate) const DOMAIN_SABR2D: u64 = 0x7361_6272_3264_0003;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream `index` of the generator keyed by `(seed, domain, key)`.
pub(crate) fn stream_rng(seed: u64, domain: u64, key: u64, index: u64) -> ChaCha8Rng {
    let k = splitmix64(splitmix64(seed ^ domain) ^ key);
    let mut rng = ChaCha8Rng::seed_from_u64(k);
    rng.set_stream(index);
    rng
}

#[inline]
pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

#[inline]
pub(crate) fn step(
    model: &CappedModel,
    scheme: Scheme,
    v: f64,
    dt: f64,
    sqrt_dt: f64,
    z: f64,
) -> f64 {
    let s = model.sigma_v(v);
    let mu = model.mu_v(v);
    match scheme {
        Scheme::LogEuler => v * ((mu - 0.5 * s * s) * dt + s * sqrt_dt * z).exp(),
        Scheme::Euler => (v * (1.0 + mu * dt + s * sqrt_dt * z)).max(f64::MIN_POSITIVE),
    }
}

/// Outer-path generator shared by the forward, option and nested estimators.
pub(crate) fn capped_path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    stream_rng(seed, DOMAIN_CAPPED, 0, path as u64)
}

/// Simulates `n_paths` capped paths of `n_steps` over `[0, horizon]` from `v0`.
pub fn simulate_capped_paths(model: &CappedModel, m: &McConfig) -> Result<PathSet> {
    m.validate()?;
    let n = m.n_steps;
    let dt = m.horizon / n as f64;
    let sqrt_dt = dt.sqrt();
    let v0 = model.params.v0;

    if m.store_paths {
        let per_path: Vec<Vec<f64>> = (0..m.n_paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = capped_path_rng(m.seed, i);
                let mut path = Vec::with_capacity(n + 1);
                let mut v = v0;
                path.push(v);
                for _ in 0..n {
                    v = step(model, m.scheme, v, dt, sqrt_dt, normal(&mut rng));
                    path.push(v);
                }
                path
            })
            .collect();
        let mut flat = vec![0.0; (n + 1) * m.n_paths];
        for (i, path) in per_path.iter().enumerate() {
            for (k, &v) in path.iter().enumerate() {
                flat[k * m.n_paths + i] = v;
            }
        }
        let terminal_values = per_path.iter().map(|p| p[n]).collect();
        return Ok(PathSet {
            n_steps: n,
            horizon: m.horizon,
            terminal_values,
            paths: Some(flat),
        });
    }

    let terminal_values = (0..m.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = capped_path_rng(m.seed, i);
            let mut v = v0;
            for _ in 0..n {
                v = step(model, m.scheme, v, dt, sqrt_dt, normal(&mut rng));
            }
            v
        })
        .collect();
    Ok(PathSet {
        n_steps: n,
        horizon: m.horizon,
        terminal_values,
        paths: None,
    })
}

/// `F_V(T, a) = E[v_T]` with its standard error.
pub fn estimate_forward(paths: &PathSet) -> Result<McEstimate> {
    McEstimate::from_samples(&paths.terminal_values)
}

/// `e^{-rT} E[payoff(v_T)]`, using `v_T` for `VIX_T` (the `tau -> 0` convention).
pub fn price_vix_option(
    paths: &PathSet,
    strike: f64,
    kind: OptionKind,
    rate: f64,
    maturity: f64,
) -> Result<McEstimate> {
    if !(strike > 0.0) {
        return Err(Error::Domain(format!(
            "strike must be positive, got {strike}"
        )));
    }
    let payoffs: Vec<f64> = paths
        .terminal_values
        .iter()
        .map(|&v| kind.payoff(v, strike))
        .collect();
    Ok(McEstimate::from_samples(&payoffs)?.scaled((-rate * maturity).exp()))
}

/// Terminal values for several coarse step counts driven by the same Brownian path.
///
/// Each path draws `fine_steps` increments; a run with `n` steps aggregates consecutive blocks
/// of `fine_steps / n` of them. `fine_steps` must be a multiple of every entry of `step_counts`.
pub fn terminal_values_common_noise(
    model: &CappedModel,
    m: &McConfig,
    step_counts: &[usize],
    fine_steps: usize,
) -> Result<Vec<Vec<f64>>> {
    m.validate()?;
    if step_counts
        .iter()
        .any(|&n| n == 0 || !fine_steps.is_multiple_of(n))
    {
        return Err(Error::Domain(format!(
            "fine step count {fine_steps} must be a multiple of every coarse count {step_counts:?}"
        )));
    }
    let per_path: Vec<Vec<f64>> = (0..m.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = capped_path_rng(m.seed, i);
            let z: Vec<f64> = (0..fine_steps).map(|_| normal(&mut rng)).collect();
            step_counts
                .iter()
                .map(|&n| {
                    let block = fine_steps / n;
                    let dt = m.horizon / n as f64;
                    let sqrt_dt = dt.sqrt();
                    let scale = 1.0 / (block as f64).sqrt();
                    z.chunks(block).fold(model.params.v0, |v, c| {
                        step(
                            model,
                            m.scheme,
                            v,
                            dt,
                            sqrt_dt,
                            c.iter().sum::<f64>() * scale,
                        )
                    })
                })
                .collect()
        })
        .collect();
    Ok((0..step_counts.len())
        .map(|j| per_path.iter().map(|row| row[j]).collect())
        .collect())
}

use std::path::{Path, PathBuf};

use sabr_vix_core::{CappedModel, McConfig, QuadratureConfig, SabrParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// SABR parameters as written in a config file; every field is optional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelInput {
    pub beta: f64,
    pub rho: f64,
    pub omega: f64,
    pub v0: f64,
}

impl Default for ModelInput {
    fn default() -> Self {
        Self {
            beta: 0.5,
            rho: -0.7,
            omega: 1.0,
            v0: 0.1,
        }
    }
}

impl ModelInput {
    pub fn params(&self) -> SabrParams {
        SabrParams {
            beta: self.beta,
            rho: self.rho,
            omega: self.omega,
            v0: self.v0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapsInput {
    /// Cap on the diffusion coefficient.
    pub a: f64,
    /// Cap on the absolute drift.
    pub b: f64,
}

impl Default for CapsInput {
    fn default() -> Self {
        Self { a: 2.0, b: 1.0 }
    }
}

/// Everything a command needs. Missing fields take the reference defaults, so an empty JSON
/// object is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelInput,
    pub caps: CapsInput,
    pub mc: McConfig,
    pub quadrature: QuadratureConfig,
    /// Strike grid for `smile`.
    pub strikes: Vec<f64>,
    /// Decreasing maturities for `converge`.
    pub maturities: Vec<f64>,
    pub rate: f64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

/// 25 log-spaced strikes in `[0.05, 0.25]`.
pub fn default_strikes() -> Vec<f64> {
    (0..25).map(|i| 0.05 * 5f64.powf(i as f64 / 24.0)).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelInput::default(),
            caps: CapsInput::default(),
            mc: McConfig::default(),
            quadrature: QuadratureConfig::default(),
            strikes: default_strikes(),
            maturities: vec![0.2, 0.1, 0.05, 0.025],
            rate: 0.0,
            output_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_owned(),
            source: e,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Checks every field and reports all problems at once, each with its path.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, path: &str, msg: &str, value: &dyn std::fmt::Display| {
            if !ok {
                errs.push(format!("{path}: {msg} (got {value})"));
            }
        };
        let m = &self.model;
        check(
            (0.0..1.0).contains(&m.beta),
            "model.beta",
            "must lie in [0, 1)",
            &m.beta,
        );
        check(
            m.rho > -1.0 && m.rho < 1.0,
            "model.rho",
            "must lie in (-1, 1)",
            &m.rho,
        );
        check(
            m.omega > 0.0 && m.omega.is_finite(),
            "model.omega",
            "must be positive",
            &m.omega,
        );
        check(
            m.v0 > 0.0 && m.v0.is_finite(),
            "model.v0",
            "must be positive",
            &m.v0,
        );
        check(
            self.caps.a > m.omega && self.caps.a.is_finite(),
            "caps.a",
            "must exceed model.omega",
            &self.caps.a,
        );
        check(
            self.caps.b > 0.0 && self.caps.b.is_finite(),
            "caps.b",
            "must be positive",
            &self.caps.b,
        );

        let mc = &self.mc;
        check(
            mc.n_paths >= 1,
            "mc.n_paths",
            "must be at least 1",
            &mc.n_paths,
        );
        check(
            mc.n_steps >= 1,
            "mc.n_steps",
            "must be at least 1",
            &mc.n_steps,
        );
        check(
            mc.horizon > 0.0 && mc.horizon.is_finite(),
            "mc.horizon",
            "must be positive",
            &mc.horizon,
        );
        check(
            mc.vix_window >= 0.0 && mc.vix_window.is_finite(),
            "mc.vix_window",
            "must be non-negative",
            &mc.vix_window,
        );
        check(
            mc.inner_steps >= 1,
            "mc.inner_steps",
            "must be at least 1",
            &mc.inner_steps,
        );

        let q = &self.quadrature;
        check(
            q.abs_tol > 0.0,
            "quadrature.abs_tol",
            "must be positive",
            &q.abs_tol,
        );
        check(
            q.rel_tol > 0.0,
            "quadrature.rel_tol",
            "must be positive",
            &q.rel_tol,
        );
        check(
            q.max_subdivisions >= 1,
            "quadrature.max_subdivisions",
            "must be at least 1",
            &q.max_subdivisions,
        );
        check(
            q.large_x > 0.0 && q.large_x.is_finite(),
            "quadrature.large_x",
            "must be positive",
            &q.large_x,
        );

        check(!self.strikes.is_empty(), "strikes", "must not be empty", &0);
        for (i, k) in self.strikes.iter().enumerate() {
            check(
                *k > 0.0 && k.is_finite(),
                &format!("strikes[{i}]"),
                "must be positive",
                k,
            );
        }
        for (i, t) in self.maturities.iter().enumerate() {
            check(
                *t > 0.0 && t.is_finite(),
                &format!("maturities[{i}]"),
                "must be positive",
                t,
            );
        }
        check(self.rate.is_finite(), "rate", "must be finite", &self.rate);

        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errs))
        }
    }

    pub fn capped_model(&self) -> Result<CappedModel, CliError> {
        self.capped_model_with_rho(self.model.rho)
    }

    pub fn capped_model_with_rho(&self, rho: f64) -> Result<CappedModel, CliError> {
        let params = SabrParams {
            rho,
            ..self.model.params()
        };
        Ok(CappedModel::new(params, self.caps.a, self.caps.b)?)
    }
}

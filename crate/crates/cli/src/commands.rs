use sabr_vix_core::asymptotics::{
    asymptotic_smile, implied_vol_limit, SmileCurvePoint, ATM_THRESHOLD,
};
use sabr_vix_core::mc::{estimate_forward, simulate_capped_paths};
use sabr_vix_core::pricing::{
    rate_convergence_study, smile_from_paths, ConvergenceRow, SmilePoint,
};
use sabr_vix_core::scale::{MartingaleDiagnostic, ScaleAnalysis, ScaleReport};
use sabr_vix_core::{CappedModel, McEstimate};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// Correlations of the reference forward table.
pub const REFERENCE_CORRELATIONS: [f64; 3] = [-0.7, 0.0, 0.7];

#[derive(Debug, Clone, Serialize)]
pub struct Diagnosis {
    pub report: ScaleReport,
    pub martingale: MartingaleDiagnostic,
}

pub fn diagnose(cfg: &RunConfig) -> Result<Diagnosis, CliError> {
    let params = cfg.model.params();
    if !params.assumption1_holds() {
        return Err(CliError::Precondition(format!(
            "the explosion analysis needs negative correlation; got rho = {}",
            params.rho
        )));
    }
    let sa = ScaleAnalysis::new(params, cfg.quadrature);
    Ok(Diagnosis {
        report: sa.explosion_verdict()?,
        martingale: sa.martingale_diagnostic()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardRow {
    pub rho: f64,
    pub v_hat: f64,
    pub maturity: f64,
    pub forward: McEstimate,
}

/// `v_hat` and the Monte Carlo forward at `mc.horizon` for each reference correlation.
pub fn forward_table(cfg: &RunConfig) -> Result<Vec<ForwardRow>, CliError> {
    REFERENCE_CORRELATIONS
        .iter()
        .map(|&rho| {
            let model = cfg.capped_model_with_rho(rho)?;
            let paths = simulate_capped_paths(&model, &cfg.mc)?;
            Ok(ForwardRow {
                rho,
                v_hat: model.caps.v_hat,
                maturity: cfg.mc.horizon,
                forward: estimate_forward(&paths)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SmileRun {
    pub maturity: f64,
    pub forward: McEstimate,
    pub points: Vec<SmileRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmileRow {
    #[serde(flatten)]
    pub point: SmilePoint,
    pub asymptotic_iv: f64,
}

pub fn smile(cfg: &RunConfig, maturity: f64) -> Result<(SmileRun, CappedModel), CliError> {
    if !(maturity > 0.0 && maturity.is_finite()) {
        return Err(CliError::Config(vec![format!(
            "maturity: must be positive (got {maturity})"
        )]));
    }
    let model = cfg.capped_model()?;
    let paths = simulate_capped_paths(&model, &cfg.mc.with_horizon(maturity))?;
    let forward = estimate_forward(&paths)?;
    let points = smile_from_paths(&paths, &cfg.strikes, maturity, cfg.rate, forward.value)?
        .into_iter()
        .map(|point| {
            let asymptotic_iv = implied_vol_limit(point.strike, &model)?;
            Ok(SmileRow {
                point,
                asymptotic_iv,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok((
        SmileRun {
            maturity,
            forward,
            points,
        },
        model,
    ))
}

pub fn converge(cfg: &RunConfig, strike: f64) -> Result<Vec<ConvergenceRow>, CliError> {
    let model = cfg.capped_model()?;
    let v0 = model.params.v0;
    if !(strike > 0.0) || (strike / v0).ln().abs() < ATM_THRESHOLD {
        return Err(CliError::Precondition(format!(
            "strike must be positive and away from v0 = {v0}; got {strike}"
        )));
    }
    if cfg.maturities.len() < 2 || cfg.maturities.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CliError::Precondition(format!(
            "maturities must hold at least two strictly decreasing values; got {:?}",
            cfg.maturities
        )));
    }
    Ok(rate_convergence_study(
        strike,
        &model,
        &cfg.maturities,
        &cfg.mc,
    )?)
}

pub fn asymptotic(cfg: &RunConfig) -> Result<Vec<SmileCurvePoint>, CliError> {
    let model = cfg.capped_model()?;
    Ok(asymptotic_smile(&cfg.strikes, &model)?)
}

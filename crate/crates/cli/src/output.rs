use std::io::Write;
use std::path::{Path, PathBuf};

use sabr_vix_core::asymptotics::{write_smile_curve_csv, SmileCurvePoint};
use sabr_vix_core::pricing::ConvergenceRow;
use serde::Serialize;
use serde_json::json;

use crate::commands::{Diagnosis, ForwardRow, SmileRun};
use crate::config::OutputFormat;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(contents).map_err(io_err(&target))?;
    tmp.as_file().sync_all().map_err(io_err(&target))?;
    tmp.persist(&target).map_err(|e| CliError::Io {
        path: target.clone(),
        source: e.error,
    })?;
    Ok(target)
}

fn json_doc<T: Serialize>(command: &str, body: T) -> Vec<u8> {
    let mut value = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Some(obj), serde_json::Value::Object(extra)) = (
        value.as_object_mut(),
        serde_json::to_value(body).expect("output serialises"),
    ) {
        obj.extend(extra);
    }
    let mut out = serde_json::to_vec_pretty(&value).expect("output serialises");
    out.push(b'\n');
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_diagnosis(d: &Diagnosis, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => json_doc("diagnose", d),
        OutputFormat::Csv => {
            let r = &d.report;
            let mut s = String::from("quantity,value\n");
            let rows: [(&str, String); 11] = [
                ("p_infinity", r.p_infinity.to_string()),
                ("c1", r.c1_fit.to_string()),
                ("tail_exponent", r.tail_exponent.to_string()),
                ("kappa", r.kappa.to_string()),
                ("nu_at_large_x", r.nu_at_large_x.to_string()),
                ("nu_stabilized", r.nu_stabilized.to_string()),
                ("nu_zero_divergent", r.nu_zero_divergent.to_string()),
                ("explosion", r.explosion_flag.to_string()),
                (
                    "boundary_class",
                    format!("{:?}", r.boundary_class).to_lowercase(),
                ),
                (
                    "lower_boundary_class",
                    format!("{:?}", r.lower_boundary_class).to_lowercase(),
                ),
                ("true_martingale", d.martingale.true_martingale.to_string()),
            ];
            for (k, v) in rows {
                s.push_str(&format!("{k},{v}\n"));
            }
            s.into_bytes()
        }
    }
}

pub fn render_forward_table(rows: &[ForwardRow], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => json_doc("table1", json!({ "rows": rows })),
        OutputFormat::Csv => {
            let mut s = String::from("rho,v_hat,maturity,forward,forward_se,n_paths\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.rho,
                    r.v_hat,
                    r.maturity,
                    r.forward.value,
                    r.forward.std_error,
                    r.forward.n_effective
                ));
            }
            s.into_bytes()
        }
    }
}

pub fn render_smile(run: &SmileRun, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => json_doc("smile", run),
        OutputFormat::Csv => {
            let mut s = String::from(
                "strike,log_strike,price,price_se,implied_vol,iv_lo,iv_hi,asymptotic_iv,status\n",
            );
            for row in &run.points {
                let p = &row.point;
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    p.strike,
                    p.log_strike,
                    p.price.value,
                    p.price.std_error,
                    opt(p.implied_vol),
                    opt(p.implied_vol_band.map(|b| b.0)),
                    opt(p.implied_vol_band.map(|b| b.1)),
                    row.asymptotic_iv,
                    p.status.as_str()
                ));
            }
            s.into_bytes()
        }
    }
}

pub fn render_convergence(rows: &[ConvergenceRow], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => json_doc("converge", json!({ "rows": rows })),
        OutputFormat::Csv => {
            let mut s = String::from(
                "maturity,strike,price,price_se,neg_t_log_price,J_V,gap,statistically_zero\n",
            );
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.maturity,
                    r.strike,
                    r.price.value,
                    r.price.std_error,
                    r.neg_t_log_price,
                    r.jv,
                    r.gap,
                    r.statistically_zero
                ));
            }
            s.into_bytes()
        }
    }
}

pub fn render_asymptotic(points: &[SmileCurvePoint], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => json_doc("asymptotic", json!({ "points": points })),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_smile_curve_csv(&mut buf, points).expect("writing to memory");
            buf
        }
    }
}

//! CSV and JSON emission. Floats are written with Rust's shortest
//! round-trip formatting, so identical runs produce identical bytes.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use declab::environment::log_log_slope;

use crate::config::ExperimentConfig;
use crate::experiment::PointResult;

/// Resolve the output directory: --out flag, then DECLAB_OUT, then the
/// config's output.dir, then "declab-out".
pub fn resolve_out_dir(flag: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("DECLAB_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    if let Some(dir) = &config.output.dir {
        return PathBuf::from(dir);
    }
    PathBuf::from("declab-out")
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.canonical().as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Reproducibility record for a whole run.
#[derive(Debug, Serialize)]
pub struct RunRecord<'a> {
    pub config_hash: String,
    pub code_version: &'static str,
    pub seed: u64,
    pub status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_clock_ms: u128,
    pub points: &'a [PointResult],
}

pub const RUN_CSV_HEADER: &str = "point,linear_size,volume,contact_size,xi_e,lambda,g00,gamma_afv,gamma_ppv,gamma_ratio,delta_gamma,fluct_afv,fluct_ppv,fluct_ppv_symmetric,s1_afv_final,s1_ppv_final,region_volume_ppv,certificates_passed";

pub fn run_csv(points: &[PointResult]) -> String {
    let mut out = String::from(RUN_CSV_HEADER);
    out.push('\n');
    for p in points {
        let region = p
            .region_volume_ppv
            .map(|v| v.to_string())
            .unwrap_or_default();
        let ratio = p.gamma_ratio.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.point,
            p.linear_size,
            p.volume,
            p.contact_size,
            p.xi_e,
            p.lambda,
            p.g00,
            p.gamma_afv,
            p.gamma_ppv,
            ratio,
            p.delta_gamma,
            p.fluct_afv,
            p.fluct_ppv,
            p.fluct_ppv_symmetric,
            p.s1_afv_final,
            p.s1_ppv_final,
            region,
            p.certificates_passed,
        ));
    }
    out
}

pub const SWEEP_CSV_HEADER: &str =
    "linear_size,volume,contact_size,xi_e,g00,gamma_afv,gamma_ppv,ratio,delta_gamma";

pub fn sweep_csv(points: &[PointResult]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.linear_size,
            p.volume,
            p.contact_size,
            p.xi_e,
            p.g00,
            p.gamma_afv,
            p.gamma_ppv,
            p.gamma_ratio.map(|v| v.to_string()).unwrap_or_default(),
            p.delta_gamma,
        ));
    }
    out
}

/// Log-log fit exponents over the sweep, when at least 3 distinct abscissas
/// exist; otherwise the summary records the refusal.
#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub n_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g00_vs_contact_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_afv_vs_contact_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_ratio_vs_volume_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn fit_over(points: &[PointResult], x: impl Fn(&PointResult) -> f64, y: impl Fn(&PointResult) -> f64) -> Option<f64> {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for p in points {
        let xv = x(p);
        let yv = y(p);
        if xv > 0.0 && yv > 0.0 && yv.is_finite() && !xs.contains(&xv) {
            xs.push(xv);
            ys.push(yv);
        }
    }
    if xs.len() < 3 {
        return None;
    }
    log_log_slope(&xs, &ys).ok()
}

pub fn sweep_summary(points: &[PointResult]) -> SweepSummary {
    let g00_vs_contact = fit_over(points, |p| p.contact_size as f64, |p| p.g00);
    let gamma_vs_contact = fit_over(points, |p| p.contact_size as f64, |p| p.gamma_afv);
    let ratio_vs_volume = fit_over(points, |p| p.volume as f64, |p| p.gamma_ratio.unwrap_or(f64::NAN));
    let refused = g00_vs_contact.is_none() && gamma_vs_contact.is_none() && ratio_vs_volume.is_none();
    SweepSummary {
        n_points: points.len(),
        g00_vs_contact_exponent: g00_vs_contact,
        gamma_afv_vs_contact_exponent: gamma_vs_contact,
        gamma_ratio_vs_volume_exponent: ratio_vs_volume,
        note: refused
            .then(|| "fewer than 3 distinct abscissas per axis; fits refused".to_string()),
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// All certificate records across points as one JSON document.
pub fn certificates_json(points: &[PointResult]) -> Result<String> {
    let mut all = Vec::new();
    for p in points {
        for o in &p.outcomes {
            all.push(serde_json::json!({
                "point": p.point,
                "name": o.name,
                "kind": o.kind,
                "pass": o.pass,
                "record": o.record,
            }));
        }
    }
    Ok(serde_json::to_string_pretty(&all)?)
}

//! Result serialization. Both formats carry an explicit schema
//! version; numeric fields use Rust's shortest round-trip `Display`
//! form, and exact-mode codebooks appear as the string `inf`.

use std::io::Write;
use std::path::Path;

use linksim_core::sim::{AsymptoticPoint, SimConfig, SummaryRow, ThroughputSummary};
use serde_json::json;

use crate::CliError;

const CSV_SCHEMA_COMMENT: &str = "# schema=1";
const SCHEMA_VERSION: u32 = 1;
const SUMMARY_HEADER: &str = "scheme,sweep_param,sweep_value,snr_db,K,B,G,Q,trials,\
                              seed,mean_tput_bps_hz,std_tput,ci95_halfwidth";
const ASYMPTOTIC_HEADER: &str = "rho,samples,median_abs_err,p90_abs_err,mean_abs_err";

fn bits_field(cfg: &SimConfig) -> String {
    cfg.codebook_bits
        .map_or_else(|| "inf".to_string(), |b| b.to_string())
}

fn summary_csv_row(row: &SummaryRow) -> String {
    let cfg = &row.config;
    [
        row.scheme.label().to_string(),
        row.sweep_param.clone(),
        row.sweep_value.to_string(),
        cfg.snr_db.to_string(),
        cfg.num_mts.to_string(),
        bits_field(cfg),
        cfg.num_clusters.to_string(),
        cfg.num_subcarriers.to_string(),
        cfg.trials.to_string(),
        cfg.seed.to_string(),
        row.mean_tput_bps_hz.to_string(),
        row.std_tput.to_string(),
        row.ci95_halfwidth.to_string(),
    ]
    .join(",")
}

pub fn summary_csv(summary: &ThroughputSummary) -> String {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA_COMMENT);
    out.push('\n');
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for row in &summary.rows {
        out.push_str(&summary_csv_row(row));
        out.push('\n');
    }
    out
}

/// JSON cannot represent an infinite number, so the exact-mode sweep
/// value degrades to the string `"inf"` just like the `B` field.
fn json_number(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn summary_json(summary: &ThroughputSummary) -> String {
    let rows: Vec<serde_json::Value> = summary
        .rows
        .iter()
        .map(|row| {
            let cfg = &row.config;
            json!({
                "scheme": row.scheme.label(),
                "sweep_param": row.sweep_param,
                "sweep_value": json_number(row.sweep_value),
                "snr_db": cfg.snr_db,
                "K": cfg.num_mts,
                "B": cfg.codebook_bits.map_or(json!("inf"), |b| json!(b)),
                "G": cfg.num_clusters,
                "Q": cfg.num_subcarriers,
                "trials": cfg.trials,
                "seed": cfg.seed,
                "mean_tput_bps_hz": row.mean_tput_bps_hz,
                "std_tput": row.std_tput,
                "ci95_halfwidth": row.ci95_halfwidth,
            })
        })
        .collect();
    let doc = json!({ "schema_version": SCHEMA_VERSION, "rows": rows });
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    text
}

pub fn asymptotic_csv(points: &[AsymptoticPoint]) -> String {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA_COMMENT);
    out.push('\n');
    out.push_str(ASYMPTOTIC_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.rho, p.samples, p.median_abs_err, p.p90_abs_err, p.mean_abs_err
        ));
    }
    out
}

pub fn asymptotic_json(points: &[AsymptoticPoint]) -> String {
    let rows: Vec<serde_json::Value> = points
        .iter()
        .map(|p| {
            json!({
                "rho": p.rho,
                "samples": p.samples,
                "median_abs_err": p.median_abs_err,
                "p90_abs_err": p.p90_abs_err,
                "mean_abs_err": p.mean_abs_err,
            })
        })
        .collect();
    let doc = json!({ "schema_version": SCHEMA_VERSION, "points": rows });
    let mut text = serde_json::to_string_pretty(&doc).expect("points serialize");
    text.push('\n');
    text
}

/// Prints to stdout, or writes the file atomically: the content lands
/// in a sibling temp file that is renamed into place, so readers never
/// observe a half-written result.
pub fn deliver(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
        Some(path) => atomic_write(path, text),
    }
}

fn atomic_write(path: &Path, text: &str) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{} has no file name", path.display())))?;
    let mut tmp = path.to_path_buf();
    tmp.set_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot finalize {}: {e}", path.display())))
}

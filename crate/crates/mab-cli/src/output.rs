//! Deterministic CSV and manifest emission.
//!
//! Data files carry 9-significant-digit numbers with LF line endings and
//! are byte-identical across reruns of the same seeded invocation.
//! Curves are downsampled onto a logarithmic time grid (every round up
//! to 100, then ~200 log-spaced points); the final round is always
//! emitted at full resolution.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use mab_core::{AggregateCurve, ExperimentConfig, SweepTable};

use crate::CliError;

/// The (1-based) rounds a curve is emitted at.
pub fn output_rounds(horizon: usize) -> Vec<usize> {
    let mut rounds: Vec<usize> = (1..=horizon.min(100)).collect();
    if horizon > 100 {
        let lo = 100f64.ln();
        let hi = (horizon as f64).ln();
        for k in 0..=200 {
            let x = (lo + (hi - lo) * k as f64 / 200.0).exp();
            rounds.push((x.round() as usize).clamp(100, horizon));
        }
        rounds.sort_unstable();
        rounds.dedup();
    }
    rounds
}

/// Format with exactly 9 significant digits.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Render one curve as CSV.
pub fn curve_to_csv(curve: &AggregateCurve) -> String {
    let mut out = String::from("t,avg_reward,avg_reward_se,avg_regret,avg_regret_se\n");
    for t in output_rounds(curve.horizon()) {
        let i = t - 1;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            t,
            sig9(curve.avg_reward[i]),
            sig9(curve.avg_reward_se[i]),
            sig9(curve.avg_regret[i]),
            sig9(curve.avg_regret_se[i]),
        ));
    }
    out
}

/// Render a sweep table as CSV; `is_best` marks the argmax-reward row.
pub fn sweep_to_csv(table: &SweepTable) -> String {
    let mut out = String::from(
        "alpha,final_avg_reward,final_avg_reward_se,final_avg_regret,final_avg_regret_se,is_best\n",
    );
    for (i, row) in table.rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.alpha,
            sig9(row.final_avg_reward),
            sig9(row.final_avg_reward_se),
            sig9(row.final_avg_regret),
            sig9(row.final_avg_regret_se),
            u8::from(i == table.best_index),
        ));
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write one `<label>.csv` per curve plus `manifest.json` into `out_dir`.
/// Returns the paths written.
pub fn emit_csv(
    curves: &[AggregateCurve],
    out_dir: &Path,
    config: &ExperimentConfig,
    summary: serde_json::Value,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for curve in curves {
        let path = out_dir.join(format!("{}.csv", curve.label));
        write_file(&path, &curve_to_csv(curve))?;
        written.push(path);
    }
    let manifest_path = out_dir.join("manifest.json");
    write_file(&manifest_path, &manifest_json(config, summary))?;
    written.push(manifest_path);
    Ok(written)
}

/// Write the sweep table CSV into `out_dir`.
pub fn emit_sweep_csv(table: &SweepTable, out_dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let path = out_dir.join("sweep.csv");
    write_file(&path, &sweep_to_csv(table))?;
    Ok(path)
}

/// The manifest: resolved config, master seed, artifact version, and
/// wall-clock metadata, plus a per-subcommand summary.
fn manifest_json(config: &ExperimentConfig, summary: serde_json::Value) -> String {
    let created_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let manifest = serde_json::json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "created_unix_ms": created_unix_ms,
        "master_seed": config.master_seed,
        "config": config,
        "summary": summary,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    text
}

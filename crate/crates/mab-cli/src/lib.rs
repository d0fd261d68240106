//! Command-line front end for the bandit simulator: config ingestion,
//! the canned simulations, and deterministic CSV emission.
//!
//! All human-facing text goes to standard error; standard output carries
//! data only when `--stdout` pipes a single curve. Data files land in
//! the output directory next to a `manifest.json` that embeds the fully
//! resolved configuration.

pub mod output;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use mab_core::{
    alpha_sweep_curves, monte_carlo_detailed, replicate_sim1, replicate_sim2,
    two_agent_monte_carlo, AggregateCurve, ExperimentConfig, HarnessError, SweepTable,
};
use output::{curve_to_csv, emit_csv, emit_sweep_csv};

/// CLI failure modes, split by exit code: validation problems exit 1,
/// I/O problems exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Validation(_) => 1,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Command-line overrides of config values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub horizon: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(runs) = self.runs {
            config.n_runs = runs;
        }
        if let Some(horizon) = self.horizon {
            config.horizon = horizon;
        }
    }
}

/// Parse and validate a JSON experiment config. Read failures are I/O
/// errors; parse errors carry line/column positions; validation errors
/// name the offending key.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    config
        .validate()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(config)
}

fn pipe_single_curve(curves: &[AggregateCurve]) -> Result<(), CliError> {
    if curves.len() != 1 {
        return Err(CliError::Validation(format!(
            "--stdout carries exactly one curve, but this invocation produced {}",
            curves.len()
        )));
    }
    print!("{}", curve_to_csv(&curves[0]));
    Ok(())
}

fn finals_summary(curves: &[AggregateCurve]) -> serde_json::Value {
    serde_json::Value::Array(
        curves
            .iter()
            .map(|c| {
                serde_json::json!({
                    "label": c.label,
                    "final_avg_reward": c.final_avg_reward(),
                    "final_avg_regret": c.final_avg_regret(),
                })
            })
            .collect(),
    )
}

fn eprint_finals(curves: &[AggregateCurve]) {
    for curve in curves {
        eprintln!(
            "  {}: final avg reward {:.6}, final avg regret {:.6}",
            curve.label,
            curve.final_avg_reward(),
            curve.final_avg_regret()
        );
    }
}

fn eprint_sweep(table: &SweepTable) {
    eprintln!("  alpha sweep ({} points):", table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        let marker = if i == table.best_index { "  <- best" } else { "" };
        eprintln!(
            "    alpha {:<7} final avg reward {:.6}{}",
            row.alpha, row.final_avg_reward, marker
        );
    }
}

/// `run`: Monte Carlo over the config's policies.
pub fn cmd_run(config: &ExperimentConfig, out_dir: &Path, to_stdout: bool) -> Result<(), CliError> {
    let report = monte_carlo_detailed(config)?;
    eprintln!(
        "run: {} policies x {} runs x horizon {}",
        config.policies.len(),
        config.n_runs,
        config.horizon
    );
    eprint_finals(&report.curves);
    if to_stdout {
        return pipe_single_curve(&report.curves);
    }
    let mut summary = serde_json::json!({ "finals": finals_summary(&report.curves) });
    if let Some(stats) = &report.realized_regret {
        summary["mean_realized_regret"] = serde_json::Value::Array(
            stats
                .iter()
                .map(|s| serde_json::json!({ "label": s.label, "mean": s.mean, "se": s.se }))
                .collect(),
        );
        for stat in stats {
            eprintln!(
                "  {}: mean realized regret {:.6} (se {:.6})",
                stat.label, stat.mean, stat.se
            );
        }
    }
    let written = emit_csv(&report.curves, out_dir, config, summary)?;
    eprintln!("wrote {} files to {}", written.len(), out_dir.display());
    Ok(())
}

/// `sweep`: tabulate final performance over the config's alpha grid.
pub fn cmd_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    let (_, table) = alpha_sweep_curves(config)?;
    eprint_sweep(&table);
    emit_sweep_csv(&table, out_dir)?;
    let summary = serde_json::json!({ "best_alpha": table.best_alpha() });
    emit_csv(&[], out_dir, config, summary)?;
    eprintln!("wrote sweep.csv and manifest.json to {}", out_dir.display());
    Ok(())
}

/// `sim1`: the four-candidate heterogeneous simulation with alpha sweep
/// and the naive benchmark row.
pub fn cmd_sim1(
    master_seed: u64,
    n_runs: usize,
    horizon: usize,
    out_dir: &Path,
) -> Result<(), CliError> {
    let artifacts = replicate_sim1(master_seed, n_runs, horizon)?;
    eprintln!("sim1: {} runs x horizon {}", n_runs, horizon);
    eprint_sweep(&artifacts.sweep);
    emit_sweep_csv(&artifacts.sweep, out_dir)?;
    let summary = serde_json::json!({
        "best_alpha": artifacts.sweep.best_alpha(),
        "finals": finals_summary(&artifacts.curves),
    });
    let written = emit_csv(&artifacts.curves, out_dir, &artifacts.config, summary)?;
    eprintln!("wrote {} files to {}", written.len() + 1, out_dir.display());
    Ok(())
}

/// `sim2`: the four-Bernoulli tuned-UCB vs Thompson comparison.
pub fn cmd_sim2(
    master_seed: u64,
    n_runs: usize,
    horizon: usize,
    out_dir: &Path,
) -> Result<(), CliError> {
    let artifacts = replicate_sim2(master_seed, n_runs, horizon)?;
    eprintln!("sim2: {} runs x horizon {}", n_runs, horizon);
    eprint_sweep(&artifacts.sweep);
    eprintln!("  tuned alpha: {}", artifacts.best_alpha);
    eprint_finals(&artifacts.curves);
    emit_sweep_csv(&artifacts.sweep, out_dir)?;
    let summary = serde_json::json!({
        "best_alpha": artifacts.best_alpha,
        "finals": finals_summary(&artifacts.curves),
    });
    let written = emit_csv(&artifacts.curves, out_dir, &artifacts.config, summary)?;
    eprintln!("wrote {} files to {}", written.len() + 1, out_dir.display());
    Ok(())
}

/// `two-agent`: the first two config policies share the config's
/// channels under the zero-reward collision rule.
pub fn cmd_two_agent(config: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    let report = two_agent_monte_carlo(config)?;
    eprintln!(
        "two-agent: {} episodes x horizon {}",
        config.n_runs, config.horizon
    );
    eprint_finals(&report.curves);
    eprintln!("  collision frequency: {:.6}", report.collision_frequency);
    let summary = serde_json::json!({
        "collision_frequency": report.collision_frequency,
        "finals": finals_summary(&report.curves),
    });
    let written = emit_csv(&report.curves, out_dir, config, summary)?;
    eprintln!("wrote {} files to {}", written.len(), out_dir.display());
    Ok(())
}

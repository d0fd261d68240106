//! Monte Carlo averaging, alpha sweeps, and the two canned spectrum
//! simulations.
//!
//! Runs are embarrassingly parallel and reproducible: run `r` always
//! draws from stream index `r` of the master seed, and aggregation folds
//! fixed-size chunks in index order, so results are bitwise identical
//! whether runs execute serially or across threads. Sharing stream
//! indices across policies and sweep points gives common random numbers:
//! two configurations with identical policies produce identical rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{
    collision_count, realized_regret, run_episode, run_episode_full_table, run_two_agent_episode,
    BanditInstance, CollisionEnvironment, RunResult,
};
use crate::policy::PolicySpec;
use crate::reward::RewardDistribution;
use crate::rng::RandomStream;

/// Which rewards are drawn each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Draw only the chosen arm's reward (pseudo-regret accounting).
    #[default]
    PulledOnly,
    /// Draw every arm's reward each round, enabling realized regret.
    FullTable,
}

/// The arm set of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub arms: Vec<RewardDistribution>,
}

/// An exploration-parameter grid: `start, start + step, ...` up to and
/// including `stop`, plus explicit extra points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    #[serde(default)]
    pub extra: Vec<f64>,
}

impl AlphaSweep {
    /// The sorted, deduplicated grid. Points are snapped to 9 decimal
    /// places so accumulated step error does not leak into labels.
    pub fn grid(&self) -> Vec<f64> {
        fn snap(x: f64) -> f64 {
            (x * 1e9).round() / 1e9
        }
        let mut points = Vec::new();
        let mut k = 0u32;
        loop {
            let x = snap(self.start + f64::from(k) * self.step);
            if x > self.stop + 1e-12 {
                break;
            }
            points.push(x);
            k += 1;
        }
        points.extend(self.extra.iter().copied().map(snap));
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

/// A fully-resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub policies: Vec<PolicySpec>,
    pub horizon: usize,
    pub n_runs: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub mode: SampleMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<AlphaSweep>,
}

impl ExperimentConfig {
    /// Check every nested invariant, naming the offending key.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.instance.arms.is_empty() {
            return bad("instance.arms: must contain at least one arm".into());
        }
        for (i, arm) in self.instance.arms.iter().enumerate() {
            if let Err(e) = arm.validate() {
                return bad(format!("instance.arms[{i}]: {e}"));
            }
        }
        for (i, policy) in self.policies.iter().enumerate() {
            match policy {
                PolicySpec::Ucb { alpha } if !(0.0..=1.0).contains(alpha) => {
                    return bad(format!("policies[{i}].alpha: must lie in [0,1], got {alpha}"));
                }
                PolicySpec::Fixed { arm } if *arm >= self.instance.arms.len() => {
                    return bad(format!(
                        "policies[{i}].arm: {arm} out of range for {} arms",
                        self.instance.arms.len()
                    ));
                }
                _ => {}
            }
        }
        if self.horizon < 1 {
            return bad("horizon: must be at least 1".into());
        }
        if self.n_runs < 1 {
            return bad("n_runs: must be at least 1".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.step.is_nan() || sweep.step <= 0.0 {
                return bad(format!("sweep.step: must be > 0, got {}", sweep.step));
            }
            if sweep.start.is_nan() || sweep.stop.is_nan() || sweep.start >= sweep.stop {
                return bad(format!(
                    "sweep: start must be < stop, got {}..{}",
                    sweep.start, sweep.stop
                ));
            }
            for x in sweep.grid() {
                if !(0.0..=1.0).contains(&x) {
                    return bad(format!("sweep: grid point {x} outside [0,1]"));
                }
            }
        }
        Ok(())
    }
}

/// Per-policy Monte Carlo averages over rounds `1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub label: String,
    pub n_runs: usize,
    /// Mean over runs of cumulative reward / t.
    pub avg_reward: Vec<f64>,
    /// Standard error of `avg_reward`.
    pub avg_reward_se: Vec<f64>,
    /// Mean over runs of pseudo-regret / t.
    pub avg_regret: Vec<f64>,
    /// Standard error of `avg_regret`.
    pub avg_regret_se: Vec<f64>,
}

impl AggregateCurve {
    pub fn horizon(&self) -> usize {
        self.avg_reward.len()
    }

    pub fn final_avg_reward(&self) -> f64 {
        *self.avg_reward.last().expect("nonempty curve")
    }

    pub fn final_avg_regret(&self) -> f64 {
        *self.avg_regret.last().expect("nonempty curve")
    }
}

/// Monte Carlo estimate of expected realized regret (full-table mode).
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedRegretStat {
    pub label: String,
    pub mean: f64,
    pub se: f64,
}

/// Everything one [`monte_carlo`] invocation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub curves: Vec<AggregateCurve>,
    /// Present only in full-table mode.
    pub realized_regret: Option<Vec<RealizedRegretStat>>,
}

/// One row of an alpha sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub final_avg_reward: f64,
    pub final_avg_reward_se: f64,
    pub final_avg_regret: f64,
    pub final_avg_regret_se: f64,
}

/// Alpha-sweep results, sorted by alpha, with the argmax-reward row
/// flagged (ties go to the smaller alpha).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub best_index: usize,
}

impl SweepTable {
    pub fn best_row(&self) -> &SweepRow {
        &self.rows[self.best_index]
    }

    pub fn best_alpha(&self) -> f64 {
        self.best_row().alpha
    }
}

/// Harness-level failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("sweep requested but config has no sweep section")]
    MissingSweep,
    #[error("alpha sweep grid is empty")]
    EmptyGrid,
}

/// Run `config.n_runs` independent episodes per policy (run `r` uses
/// stream index `r`) and return per-policy mean curves with standard
/// errors.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<Vec<AggregateCurve>, HarnessError> {
    Ok(monte_carlo_detailed(config)?.curves)
}

/// [`monte_carlo`] plus the realized-regret estimate in full-table mode.
pub fn monte_carlo_detailed(config: &ExperimentConfig) -> Result<MonteCarloReport, HarnessError> {
    config.validate()?;
    let instance = BanditInstance::new(config.instance.arms.clone())
        .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
    let mut curves = Vec::with_capacity(config.policies.len());
    let mut realized = Vec::with_capacity(config.policies.len());
    for policy in &config.policies {
        let (curve, stat) = aggregate_policy(&instance, policy, config);
        curves.push(curve);
        if let Some(stat) = stat {
            realized.push(stat);
        }
    }
    let realized_regret = match config.mode {
        SampleMode::PulledOnly => None,
        SampleMode::FullTable => Some(realized),
    };
    Ok(MonteCarloReport {
        curves,
        realized_regret,
    })
}

/// Sweep UCB's exploration parameter over `config.sweep`'s grid with
/// common random numbers (every alpha reuses stream index = run number)
/// and tabulate final average reward and regret per grid point.
pub fn alpha_sweep(config: &ExperimentConfig) -> Result<SweepTable, HarnessError> {
    Ok(alpha_sweep_curves(config)?.1)
}

/// [`alpha_sweep`] keeping the full per-alpha curves.
pub fn alpha_sweep_curves(
    config: &ExperimentConfig,
) -> Result<(Vec<AggregateCurve>, SweepTable), HarnessError> {
    config.validate()?;
    let sweep = config.sweep.as_ref().ok_or(HarnessError::MissingSweep)?;
    let grid = sweep.grid();
    if grid.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    let swept = ExperimentConfig {
        policies: grid.iter().map(|&alpha| PolicySpec::Ucb { alpha }).collect(),
        ..config.clone()
    };
    let curves = monte_carlo(&swept)?;
    let table = sweep_table_from_curves(&grid, &curves);
    Ok((curves, table))
}

fn sweep_table_from_curves(grid: &[f64], curves: &[AggregateCurve]) -> SweepTable {
    let rows: Vec<SweepRow> = grid
        .iter()
        .zip(curves)
        .map(|(&alpha, curve)| SweepRow {
            alpha,
            final_avg_reward: curve.final_avg_reward(),
            final_avg_reward_se: *curve.avg_reward_se.last().expect("nonempty"),
            final_avg_regret: curve.final_avg_regret(),
            final_avg_regret_se: *curve.avg_regret_se.last().expect("nonempty"),
        })
        .collect();
    let mut best_index = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.final_avg_reward > rows[best_index].final_avg_reward {
            best_index = i;
        }
    }
    SweepTable { rows, best_index }
}

/// Aggregates of a batch of two-agent episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoAgentReport {
    /// One curve per agent, labeled `agent0_*` / `agent1_*`.
    pub curves: Vec<AggregateCurve>,
    /// Fraction of all rounds in which the agents chose the same channel.
    pub collision_frequency: f64,
}

/// Run `config.n_runs` two-agent episodes on the shared channels of
/// `config.instance`, with `config.policies[0]` and `config.policies[1]`
/// as the agents. Episode `r` draws from stream index `r`. Runs execute
/// serially; the batch is a diagnostic, not a bulk experiment.
pub fn two_agent_monte_carlo(config: &ExperimentConfig) -> Result<TwoAgentReport, HarnessError> {
    config.validate()?;
    if config.policies.len() < 2 {
        return Err(HarnessError::InvalidConfig(
            "policies: two-agent runs need at least two policy specs".into(),
        ));
    }
    let channels = BanditInstance::new(config.instance.arms.clone())
        .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
    let env = CollisionEnvironment::new(channels, 2, 0.0)
        .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
    let spec_a = &config.policies[0];
    let spec_b = &config.policies[1];
    let horizon = config.horizon;
    let mut partial_a = Partial::zeros(horizon);
    let mut partial_b = Partial::zeros(horizon);
    let mut collisions = 0usize;
    for run in 0..config.n_runs {
        let mut stream = RandomStream::new(config.master_seed, run as u64);
        let (a, b) = run_two_agent_episode(&env, spec_a, spec_b, horizon, &mut stream);
        collisions += collision_count(&a, &b);
        partial_a.absorb_run(&a, None);
        partial_b.absorb_run(&b, None);
    }
    let curves = vec![
        partial_a.into_curve(format!("agent0_{}", spec_a.label()), config.n_runs),
        partial_b.into_curve(format!("agent1_{}", spec_b.label()), config.n_runs),
    ];
    Ok(TwoAgentReport {
        curves,
        collision_frequency: collisions as f64 / (config.n_runs * horizon) as f64,
    })
}

// --- Simulation recipes ----------------------------------------------------

/// The four heterogeneous spectrum candidates of the first simulation.
pub fn sim1_arms() -> Vec<RewardDistribution> {
    vec![
        RewardDistribution::Bernoulli { p: 0.5 },
        RewardDistribution::Beta { a: 4.0, b: 12.0 },
        RewardDistribution::Exponential { rate: 9.0 },
        RewardDistribution::FiniteDiscrete {
            values: vec![0.25, 0.5, 0.75, 1.0],
            probs: vec![0.3, 0.3, 0.3, 0.1],
        },
    ]
}

/// The four Bernoulli spectrum candidates of the second simulation.
pub fn sim2_arms() -> Vec<RewardDistribution> {
    vec![
        RewardDistribution::Bernoulli { p: 0.20 },
        RewardDistribution::Bernoulli { p: 0.23 },
        RewardDistribution::Bernoulli { p: 0.25 },
        RewardDistribution::Bernoulli { p: 0.21 },
    ]
}

/// Simulation-1 grid: the naive benchmark 0, the reported best point
/// 0.0464, and the 0.14-step ladder 0.14..=0.98.
pub fn sim1_sweep() -> AlphaSweep {
    AlphaSweep {
        start: 0.14,
        stop: 0.98,
        step: 0.14,
        extra: vec![0.0, 0.0464],
    }
}

/// Simulation-2 tuning grid: 0.1 upward in 0.14 steps, plus 0.0464.
pub fn sim2_sweep() -> AlphaSweep {
    AlphaSweep {
        start: 0.1,
        stop: 1.0,
        step: 0.14,
        extra: vec![0.0464],
    }
}

/// Resolved configuration used by [`replicate_sim1`].
pub fn sim1_config(master_seed: u64, n_runs: usize, horizon: usize) -> ExperimentConfig {
    let sweep = sim1_sweep();
    ExperimentConfig {
        instance: InstanceSpec { arms: sim1_arms() },
        policies: sweep
            .grid()
            .into_iter()
            .map(|alpha| PolicySpec::Ucb { alpha })
            .collect(),
        horizon,
        n_runs,
        master_seed,
        mode: SampleMode::PulledOnly,
        sweep: Some(sweep),
    }
}

/// Resolved configuration used by [`replicate_sim2`]: every grid alpha
/// plus Thompson sampling, all under common random numbers.
pub fn sim2_config(master_seed: u64, n_runs: usize, horizon: usize) -> ExperimentConfig {
    let sweep = sim2_sweep();
    let mut policies: Vec<PolicySpec> = sweep
        .grid()
        .into_iter()
        .map(|alpha| PolicySpec::Ucb { alpha })
        .collect();
    policies.push(PolicySpec::Ts);
    ExperimentConfig {
        instance: InstanceSpec { arms: sim2_arms() },
        policies,
        horizon,
        n_runs,
        master_seed,
        mode: SampleMode::PulledOnly,
        sweep: Some(sweep),
    }
}

/// Artifacts of the first simulation: one curve per swept alpha (the
/// alpha = 0 row is the naive benchmark) and the sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct Sim1Artifacts {
    pub config: ExperimentConfig,
    pub curves: Vec<AggregateCurve>,
    pub sweep: SweepTable,
}

/// Artifacts of the second simulation: the tuning sweep, the winning
/// alpha, and the tuned-UCB and Thompson-sampling comparison curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Sim2Artifacts {
    pub config: ExperimentConfig,
    pub sweep: SweepTable,
    pub best_alpha: f64,
    /// Two curves labeled `ucb` (tuned alpha) and `ts`.
    pub curves: Vec<AggregateCurve>,
}

/// Replicate the four-candidate heterogeneous simulation: sweep alpha
/// over [`sim1_sweep`] against the naive benchmark.
pub fn replicate_sim1(
    master_seed: u64,
    n_runs: usize,
    horizon: usize,
) -> Result<Sim1Artifacts, HarnessError> {
    let config = sim1_config(master_seed, n_runs, horizon);
    let curves = monte_carlo(&config)?;
    let sweep = sweep_table_from_curves(&sim1_sweep().grid(), &curves);
    Ok(Sim1Artifacts {
        config,
        curves,
        sweep,
    })
}

/// Replicate the four-Bernoulli simulation: tune alpha on
/// [`sim2_sweep`]'s grid, then compare tuned UCB against Thompson
/// sampling under common random numbers.
pub fn replicate_sim2(
    master_seed: u64,
    n_runs: usize,
    horizon: usize,
) -> Result<Sim2Artifacts, HarnessError> {
    let config = sim2_config(master_seed, n_runs, horizon);
    let grid = sim2_sweep().grid();
    let all_curves = monte_carlo(&config)?;
    let (ucb_curves, ts_curve) = all_curves.split_at(grid.len());
    let sweep = sweep_table_from_curves(&grid, ucb_curves);
    let best_alpha = sweep.best_alpha();
    let mut ucb = ucb_curves[sweep.best_index].clone();
    ucb.label = "ucb".to_string();
    let mut ts = ts_curve[0].clone();
    ts.label = "ts".to_string();
    Ok(Sim2Artifacts {
        config,
        sweep,
        best_alpha,
        curves: vec![ucb, ts],
    })
}

// --- Aggregation internals --------------------------------------------------

/// Fixed chunk size for a given workload. A pure function of
/// `(n_runs, horizon)` so the chunk decomposition (and therefore the
/// floating-point fold order) never depends on thread count.
fn chunk_size(n_runs: usize, horizon: usize) -> usize {
    // Cap live accumulator memory at ~64 MiB (4 f64 arrays per chunk).
    let partial_bytes = 32 * horizon.max(1);
    let max_chunks = ((64usize << 20) / partial_bytes).clamp(1, 512);
    let n_chunks = n_runs.min(max_chunks).max(1);
    n_runs.div_ceil(n_chunks)
}

struct Partial {
    sum_reward: Vec<f64>,
    sumsq_reward: Vec<f64>,
    sum_regret: Vec<f64>,
    sumsq_regret: Vec<f64>,
    realized_sum: f64,
    realized_sumsq: f64,
}

impl Partial {
    fn zeros(horizon: usize) -> Self {
        Self {
            sum_reward: vec![0.0; horizon],
            sumsq_reward: vec![0.0; horizon],
            sum_regret: vec![0.0; horizon],
            sumsq_regret: vec![0.0; horizon],
            realized_sum: 0.0,
            realized_sumsq: 0.0,
        }
    }

    fn absorb_run(&mut self, result: &RunResult, realized: Option<f64>) {
        let mut cumulative = 0.0;
        for (i, step) in result.steps.iter().enumerate() {
            let t = (i + 1) as f64;
            cumulative += step.reward;
            let reward = cumulative / t;
            let regret = result.pseudo_regret_curve[i] / t;
            self.sum_reward[i] += reward;
            self.sumsq_reward[i] += reward * reward;
            self.sum_regret[i] += regret;
            self.sumsq_regret[i] += regret * regret;
        }
        if let Some(r) = realized {
            self.realized_sum += r;
            self.realized_sumsq += r * r;
        }
    }

    fn merge(&mut self, other: &Partial) {
        for (a, b) in self.sum_reward.iter_mut().zip(&other.sum_reward) {
            *a += b;
        }
        for (a, b) in self.sumsq_reward.iter_mut().zip(&other.sumsq_reward) {
            *a += b;
        }
        for (a, b) in self.sum_regret.iter_mut().zip(&other.sum_regret) {
            *a += b;
        }
        for (a, b) in self.sumsq_regret.iter_mut().zip(&other.sumsq_regret) {
            *a += b;
        }
        self.realized_sum += other.realized_sum;
        self.realized_sumsq += other.realized_sumsq;
    }

    fn into_curve(self, label: String, n_runs: usize) -> AggregateCurve {
        let horizon = self.sum_reward.len();
        let n_f = n_runs as f64;
        let mut curve = AggregateCurve {
            label,
            n_runs,
            avg_reward: Vec::with_capacity(horizon),
            avg_reward_se: Vec::with_capacity(horizon),
            avg_regret: Vec::with_capacity(horizon),
            avg_regret_se: Vec::with_capacity(horizon),
        };
        for i in 0..horizon {
            curve.avg_reward.push(self.sum_reward[i] / n_f);
            curve
                .avg_reward_se
                .push(standard_error(self.sum_reward[i], self.sumsq_reward[i], n_runs));
            curve.avg_regret.push(self.sum_regret[i] / n_f);
            curve
                .avg_regret_se
                .push(standard_error(self.sum_regret[i], self.sumsq_regret[i], n_runs));
        }
        curve
    }
}

/// Sample standard error of the mean from a sum and sum of squares.
fn standard_error(sum: f64, sumsq: f64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let n_f = n as f64;
    let var = ((sumsq - sum * sum / n_f) / (n_f - 1.0)).max(0.0);
    (var / n_f).sqrt()
}

fn aggregate_policy(
    instance: &BanditInstance,
    policy: &PolicySpec,
    config: &ExperimentConfig,
) -> (AggregateCurve, Option<RealizedRegretStat>) {
    let horizon = config.horizon;
    let n_runs = config.n_runs;
    let size = chunk_size(n_runs, horizon);
    let n_chunks = n_runs.div_ceil(size);

    let partials: Vec<Partial> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * size;
            let hi = (lo + size).min(n_runs);
            let mut partial = Partial::zeros(horizon);
            for run in lo..hi {
                let mut stream = RandomStream::new(config.master_seed, run as u64);
                match config.mode {
                    SampleMode::PulledOnly => {
                        let result = run_episode(instance, policy, horizon, &mut stream);
                        partial.absorb_run(&result, None);
                    }
                    SampleMode::FullTable => {
                        let (result, table) =
                            run_episode_full_table(instance, policy, horizon, &mut stream);
                        let regret = realized_regret(&result.steps, &table)
                            .expect("episode output is self-consistent");
                        partial.absorb_run(&result, Some(regret));
                    }
                }
            }
            partial
        })
        .collect();

    let mut total = Partial::zeros(horizon);
    for partial in &partials {
        total.merge(partial);
    }

    let stat = match config.mode {
        SampleMode::PulledOnly => None,
        SampleMode::FullTable => Some(RealizedRegretStat {
            label: policy.label(),
            mean: total.realized_sum / n_runs as f64,
            se: standard_error(total.realized_sum, total.realized_sumsq, n_runs),
        }),
    };
    (total.into_curve(policy.label(), n_runs), stat)
}

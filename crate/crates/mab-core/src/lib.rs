//! Stochastic multi-armed bandit engine and spectrum-access simulator.
//!
//! A channel candidate is an arm with an unknown reward law; each round a
//! policy picks one arm, receives a bounded reward, and learns from it.
//! The crate provides:
//!
//! - [`reward`]: the candidate reward laws, their analytic means, and
//!   deterministic seeded sampling clamped to `[0, 1]`.
//! - [`policy`]: upper-confidence-bound selection with exploration
//!   parameter `alpha` (the `alpha = 0` case is the naive
//!   highest-sample-mean benchmark) and Thompson sampling with a
//!   `Beta(1,1)` prior.
//! - [`game`]: the stochastic-game types, the episode loop, and
//!   pseudo/realized regret accounting, plus a minimal two-agent
//!   collision environment for shared channels.
//! - [`harness`]: seeded Monte Carlo averaging, alpha sweeps with common
//!   random numbers, and the two canned simulations.
//! - [`rng`]: stream-indexed ChaCha8 randomness; run `r` of an experiment
//!   always draws from stream `r`, making every result reproducible and
//!   independent of execution order.

pub mod game;
pub mod harness;
pub mod policy;
pub mod reward;
pub mod rng;

pub use game::{
    collision_count, discounted_return, pseudo_regret, realized_regret, run_episode,
    run_episode_full_table, run_two_agent_episode, BanditInstance, CollisionEnvironment,
    GameError, RewardTable, RunResult, StepRecord, StochasticGameSpec, TransitionKernel,
};
pub use harness::{
    alpha_sweep, alpha_sweep_curves, monte_carlo, monte_carlo_detailed, replicate_sim1,
    replicate_sim2, sim1_arms, sim1_config, sim1_sweep, sim2_arms, sim2_config, sim2_sweep,
    two_agent_monte_carlo, AggregateCurve, AlphaSweep, ExperimentConfig, HarnessError,
    InstanceSpec, MonteCarloReport, RealizedRegretStat, SampleMode, Sim1Artifacts, Sim2Artifacts,
    SweepRow, SweepTable, TwoAgentReport,
};
pub use policy::{ArmIndex, PolicySpec, PolicyState, TsState, UcbState};
pub use reward::{sample_beta, DistributionError, RewardDistribution};
pub use rng::RandomStream;

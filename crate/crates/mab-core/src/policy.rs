//! Arm-selection policies: upper confidence bound with exploration
//! parameter `alpha` (the `alpha = 0` case is the naive
//! highest-sample-mean benchmark) and Thompson sampling with a
//! `Beta(1,1)` prior.
//!
//! Both policies expose the same select/update contract so episode loops
//! and the experiment harness stay policy-agnostic. Selection never
//! mutates policy state; Thompson sampling draws its posterior samples
//! from the caller's [`RandomStream`].

use serde::{Deserialize, Serialize};

use crate::reward::sample_beta;
use crate::rng::RandomStream;

/// Zero-based arm identifier in `[0, n_arms)`.
pub type ArmIndex = usize;

/// Learning state of the UCB policy.
///
/// Tracks per-arm pull counts and cumulative rewards, so the sample mean
/// of arm `i` is `reward_sums[i] / counts[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    alpha: f64,
    counts: Vec<u64>,
    reward_sums: Vec<f64>,
    t: u64,
}

impl UcbState {
    /// Fresh state over `n_arms` arms with exploration parameter
    /// `alpha` in `[0, 1]`.
    pub fn new(n_arms: usize, alpha: f64) -> Self {
        assert!(n_arms >= 1, "must have at least one arm");
        assert!(
            (0.0..=1.0).contains(&alpha),
            "alpha must lie in [0,1], got {alpha}"
        );
        Self {
            alpha,
            counts: vec![0; n_arms],
            reward_sums: vec![0.0; n_arms],
            t: 0,
        }
    }

    /// Reconstruct a state from per-arm pull counts and reward sums.
    /// Total pulls is the sum of `counts`.
    pub fn from_parts(alpha: f64, counts: Vec<u64>, reward_sums: Vec<f64>) -> Self {
        assert!(
            (0.0..=1.0).contains(&alpha),
            "alpha must lie in [0,1], got {alpha}"
        );
        assert!(!counts.is_empty(), "must have at least one arm");
        assert_eq!(counts.len(), reward_sums.len(), "counts/sums length mismatch");
        for (i, (&c, &s)) in counts.iter().zip(&reward_sums).enumerate() {
            assert!(
                s >= 0.0 && s <= c as f64,
                "arm {i}: reward sum {s} outside [0, {c}]"
            );
        }
        let t = counts.iter().sum();
        Self {
            alpha,
            counts,
            reward_sums,
            t,
        }
    }

    pub fn n_arms(&self) -> usize {
        self.counts.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Per-arm pull counts.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Per-arm cumulative rewards.
    pub fn reward_sums(&self) -> &[f64] {
        &self.reward_sums
    }

    /// Total pulls so far.
    pub fn total_pulls(&self) -> u64 {
        self.t
    }

    /// Confidence index of `arm`: the sample mean plus the exploration
    /// bonus `sqrt(alpha * ln(max(t, 1)) / (2 * counts[arm]))`.
    ///
    /// An unpulled arm has index `+inf`, which forces each arm to be
    /// pulled once before any comparison of finite indices.
    pub fn index(&self, arm: ArmIndex) -> f64 {
        let n = self.counts[arm];
        if n == 0 {
            return f64::INFINITY;
        }
        let mean = self.reward_sums[arm] / n as f64;
        let ln_t = (self.t.max(1) as f64).ln();
        mean + (self.alpha * ln_t / (2.0 * n as f64)).sqrt()
    }

    /// Arm with the highest confidence index; ties go to the lowest index.
    pub fn select(&self) -> ArmIndex {
        let mut best = 0;
        let mut best_index = self.index(0);
        for arm in 1..self.counts.len() {
            let idx = self.index(arm);
            if idx > best_index {
                best = arm;
                best_index = idx;
            }
        }
        best
    }

    /// Record `reward` for a pull of `arm`; all other arms' statistics
    /// are unchanged.
    pub fn update(&mut self, arm: ArmIndex, reward: f64) {
        assert!(
            (0.0..=1.0).contains(&reward),
            "reward must lie in [0,1], got {reward}"
        );
        self.counts[arm] += 1;
        self.reward_sums[arm] += reward;
        self.t += 1;
    }
}

/// Learning state of Thompson sampling on Bernoulli arms: per-arm
/// success counts `H` and failure counts `M`, both starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TsState {
    successes: Vec<u64>,
    failures: Vec<u64>,
}

impl TsState {
    /// Fresh state over `n_arms` arms (uniform `Beta(1,1)` posterior).
    pub fn new(n_arms: usize) -> Self {
        assert!(n_arms >= 1, "must have at least one arm");
        Self {
            successes: vec![0; n_arms],
            failures: vec![0; n_arms],
        }
    }

    /// Reconstruct a state from per-arm success and failure counts.
    pub fn from_parts(successes: Vec<u64>, failures: Vec<u64>) -> Self {
        assert!(!successes.is_empty(), "must have at least one arm");
        assert_eq!(
            successes.len(),
            failures.len(),
            "successes/failures length mismatch"
        );
        Self {
            successes,
            failures,
        }
    }

    pub fn n_arms(&self) -> usize {
        self.successes.len()
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn failures(&self) -> &[u64] {
        &self.failures
    }

    /// Draw `theta_i ~ Beta(successes[i] + 1, failures[i] + 1)` for every
    /// arm and return the argmax; ties go to the lowest index.
    pub fn select(&self, stream: &mut RandomStream) -> ArmIndex {
        let mut best = 0;
        let mut best_theta = f64::NEG_INFINITY;
        for arm in 0..self.successes.len() {
            let theta = sample_beta(
                (self.successes[arm] + 1) as f64,
                (self.failures[arm] + 1) as f64,
                stream,
            );
            if theta > best_theta {
                best = arm;
                best_theta = theta;
            }
        }
        best
    }

    /// Posterior update for a pull of `arm`.
    ///
    /// Rewards of exactly 0 or 1 update the corresponding counter
    /// directly (the exact Bernoulli posterior update, consuming no
    /// randomness); a fractional reward is binarized by a
    /// `Bernoulli(reward)` coin drawn from `stream`, which preserves the
    /// posterior mean.
    pub fn update(&mut self, arm: ArmIndex, reward: f64, stream: &mut RandomStream) {
        assert!(
            (0.0..=1.0).contains(&reward),
            "reward must lie in [0,1], got {reward}"
        );
        let success = if reward == 1.0 {
            true
        } else if reward == 0.0 {
            false
        } else {
            stream.uniform() < reward
        };
        if success {
            self.successes[arm] += 1;
        } else {
            self.failures[arm] += 1;
        }
    }
}

/// Configuration-level description of a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    /// UCB with exploration parameter `alpha` in `[0, 1]`.
    Ucb { alpha: f64 },
    /// Naive highest-sample-mean benchmark; identical to `Ucb { alpha: 0 }`.
    Greedy,
    /// Thompson sampling with a `Beta(1,1)` prior per arm.
    Ts,
    /// Degenerate policy pinned to one arm; used to pin agents to
    /// channels in multi-agent diagnostics.
    Fixed { arm: ArmIndex },
}

impl PolicySpec {
    /// Stable label used for curve names and output file names.
    pub fn label(&self) -> String {
        match self {
            Self::Ucb { alpha } => format!("ucb_alpha_{alpha}"),
            Self::Greedy => "greedy".to_string(),
            Self::Ts => "ts".to_string(),
            Self::Fixed { arm } => format!("fixed_{arm}"),
        }
    }
}

/// A live policy instance created from a [`PolicySpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyState {
    Ucb(UcbState),
    Ts(TsState),
    Fixed(ArmIndex),
}

impl PolicyState {
    /// Instantiate the policy described by `spec` over `n_arms` arms.
    pub fn from_spec(spec: &PolicySpec, n_arms: usize) -> Self {
        match spec {
            PolicySpec::Ucb { alpha } => Self::Ucb(UcbState::new(n_arms, *alpha)),
            PolicySpec::Greedy => Self::Ucb(UcbState::new(n_arms, 0.0)),
            PolicySpec::Ts => Self::Ts(TsState::new(n_arms)),
            PolicySpec::Fixed { arm } => {
                assert!(*arm < n_arms, "fixed arm {arm} out of range for {n_arms} arms");
                Self::Fixed(*arm)
            }
        }
    }

    /// Choose the next arm.
    pub fn select(&self, stream: &mut RandomStream) -> ArmIndex {
        match self {
            Self::Ucb(s) => s.select(),
            Self::Ts(s) => s.select(stream),
            Self::Fixed(arm) => *arm,
        }
    }

    /// Record the reward received for a pull of `arm`.
    pub fn update(&mut self, arm: ArmIndex, reward: f64, stream: &mut RandomStream) {
        match self {
            Self::Ucb(s) => s.update(arm, reward),
            Self::Ts(s) => s.update(arm, reward, stream),
            Self::Fixed(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unpulled_arm_has_infinite_index() {
        let s = UcbState::new(3, 0.5);
        assert_eq!(s.index(0), f64::INFINITY);
    }

    #[test]
    fn alpha_zero_index_is_the_sample_mean() {
        let mut s = UcbState::new(2, 0.0);
        for _ in 0..10 {
            s.update(0, 0.7);
        }
        // The exploration bonus contributes exactly +0.0.
        let mean = s.reward_sums()[0] / s.counts()[0] as f64;
        assert_eq!(s.index(0).to_bits(), mean.to_bits());
        assert_relative_eq!(s.index(0), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn index_matches_the_closed_form() {
        // alpha=1, t=100, counts[arm]=10, mean 0.6:
        // 0.6 + sqrt(ln(100) / 20) = 1.0798525912188081
        let mut s = UcbState::new(2, 1.0);
        for _ in 0..10 {
            s.update(0, 0.6);
        }
        for _ in 0..90 {
            s.update(1, 0.0);
        }
        assert_eq!(s.total_pulls(), 100);
        assert_relative_eq!(s.index(0), 1.0798525912188081, epsilon = 1e-15);
    }

    #[test]
    fn fresh_state_selects_arm_zero() {
        let s = UcbState::new(4, 0.3);
        assert_eq!(s.select(), 0);
    }

    #[test]
    fn infinite_index_beats_any_finite_index() {
        let mut s = UcbState::new(2, 0.3);
        s.update(0, 1.0);
        assert_eq!(s.select(), 1);
    }

    #[test]
    fn greedy_select_is_argmax_of_sample_means() {
        let mut s = UcbState::new(2, 0.0);
        for _ in 0..10 {
            s.update(0, 0.7);
            s.update(1, 0.6);
        }
        assert_eq!(s.select(), 0);
    }

    #[test]
    fn update_accumulates_counts_and_sums() {
        let mut s = UcbState::new(3, 0.5);
        s.update(0, 1.0);
        assert_eq!(s.counts(), &[1, 0, 0]);
        assert_eq!(s.reward_sums()[0], 1.0);
        assert_eq!(s.total_pulls(), 1);

        let mut s = UcbState::new(1, 0.0);
        s.update(0, 0.5);
        s.update(0, 0.5);
        s.update(0, 0.5);
        assert_eq!(s.counts(), &[3]);
        assert_relative_eq!(s.index(0), 0.5, epsilon = 1e-15);
    }

    #[test]
    #[should_panic(expected = "reward must lie in [0,1]")]
    fn update_rejects_out_of_range_reward() {
        let mut s = UcbState::new(1, 0.0);
        s.update(0, 1.5);
    }

    #[test]
    #[should_panic(expected = "alpha must lie in [0,1]")]
    fn ucb_rejects_out_of_range_alpha() {
        UcbState::new(2, 1.5);
    }

    #[test]
    fn cold_start_pulls_every_arm_once() {
        let mut s = UcbState::new(5, 0.7);
        for _ in 0..5 {
            let arm = s.select();
            s.update(arm, 0.3);
        }
        assert!(s.counts().iter().all(|&c| c == 1));
    }

    #[test]
    fn ts_single_arm_always_selected() {
        let s = TsState::new(1);
        let mut stream = RandomStream::new(1, 0);
        for _ in 0..100 {
            assert_eq!(s.select(&mut stream), 0);
        }
    }

    #[test]
    fn ts_posterior_counts_track_pulls() {
        let mut s = TsState::new(2);
        let mut stream = RandomStream::new(2, 0);
        s.update(0, 1.0, &mut stream);
        assert_eq!(s.successes(), &[1, 0]);
        assert_eq!(s.failures(), &[0, 0]);
        s.update(0, 0.0, &mut stream);
        assert_eq!(s.failures(), &[1, 0]);
        for _ in 0..50 {
            s.update(1, 0.5, &mut stream);
        }
        assert_eq!(s.successes()[1] + s.failures()[1], 50);
    }

    #[test]
    fn ts_concentrated_posterior_dominates() {
        let s = TsState::from_parts(vec![1_000_000, 0], vec![0, 1_000_000]);
        let mut stream = RandomStream::new(3, 0);
        let mut wins = 0;
        let trials = 10_000;
        for _ in 0..trials {
            if s.select(&mut stream) == 0 {
                wins += 1;
            }
        }
        assert!(
            wins as f64 >= 0.999 * trials as f64,
            "arm 0 chosen only {wins}/{trials} times"
        );
    }

    #[test]
    fn policy_trajectories_replay_bitwise() {
        for spec in [PolicySpec::Ucb { alpha: 0.3 }, PolicySpec::Ts] {
            let mut a = PolicyState::from_spec(&spec, 3);
            let mut b = PolicyState::from_spec(&spec, 3);
            let mut sa = RandomStream::new(7, 1);
            let mut sb = RandomStream::new(7, 1);
            for i in 0..500u64 {
                let arm_a = a.select(&mut sa);
                let arm_b = b.select(&mut sb);
                assert_eq!(arm_a, arm_b);
                let reward = (i % 3) as f64 / 2.0;
                a.update(arm_a, reward, &mut sa);
                b.update(arm_b, reward, &mut sb);
            }
        }
    }

    #[test]
    fn greedy_spec_is_ucb_alpha_zero() {
        let g = PolicyState::from_spec(&PolicySpec::Greedy, 2);
        match g {
            PolicyState::Ucb(s) => assert_eq!(s.alpha(), 0.0),
            _ => panic!("greedy must instantiate as UCB"),
        }
    }

    #[test]
    fn from_parts_enforces_the_state_invariants() {
        let s = UcbState::from_parts(0.5, vec![2, 3], vec![1.5, 3.0]);
        assert_eq!(s.total_pulls(), 5);
        let t = TsState::from_parts(vec![1, 2], vec![3, 4]);
        assert_eq!(t.n_arms(), 2);
    }

    #[test]
    #[should_panic(expected = "outside [0,")]
    fn from_parts_rejects_oversized_reward_sums() {
        UcbState::from_parts(0.5, vec![2], vec![2.5]);
    }

    #[test]
    fn labels_are_stable() {
        assert_eq!(PolicySpec::Ucb { alpha: 0.0464 }.label(), "ucb_alpha_0.0464");
        assert_eq!(PolicySpec::Ucb { alpha: 0.0 }.label(), "ucb_alpha_0");
        assert_eq!(PolicySpec::Ts.label(), "ts");
        assert_eq!(PolicySpec::Greedy.label(), "greedy");
        assert_eq!(PolicySpec::Fixed { arm: 2 }.label(), "fixed_2");
    }
}

//! Arm reward distributions, their analytic means, and seeded sampling.
//!
//! Four reward laws are supported: Bernoulli, Beta, Exponential, and a
//! finite discrete law over explicit support points. Every sample is
//! clamped to `[0, 1]` at the sampler, so all consumers see bounded
//! rewards; the only law this actually perturbs is the Exponential,
//! whose clamped mean is `(1 - e^{-rate}) / rate` instead of `1 / rate`.

use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;

/// Tolerance for "probabilities sum to 1" checks.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A single arm's reward law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardDistribution {
    /// Bernoulli over `{0, 1}` with success probability `p`.
    Bernoulli { p: f64 },
    /// Beta with strictly positive shapes `a` and `b`; mean `a / (a + b)`.
    Beta { a: f64, b: f64 },
    /// Exponential with rate `rate` (mean `1 / rate` before clamping).
    Exponential { rate: f64 },
    /// Finite law: reward `values[i]` with probability `probs[i]`.
    FiniteDiscrete { values: Vec<f64>, probs: Vec<f64> },
}

/// First violated invariant of a [`RewardDistribution`], if any.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("bernoulli p must lie in [0,1], got {0}")]
    BernoulliP(f64),
    #[error("beta shapes must be strictly positive and finite, got a={a}, b={b}")]
    BetaShape { a: f64, b: f64 },
    #[error("exponential rate must be strictly positive and finite, got {0}")]
    ExponentialRate(f64),
    #[error("finite_discrete values and probs must have equal nonzero length, got {values} and {probs}")]
    LengthMismatch { values: usize, probs: usize },
    #[error("finite_discrete values must lie in [0,1], got {value} at index {index}")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("finite_discrete probs must be nonnegative, got {prob} at index {index}")]
    NegativeProb { index: usize, prob: f64 },
    #[error("finite_discrete probs must sum to 1, got {0}")]
    ProbSum(f64),
}

impl RewardDistribution {
    /// Check every invariant, reporting the first violation found.
    pub fn validate(&self) -> Result<(), DistributionError> {
        match self {
            Self::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(DistributionError::BernoulliP(*p));
                }
            }
            Self::Beta { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(DistributionError::BetaShape { a: *a, b: *b });
                }
            }
            Self::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(DistributionError::ExponentialRate(*rate));
                }
            }
            Self::FiniteDiscrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(DistributionError::LengthMismatch {
                        values: values.len(),
                        probs: probs.len(),
                    });
                }
                for (index, &value) in values.iter().enumerate() {
                    if !(0.0..=1.0).contains(&value) {
                        return Err(DistributionError::ValueOutOfRange { index, value });
                    }
                }
                for (index, &prob) in probs.iter().enumerate() {
                    if prob.is_nan() || prob < 0.0 {
                        return Err(DistributionError::NegativeProb { index, prob });
                    }
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return Err(DistributionError::ProbSum(total));
                }
            }
        }
        Ok(())
    }

    /// Exact expectation of the unclamped law.
    pub fn analytic_mean(&self) -> f64 {
        match self {
            Self::Bernoulli { p } => *p,
            Self::Beta { a, b } => a / (a + b),
            Self::Exponential { rate } => 1.0 / rate,
            Self::FiniteDiscrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
        }
    }

    /// Expectation of the emitted (clamped-to-`[0,1]`) reward.
    ///
    /// Equals [`analytic_mean`](Self::analytic_mean) for every law except
    /// the Exponential, where `E[min(X, 1)] = (1 - e^{-rate}) / rate`.
    pub fn clamped_mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => (1.0 - (-rate).exp()) / rate,
            _ => self.analytic_mean(),
        }
    }

    /// Draw one reward, clamped to `[0, 1]`, advancing `stream`.
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        let x = match self {
            Self::Bernoulli { p } => {
                if stream.uniform() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Beta { a, b } => sample_beta(*a, *b, stream),
            Self::Exponential { rate } => {
                Exp::new(*rate).expect("validated rate").sample(stream)
            }
            Self::FiniteDiscrete { values, probs } => {
                let u = stream.uniform();
                let mut acc = 0.0;
                let mut chosen = *values.last().expect("validated nonempty");
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        chosen = *v;
                        break;
                    }
                }
                chosen
            }
        };
        x.clamp(0.0, 1.0)
    }
}

/// Draw from `Beta(a, b)` as the ratio `X / (X + Y)` of two Gamma variates
/// with shapes `a` and `b`, each generated by rejection (valid for all
/// positive shapes).
pub fn sample_beta(a: f64, b: f64, stream: &mut RandomStream) -> f64 {
    let x = Gamma::new(a, 1.0).expect("positive shape").sample(stream);
    let y = Gamma::new(b, 1.0).expect("positive shape").sample(stream);
    let sum = x + y;
    if sum > 0.0 {
        x / sum
    } else {
        // Both variates underflowed to zero; only reachable for tiny shapes.
        0.5
    }
}

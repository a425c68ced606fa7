//! Exp3 for adversarial bandits, in the loss-estimate form: every arm that
//! was not played is credited an estimated reward of 1 and the played arm
//! `1 - (1 - r) / p`. Only the played arm's reward is ever observed.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp3 {
    weights: Vec<f64>,
    learning_rate: f64,
    horizon: u64,
}

/// A probability distribution over arms.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Inverse-CDF draw from one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (arm, p) in self.0.iter().enumerate() {
            acc += p;
            if u < acc {
                return arm;
            }
        }
        // u landed in the rounding gap at the top; take the last arm with mass
        self.0.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// `sqrt(2 ln K / (K T))`.
pub fn exp3_learning_rate(arm_count: usize, horizon: u64) -> f64 {
    let k = arm_count as f64;
    (2.0 * k.ln() / (k * horizon as f64)).sqrt()
}

impl Exp3 {
    pub fn new(arm_count: usize, horizon: u64) -> Result<Self> {
        if arm_count == 0 {
            return Err(Error::invalid("a bandit needs at least one arm"));
        }
        if horizon == 0 {
            return Err(Error::invalid("bandit horizon must be at least one round"));
        }
        Ok(Exp3 {
            weights: vec![1.0; arm_count],
            learning_rate: exp3_learning_rate(arm_count, horizon),
            horizon,
        })
    }

    pub fn arm_count(&self) -> usize {
        self.weights.len()
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn distribution(&self) -> ProbabilityVector {
        let total: f64 = self.weights.iter().sum();
        ProbabilityVector(self.weights.iter().map(|w| w / total).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.weights.len() == 1 {
            // still consume a variate so stream positions do not depend on arm count
            let _: f64 = rng.random();
            return 0;
        }
        self.distribution().sample(rng)
    }

    /// Feeds back the observed reward of `chosen`.
    ///
    /// Rewards outside `[0, 1]` (floating-point drift in the normalization)
    /// are clamped with a warning. Weights are rescaled so the largest is 1
    /// after every update; the sampling distribution is scale-invariant.
    pub fn update(&mut self, chosen: usize, reward: f64) -> Result<()> {
        if chosen >= self.weights.len() {
            return Err(Error::invalid(format!(
                "arm {chosen} out of range for {} arms",
                self.weights.len()
            )));
        }
        let reward = if (0.0..=1.0).contains(&reward) {
            reward
        } else {
            let clamped = if reward.is_nan() { 0.0 } else { reward.clamp(0.0, 1.0) };
            if (reward - clamped).abs() > 1e-9 || reward.is_nan() {
                log::warn!("bandit reward {reward} outside [0, 1], clamped to {clamped}");
            }
            clamped
        };
        let p = self.weights[chosen] / self.weights.iter().sum::<f64>();
        let estimate = 1.0 - (1.0 - reward) / p;
        // Unplayed arms all receive estimate 1, i.e. a common factor exp(eta);
        // applying only the relative factor to the played arm is equivalent
        // after renormalization and avoids needless work.
        self.weights[chosen] *= (self.learning_rate * (estimate - 1.0)).exp();
        self.renormalize();
        Ok(())
    }

    fn renormalize(&mut self) {
        let max = self.weights.iter().cloned().fold(0.0, f64::max);
        for w in &mut self.weights {
            *w /= max;
            // keep every arm alive: a weight that underflows to zero could never recover
            if *w < f64::MIN_POSITIVE {
                *w = f64::MIN_POSITIVE;
            }
        }
    }

    /// Resizes the arm set, keeping weights of arms that survive.
    ///
    /// `keep[new_arm]` names the old arm index carried over, or `None` for
    /// a new arm, which starts at the initial weight 1. The learning rate is
    /// recomputed for the new arm count.
    pub fn remap_arms(&mut self, keep: &[Option<usize>]) -> Result<()> {
        if keep.is_empty() {
            return Err(Error::invalid("a bandit needs at least one arm"));
        }
        let weights: Vec<f64> = keep
            .iter()
            .map(|k| k.and_then(|old| self.weights.get(old).copied()).unwrap_or(1.0))
            .collect();
        self.weights = weights;
        self.learning_rate = exp3_learning_rate(self.weights.len(), self.horizon);
        self.renormalize();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn rng(seed: u64) -> Stream {
        stream(seed, &[0])
    }

    #[test]
    fn fresh_state() {
        let b = Exp3::new(4, 100).unwrap();
        assert_eq!(b.weights(), &[1.0; 4]);
        let expected = (2.0 * 4f64.ln() / (4.0 * 100.0)).sqrt();
        assert_eq!(b.learning_rate(), expected);
        assert_eq!(b.distribution().probs(), &[0.25; 4]);
    }

    #[test]
    fn learning_rate_for_sixteen_arms() {
        // sqrt(2 * ln 16 / (16 * 3000)) = sqrt(5.545177444479562 / 48000)
        let b = Exp3::new(16, 3000).unwrap();
        assert!((b.learning_rate() - 0.010_748_233_812_739_85).abs() < 1e-15);
    }

    #[test]
    fn zero_arms_rejected() {
        assert!(Exp3::new(0, 10).is_err());
        assert!(Exp3::new(2, 0).is_err());
    }

    #[test]
    fn single_arm_always_zero() {
        let mut b = Exp3::new(1, 10).unwrap();
        let mut r = rng(1);
        for _ in 0..50 {
            assert_eq!(b.sample(&mut r), 0);
            b.update(0, 0.3).unwrap();
            assert_eq!(b.distribution().probs(), &[1.0]);
        }
    }

    #[test]
    fn distribution_normalizes_weights() {
        let b = Exp3 {
            weights: vec![2.0, 1.0, 1.0],
            learning_rate: 0.1,
            horizon: 1,
        };
        assert_eq!(b.distribution().probs(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn reward_one_leaves_distribution_unchanged() {
        let mut b = Exp3::new(3, 50).unwrap();
        b.update(1, 0.2).unwrap();
        let before = b.distribution();
        b.update(2, 1.0).unwrap();
        assert_eq!(before, b.distribution());
    }

    #[test]
    fn two_arm_zero_reward_update() {
        let mut b = Exp3::new(2, 10).unwrap();
        let eta = b.learning_rate();
        b.update(0, 0.0).unwrap();
        // estimates (1 - 1/0.5, 1) = (-1, 1): ratio exp(-eta) / exp(eta)
        let w = b.weights();
        assert!((w[0] / w[1] - (-2.0 * eta).exp()).abs() < 1e-15);
    }

    #[test]
    fn distribution_matches_raw_weights_after_updates() {
        let mut b = Exp3::new(5, 200).unwrap();
        let mut r = rng(3);
        for t in 0..100 {
            let arm = b.sample(&mut r);
            b.update(arm, (t % 7) as f64 / 7.0).unwrap();
        }
        let total: f64 = b.weights().iter().sum();
        for (p, w) in b.distribution().probs().iter().zip(b.weights()) {
            assert_eq!(*p, w / total);
        }
    }

    #[test]
    fn out_of_range_reward_is_clamped() {
        let mut a = Exp3::new(3, 10).unwrap();
        let mut b = a.clone();
        a.update(0, 1.5).unwrap();
        b.update(0, 1.0).unwrap();
        assert_eq!(a, b);
        a.update(1, -0.2).unwrap();
        b.update(1, 0.0).unwrap();
        assert_eq!(a, b);
        assert!(a.update(3, 0.5).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let b = Exp3::new(6, 10).unwrap();
        let draw = |seed| {
            let mut r = rng(seed);
            (0..32).map(|_| b.sample(&mut r)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let b = Exp3::new(4, 10).unwrap();
        let mut r = rng(11);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[b.sample(&mut r)] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * 0.25).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn full_feedback_alternation_concentrates_on_good_arm() {
        // Arm 0 always pays 1, arm 1 always pays 0; alternate which one is fed.
        let mut b = Exp3::new(2, 1000).unwrap();
        let mut last = b.distribution().probs()[0];
        for t in 0..1000 {
            if t % 2 == 0 {
                b.update(0, 1.0).unwrap();
            } else {
                b.update(1, 0.0).unwrap();
            }
            let p0 = b.distribution().probs()[0];
            assert!(p0 >= last - 1e-15);
            last = p0;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn remap_keeps_surviving_weights() {
        let mut b = Exp3::new(3, 100).unwrap();
        b.update(0, 0.0).unwrap();
        let w = b.weights().to_vec();
        b.remap_arms(&[Some(2), Some(0), None, None]).unwrap();
        assert_eq!(b.arm_count(), 4);
        assert_eq!(b.weights()[0], w[2]);
        assert_eq!(b.weights()[1], w[0]);
        assert_eq!(b.weights()[2], 1.0);
        assert_eq!(b.learning_rate(), exp3_learning_rate(4, 100));
    }
}

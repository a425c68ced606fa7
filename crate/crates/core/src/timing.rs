//! Simulated wall-clock accounting.
//!
//! Time is charged per objective evaluation (`tau_f`) and per action
//! transmitted over one hop (`tau_c`). Arithmetic outside evaluations is free.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayModel {
    pub tau_f: f64,
    pub tau_c: f64,
}

impl DelayModel {
    pub fn new(tau_f: f64, tau_c: f64) -> Result<Self> {
        if !(tau_f >= 0.0 && tau_c >= 0.0 && tau_f.is_finite() && tau_c.is_finite()) {
            return Err(Error::invalid("delays must be finite and nonnegative"));
        }
        Ok(DelayModel { tau_f, tau_c })
    }

    pub const ZERO: DelayModel = DelayModel { tau_f: 0.0, tau_c: 0.0 };
}

/// Objective evaluations one agent performs in one round with bandwidth `alpha`.
pub const fn evaluations_per_round(alpha: usize) -> usize {
    2 * alpha + 3
}

/// One round for an agent with bandwidth `alpha`: `tau_f (2 alpha + 3) + tau_c`.
pub fn anaconda_round_time(alpha: usize, model: DelayModel) -> f64 {
    model.tau_f * evaluations_per_round(alpha) as f64 + model.tau_c
}

/// Agents run each phase in parallel, so the slowest agent sets the pace.
pub fn anaconda_round_time_heterogeneous(alphas: &[usize], model: DelayModel) -> f64 {
    alphas
        .iter()
        .map(|&a| anaconda_round_time(a, model))
        .fold(0.0, f64::max)
}

/// Rounds that complete within `budget` seconds.
///
/// A relative slack of 1e-9 absorbs representation error in quotients that
/// are mathematically integral (e.g. 0.3 / 0.1).
pub fn budget_to_rounds(budget: f64, per_round: f64) -> Result<u64> {
    if !(budget >= 0.0) || !(per_round >= 0.0) {
        return Err(Error::invalid("budget and per-round time must be nonnegative"));
    }
    if per_round == 0.0 {
        return Err(Error::InfiniteRounds);
    }
    let q = budget / per_round;
    Ok((q * (1.0 + 1e-9)).floor() as u64)
}

/// Size parameters entering the convergence estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceParams {
    /// largest action set
    pub v_bar: usize,
    /// number of agents
    pub n: usize,
    /// largest bandwidth
    pub alpha_bar: usize,
    /// largest coordination neighborhood
    pub m_bar: usize,
    pub epsilon: f64,
}

impl ConvergenceParams {
    /// Neighbor selection learns nothing when every agent either listens to
    /// nobody or can afford its whole coordination neighborhood.
    pub fn neighbor_selection_involved(&self) -> bool {
        self.alpha_bar > 0 && self.alpha_bar < self.m_bar
    }
}

/// Rounds until the averaged regret falls within `epsilon`.
pub fn convergence_rounds(p: &ConvergenceParams) -> Result<u64> {
    if !(p.epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let n2 = (p.n * p.n) as f64;
    let numer = if p.neighbor_selection_involved() {
        ((p.alpha_bar * p.alpha_bar * p.m_bar + p.v_bar) as f64) * n2
    } else {
        p.v_bar as f64 * n2
    };
    let t = numer / p.epsilon;
    // the same integral-quotient slack as budget_to_rounds, in the other direction
    Ok((t * (1.0 - 1e-12)).ceil() as u64)
}

/// Which closed form a convergence-time estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceRegime {
    /// `(tau_f alpha + tau_c)(alpha^2 M + V) N^2 / eps`
    General,
    /// Coordination neighborhoods grow sublinearly in N: `(tau_f alpha + tau_c) V N^2 / eps`
    Sparse,
}

/// An order-of-magnitude estimate, not a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEstimate {
    pub regime: ConvergenceRegime,
    pub rounds: u64,
    pub seconds: f64,
}

/// Convergence time estimate. `sparse` selects the regime where the largest
/// coordination neighborhood is `o(N)`, which drops the `alpha^2 M` term.
pub fn convergence_time(p: &ConvergenceParams, model: DelayModel, sparse: bool) -> Result<ConvergenceEstimate> {
    let (regime, rounds) = if sparse {
        let dense_free = ConvergenceParams { alpha_bar: 0, ..*p };
        (ConvergenceRegime::Sparse, convergence_rounds(&dense_free)?)
    } else {
        (ConvergenceRegime::General, convergence_rounds(p)?)
    };
    let per_round = model.tau_f * p.alpha_bar as f64 + model.tau_c;
    Ok(ConvergenceEstimate {
        regime,
        rounds,
        seconds: per_round * rounds as f64,
    })
}

/// Whether a family of coordination-neighborhood sizes looks sparse, i.e.
/// the largest neighborhood is at most `sqrt(N)`.
pub fn is_sparse(m_bar: usize, n: usize) -> bool {
    (m_bar * m_bar) <= n
}

/// Communication time of a sequential pass: the `k`-th hand-off carries `k`
/// actions over `hops[k-1]` links.
pub fn sequential_communication_time(hops: &[usize], model: DelayModel) -> f64 {
    hops.iter()
        .enumerate()
        .map(|(i, &d)| (i + 1) as f64 * d as f64 * model.tau_c)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_time_examples() {
        let m = DelayModel::new(0.01, 0.01).unwrap();
        assert!((anaconda_round_time(5, m) - 0.14).abs() < 1e-15);
        assert_eq!(budget_to_rounds(300.0, anaconda_round_time(5, m)).unwrap(), 2142);
        assert_eq!(anaconda_round_time(3, DelayModel::ZERO), 0.0);
        let m = DelayModel::new(0.03, 0.03).unwrap();
        assert!((anaconda_round_time(0, m) - 0.12).abs() < 1e-15);
    }

    #[test]
    fn heterogeneous_round_is_the_slowest_agent() {
        let m = DelayModel::new(0.01, 0.02).unwrap();
        let t = anaconda_round_time_heterogeneous(&[0, 4, 1], m);
        assert_eq!(t, anaconda_round_time(4, m));
    }

    #[test]
    fn round_time_monotone() {
        let base = DelayModel::new(0.02, 0.05).unwrap();
        for a in 0..10 {
            assert!(anaconda_round_time(a + 1, base) >= anaconda_round_time(a, base));
        }
        let more_f = DelayModel::new(0.03, 0.05).unwrap();
        let more_c = DelayModel::new(0.02, 0.06).unwrap();
        assert!(anaconda_round_time(2, more_f) >= anaconda_round_time(2, base));
        assert!(anaconda_round_time(2, more_c) >= anaconda_round_time(2, base));
    }

    #[test]
    fn budget_examples() {
        assert_eq!(budget_to_rounds(300.0, 0.14).unwrap(), 2142);
        assert_eq!(budget_to_rounds(300.0, 300.0).unwrap(), 1);
        assert_eq!(budget_to_rounds(10.0, 0.6086).unwrap(), 16);
        assert_eq!(budget_to_rounds(0.3, 0.1).unwrap(), 3);
        assert_eq!(budget_to_rounds(5.0, 0.0), Err(Error::InfiniteRounds));
        assert!(DelayModel::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn convergence_rounds_examples() {
        let p = ConvergenceParams {
            v_bar: 16,
            n: 10,
            alpha_bar: 0,
            m_bar: 5,
            epsilon: 0.5,
        };
        assert_eq!(convergence_rounds(&p).unwrap(), 16 * 100 * 2);
        let p = ConvergenceParams { alpha_bar: 2, ..p };
        assert_eq!(convergence_rounds(&p).unwrap(), (4 * 5 + 16) * 100 * 2);
        // alpha covering the whole neighborhood takes neighbor selection out
        let p = ConvergenceParams { alpha_bar: 5, ..p };
        assert_eq!(convergence_rounds(&p).unwrap(), 16 * 100 * 2);
        let unit = ConvergenceParams {
            v_bar: 1,
            n: 1,
            alpha_bar: 0,
            m_bar: 0,
            epsilon: 1.0,
        };
        assert_eq!(convergence_rounds(&unit).unwrap(), 1);
        let p = ConvergenceParams {
            v_bar: 3,
            n: 1,
            alpha_bar: 0,
            m_bar: 0,
            epsilon: 0.7,
        };
        assert_eq!(convergence_rounds(&p).unwrap(), 5); // ceil(4.2857)
    }

    #[test]
    fn convergence_time_examples() {
        let p = ConvergenceParams {
            v_bar: 16,
            n: 10,
            alpha_bar: 2,
            m_bar: 5,
            epsilon: 0.5,
        };
        let m = DelayModel::new(0.01, 0.03).unwrap();
        let e = convergence_time(&p, m, false).unwrap();
        assert_eq!(e.regime, ConvergenceRegime::General);
        assert_eq!(e.rounds, 7200);
        assert!((e.seconds - 0.05 * 7200.0).abs() < 1e-9);
        let s = convergence_time(&p, m, true).unwrap();
        assert_eq!(s.regime, ConvergenceRegime::Sparse);
        assert_eq!(s.rounds, 3200);
        assert!((s.seconds - 0.05 * 3200.0).abs() < 1e-9);
        assert_eq!(convergence_time(&p, DelayModel::ZERO, false).unwrap().seconds, 0.0);
        assert!(is_sparse(3, 10) && !is_sparse(4, 10));
    }

    #[test]
    fn sequential_time() {
        let m = DelayModel::new(0.0, 0.5).unwrap();
        // hops (1, 2, 2): 1*1 + 2*2 + 3*2 = 11 action-hops
        assert!((sequential_communication_time(&[1, 2, 2], m) - 5.5).abs() < 1e-12);
    }
}

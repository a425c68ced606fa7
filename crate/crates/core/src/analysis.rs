//! Approximation-bound evaluation after a run: curvatures, the empirical
//! β ratio, exhaustive optima, and the resulting lower bounds.

use crate::coordination::RoundRecord;
use crate::error::{Error, Result};
use crate::objective::{curvature, curvature_of, ground_set, voc_of, Choice, JointAssignment, Objective};
use serde::{Deserialize, Serialize};

/// Joint assignments `brute_force_opt` will enumerate.
pub const MAX_JOINT_ASSIGNMENTS: u128 = 10_000_000;
/// Candidate neighborhoods `brute_force_neighborhood` will enumerate.
pub const MAX_NEIGHBORHOODS: u128 = 1_000_000;

/// `(1 - (1 - kappa/alpha)^alpha) / kappa`, with the limit 1 at `kappa = 0`.
pub fn rho(kappa: f64, alpha: usize) -> f64 {
    if alpha == 0 || kappa <= 1e-12 {
        return 1.0;
    }
    let a = alpha as f64;
    // ln_1p keeps (1 - kappa/alpha)^alpha accurate for large alpha
    let pow = if kappa >= a { 0.0 } else { (a * (-kappa / a).ln_1p()).exp() };
    (1.0 - pow) / kappa
}

/// `sum_t sum_i f(a_i | N_i) / sum_t f(A_t)`.
pub fn compute_beta<'a>(history: impl IntoIterator<Item = &'a RoundRecord>) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for r in history {
        num += r.marginals.iter().sum::<f64>();
        den += r.f_value;
    }
    if den <= 0.0 {
        return Err(Error::Degenerate("beta needs a positive objective total".into()));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VocCurvature {
    pub value: f64,
    /// Every neighbor had zero VoC alone; `value` is then 0.
    pub degenerate: bool,
}

/// Curvature of `N -> voc(item; N)` over the given neighbor actions.
pub fn voc_curvature<O: Objective + ?Sized>(objective: &O, item: Choice, neighbors: &[Choice]) -> Result<VocCurvature> {
    if neighbors.iter().any(|c| c.agent == item.agent) {
        return Err(Error::invalid("the agent cannot be its own neighbor"));
    }
    let r = curvature_of(neighbors.len(), |mask| {
        let picked: Vec<Choice> = neighbors.iter().enumerate().filter(|(i, _)| mask(*i)).map(|(_, c)| *c).collect();
        voc_of(objective, item, &picked)
    });
    match r {
        Ok(value) => Ok(VocCurvature { value, degenerate: false }),
        Err(Error::Degenerate(_)) => Ok(VocCurvature {
            value: 0.0,
            degenerate: true,
        }),
        Err(e) => Err(e),
    }
}

fn joint_count<O: Objective + ?Sized>(objective: &O) -> u128 {
    (0..objective.agent_count())
        .map(|i| objective.action_count(i) as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX)
}

/// Whether `brute_force_opt` fits within its enumeration cap.
pub fn optimum_feasible<O: Objective + ?Sized>(objective: &O) -> bool {
    joint_count(objective) <= MAX_JOINT_ASSIGNMENTS
}

/// Exact maximizer of `f` over joint assignments; ties to the
/// lexicographically smallest action vector.
pub fn brute_force_opt<O: Objective + ?Sized>(objective: &O) -> Result<(JointAssignment, f64)> {
    let total = joint_count(objective);
    if total > MAX_JOINT_ASSIGNMENTS {
        return Err(Error::Capacity {
            what: "exhaustive joint optimum",
            needed: total,
            limit: MAX_JOINT_ASSIGNMENTS,
        });
    }
    let n = objective.agent_count();
    let sizes: Vec<usize> = (0..n).map(|i| objective.action_count(i)).collect();
    let mut actions = vec![0usize; n];
    let mut best = (actions.clone(), f64::NEG_INFINITY);
    let mut items: Vec<Choice> = Vec::with_capacity(n);
    loop {
        items.clear();
        items.extend(actions.iter().enumerate().map(|(i, &a)| Choice::new(i, a)));
        let v = objective.value(&items);
        if v > best.1 {
            best = (actions.clone(), v);
        }
        // odometer with agent 0 most significant
        let mut k = n;
        loop {
            if k == 0 {
                return Ok((JointAssignment::from_actions(&best.0), best.1));
            }
            k -= 1;
            actions[k] += 1;
            if actions[k] < sizes[k] {
                break;
            }
            actions[k] = 0;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// The neighborhood of at most `alpha` members of `coordination` that
/// maximizes the summed VoC of `agent`'s actions over `trace`. Each round of
/// the trace must assign every member of `coordination` and the agent itself.
/// Ties go to the lexicographically smallest sorted member list.
pub fn brute_force_neighborhood<O: Objective + ?Sized>(
    objective: &O,
    agent: usize,
    trace: &[JointAssignment],
    coordination: &[usize],
    alpha: usize,
) -> Result<(Vec<usize>, f64)> {
    let m = coordination.len();
    let alpha = alpha.min(m);
    let count: u128 = (0..=alpha).map(|k| binomial(m, k)).fold(0u128, |a, b| a.saturating_add(b));
    if count > MAX_NEIGHBORHOODS || m >= 64 {
        return Err(Error::Capacity {
            what: "exhaustive neighborhood search",
            needed: count,
            limit: MAX_NEIGHBORHOODS,
        });
    }
    let mut members = coordination.to_vec();
    members.sort_unstable();
    let full_budget = alpha == m;
    let rounds: Vec<(Choice, Vec<Choice>)> = trace
        .iter()
        .map(|joint| {
            let own = joint
                .action_of(agent)
                .map(|a| Choice::new(agent, a))
                .ok_or_else(|| Error::invalid(format!("trace misses agent {agent}")))?;
            let others = members
                .iter()
                .map(|&j| {
                    joint
                        .action_of(j)
                        .map(|a| Choice::new(j, a))
                        .ok_or_else(|| Error::invalid(format!("trace misses agent {j}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((own, others))
        })
        .collect::<Result<_>>()?;
    if full_budget {
        // VoC is nondecreasing in the neighborhood, so everyone is optimal
        let total = rounds.iter().map(|(own, others)| voc_of(objective, *own, others)).sum();
        return Ok((members, total));
    }
    let mut best: (Vec<usize>, f64) = (Vec::new(), 0.0);
    let mut picked: Vec<Choice> = Vec::with_capacity(alpha);
    for mask in 0u64..1 << m {
        if mask.count_ones() as usize > alpha {
            continue;
        }
        let subset: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| members[i]).collect();
        let mut total = 0.0;
        for (own, others) in &rounds {
            picked.clear();
            picked.extend((0..m).filter(|&i| mask >> i & 1 == 1).map(|i| others[i]));
            total += voc_of(objective, *own, &picked);
        }
        if total > best.1 + 1e-9 || ((total - best.1).abs() <= 1e-9 && subset < best.0) {
            best = (subset, total);
        }
    }
    Ok(best)
}

/// The last quarter of a run, used for all asymptotic bound checks.
pub fn last_quarter<T>(history: &[T]) -> &[T] {
    &history[history.len() * 3 / 4..]
}

/// `max(1 - kappa_f, 1 / (1 + beta kappa_f))`.
pub fn asymptotic_bound(kappa_f: f64, beta: f64) -> f64 {
    (1.0 - kappa_f).max(1.0 / (1.0 + beta * kappa_f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kappa_f: f64,
    /// Largest VoC curvature over agents and window rounds.
    pub kappa_i: Option<f64>,
    pub rho: Option<f64>,
    pub beta_hat: f64,
    pub f_opt: Option<f64>,
    /// Ratio to `f_opt` guaranteed a priori from the realized VoC.
    pub apriori_lb: Option<f64>,
    /// `1 / (1 + beta kappa_f)`.
    pub aposteriori_lb: f64,
    pub asymptotic_lb: f64,
    /// Mean `f` over the window rounds.
    pub empirical_mean_f: f64,
    /// `empirical_mean_f >= asymptotic_lb f_opt - 0.05 f_opt`, when `f_opt` is known.
    pub holds: Option<bool>,
}

/// What `evaluate_bounds` should compute beyond the cheap quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundScope {
    /// Exhaustive optimum, VoC curvature and optimal neighborhoods.
    pub exhaustive: bool,
}

/// Bounds over the last quarter of each history (one history per trial).
/// `coordination` and `alphas` describe the team that produced them.
pub fn evaluate_bounds<O: Objective + ?Sized>(
    objective: &O,
    histories: &[&[RoundRecord]],
    coordination: &[Vec<usize>],
    alphas: &[usize],
    scope: BoundScope,
) -> Result<BoundReport> {
    let windows: Vec<&[RoundRecord]> = histories.iter().map(|h| last_quarter(h)).collect();
    evaluate_window_bounds(objective, &windows, coordination, alphas, scope)
}

/// As [`evaluate_bounds`], for callers that kept only the window rounds.
pub fn evaluate_window_bounds<O: Objective + ?Sized>(
    objective: &O,
    windows: &[&[RoundRecord]],
    coordination: &[Vec<usize>],
    alphas: &[usize],
    scope: BoundScope,
) -> Result<BoundReport> {
    let rounds: Vec<&RoundRecord> = windows.iter().flat_map(|w| w.iter()).collect();
    if rounds.is_empty() {
        return Err(Error::invalid("no rounds to evaluate"));
    }
    let kappa_f = curvature(objective, &ground_set(objective))?;
    let beta_hat = compute_beta(rounds.iter().copied())?;
    let empirical_mean_f = rounds.iter().map(|r| r.f_value).sum::<f64>() / rounds.len() as f64;
    let aposteriori_lb = 1.0 / (1.0 + beta_hat * kappa_f);
    let asymptotic_lb = asymptotic_bound(kappa_f, beta_hat);
    let mut report = BoundReport {
        kappa_f,
        kappa_i: None,
        rho: None,
        beta_hat,
        f_opt: None,
        apriori_lb: None,
        aposteriori_lb,
        asymptotic_lb,
        empirical_mean_f,
        holds: None,
    };
    if !scope.exhaustive {
        return Ok(report);
    }

    let (_, f_opt) = brute_force_opt(objective)?;
    let n = objective.agent_count();
    let mut kappa_i: f64 = 0.0;
    for r in &rounds {
        for i in 0..n {
            let Some(a) = r.actions.action_of(i) else { continue };
            let neighbors: Vec<Choice> = coordination[i]
                .iter()
                .filter_map(|&j| r.actions.action_of(j).map(|b| Choice::new(j, b)))
                .collect();
            if neighbors.is_empty() {
                continue;
            }
            kappa_i = kappa_i.max(voc_curvature(objective, Choice::new(i, a), &neighbors)?.value);
        }
    }
    let alpha_bar = alphas.iter().copied().max().unwrap_or(0);
    let rho_value = rho(kappa_i, alpha_bar);
    // per trial: sum_i mean_t voc(a_i; N*_i), then averaged over trials
    let mut voc_star = 0.0;
    for w in windows {
        let trace: Vec<JointAssignment> = w.iter().map(|r| r.actions.clone()).collect();
        for i in 0..n {
            let (_, total) = brute_force_neighborhood(objective, i, &trace, &coordination[i], alphas[i])?;
            voc_star += total / trace.len() as f64;
        }
    }
    voc_star /= windows.len() as f64;
    let apriori = if f_opt > 0.0 {
        (1.0 - kappa_f) + kappa_f * (1.0 - kappa_f) * rho_value * voc_star / f_opt
    } else {
        1.0
    };
    report.kappa_i = Some(kappa_i);
    report.rho = Some(rho_value);
    report.f_opt = Some(f_opt);
    report.apriori_lb = Some(apriori);
    report.holds = Some(empirical_mean_f >= asymptotic_lb * f_opt - 0.05 * f_opt);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coordination::{AgentSetup, Anaconda, NeighborPolicy};
    use crate::objective::CoverageObjective;
    use crate::timing::DelayModel;

    #[test]
    fn rho_examples() {
        assert_eq!(rho(0.0, 3), 1.0);
        assert!((rho(1e-9, 7) - 1.0).abs() < 1e-6);
        assert_eq!(rho(1.0, 1), 1.0);
        assert!((rho(1.0, 1_000_000) - (1.0 - (-1f64).exp())).abs() < 1e-5);
        // kappa = 1/2, alpha = 2: (1 - 0.75^2) / 0.5
        assert!((rho(0.5, 2) - 0.875).abs() < 1e-15);
    }

    #[test]
    fn voc_curvature_extremes() {
        // neighbors 1 and 2 overlap agent 0 on disjoint parts: modular VoC
        let f = CoverageObjective::from_sets(vec![vec![vec![0, 1, 2]], vec![vec![0]], vec![vec![2]], vec![vec![0]]], 3, 1.0)
            .unwrap();
        let me = Choice::new(0, 0);
        let v = voc_curvature(&f, me, &[Choice::new(1, 0), Choice::new(2, 0)]).unwrap();
        assert_eq!(v, VocCurvature { value: 0.0, degenerate: false });
        let v = voc_curvature(&f, me, &[Choice::new(1, 0), Choice::new(3, 0)]).unwrap();
        assert_eq!(v.value, 1.0);
        let g = CoverageObjective::from_sets(vec![vec![vec![0]], vec![vec![1]]], 2, 1.0).unwrap();
        assert!(voc_curvature(&g, Choice::new(0, 0), &[Choice::new(1, 0)]).unwrap().degenerate);
    }

    #[test]
    fn voc_curvature_matches_direct_formula() {
        let f = CoverageObjective::from_sets(
            vec![
                vec![vec![0, 1, 2, 3, 4]],
                vec![vec![0, 1, 6]],
                vec![vec![1, 2]],
                vec![vec![3, 7]],
                vec![vec![8]],
            ],
            9,
            1.0,
        )
        .unwrap();
        let me = Choice::new(0, 0);
        let ns: Vec<Choice> = (1..5).map(|j| Choice::new(j, 0)).collect();
        // voc(all) = |{0,1,2,3}| = 4; voc singletons 2, 2, 1, 0 (skipped)
        // drop 1: {1,2,3} -> 3, ratio 1/2; drop 2: {0,1,3} -> 3, ratio 1/2; drop 3: 3, ratio 1
        let v = voc_curvature(&f, me, &ns).unwrap();
        assert!((v.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn brute_force_opt_examples() {
        let single = CoverageObjective::from_sets(vec![vec![vec![0], vec![0, 1], vec![1]]], 2, 1.0).unwrap();
        let (a, v) = brute_force_opt(&single).unwrap();
        assert_eq!((a.action_of(0), v), (Some(1), 2.0));
        let f = CoverageObjective::from_sets(
            vec![vec![vec![0, 1], vec![2]], vec![vec![0, 1], vec![3]], vec![vec![2], vec![0, 4]]],
            5,
            1.0,
        )
        .unwrap();
        let (a, v) = brute_force_opt(&f).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(a, JointAssignment::from_actions(&[0, 1, 0]));
        let mut second: (Vec<usize>, f64) = (vec![], -1.0);
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    let v = f.value(JointAssignment::from_actions(&[x, y, z]).choices());
                    if v > second.1 {
                        second = (vec![x, y, z], v);
                    }
                }
            }
        }
        assert_eq!(JointAssignment::from_actions(&second.0), a);
        let big = CoverageObjective::from_sets(vec![vec![vec![0]; 100]; 4], 1, 1.0).unwrap();
        assert!(matches!(brute_force_opt(&big), Err(Error::Capacity { .. })));
    }

    #[test]
    fn neighborhood_search_examples() {
        let f = CoverageObjective::from_sets(
            vec![vec![vec![0, 1, 2]], vec![vec![0]], vec![vec![1, 2]], vec![vec![5]]],
            6,
            1.0,
        )
        .unwrap();
        let trace = vec![JointAssignment::from_actions(&[0, 0, 0, 0]); 3];
        assert_eq!(brute_force_neighborhood(&f, 0, &trace, &[1, 2, 3], 1).unwrap(), (vec![2], 6.0));
        assert_eq!(brute_force_neighborhood(&f, 0, &trace, &[1, 2, 3], 5).unwrap(), (vec![1, 2, 3], 9.0));
        // no overlap at all: smallest subset wins the tie
        assert_eq!(brute_force_neighborhood(&f, 3, &trace, &[0, 1, 2], 1).unwrap(), (vec![], 0.0));
    }

    #[test]
    fn beta_of_lone_agent_is_one() {
        let f = CoverageObjective::from_sets(vec![vec![vec![0], vec![0, 1]]], 2, 1.0).unwrap();
        let setup = [AgentSetup {
            action_count: 2,
            coordination: vec![],
            alpha: 0,
            policy: NeighborPolicy::Learned,
        }];
        let mut team = Anaconda::new(&f, &setup, 50, DelayModel::ZERO, 1, 0).unwrap();
        let h: Vec<RoundRecord> = (0..50).map(|_| team.step(&f).unwrap()).collect();
        assert_eq!(compute_beta(&h).unwrap(), 1.0);
        assert!(compute_beta(&h[..0]).is_err());
    }

    #[test]
    fn full_overlap_gives_zero_beta_and_unit_bound() {
        assert_eq!(asymptotic_bound(0.7, 0.0), 1.0);
        assert_eq!(asymptotic_bound(1.0, 1.0), 0.5);
        assert_eq!(asymptotic_bound(0.2, 5.0), 0.8);
    }

    #[test]
    fn bounds_on_a_centralized_micro_team() {
        let f = CoverageObjective::from_sets(
            vec![
                vec![vec![0, 1, 2], vec![3, 4]],
                vec![vec![2, 3], vec![5, 6, 7]],
                vec![vec![0, 7], vec![8]],
            ],
            9,
            1.0,
        )
        .unwrap();
        let coordination: Vec<Vec<usize>> = (0..3).map(|i| (0..3).filter(|&j| j != i).collect()).collect();
        let setups: Vec<AgentSetup> = coordination
            .iter()
            .map(|m| AgentSetup {
                action_count: 2,
                coordination: m.clone(),
                alpha: 2,
                policy: NeighborPolicy::Learned,
            })
            .collect();
        let mut team = Anaconda::new(&f, &setups, 4000, DelayModel::ZERO, 11, 0).unwrap();
        let h: Vec<RoundRecord> = (0..4000).map(|_| team.step(&f).unwrap()).collect();
        let report = evaluate_bounds(&f, &[&h], &coordination, &[2; 3], BoundScope { exhaustive: true }).unwrap();
        let f_opt = report.f_opt.unwrap();
        assert_eq!(f_opt, 7.0);
        assert!(report.empirical_mean_f >= f_opt / (1.0 + report.kappa_f) - 0.05 * f_opt);
        assert_eq!(report.holds, Some(true));
        assert!(report.asymptotic_lb > 0.0 && report.asymptotic_lb <= 1.0);
        let rho = report.rho.unwrap();
        assert!((1.0 - (-1f64).exp()..=1.0).contains(&rho));
    }
}

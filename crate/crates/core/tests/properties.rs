use anaconda_core::analysis::{asymptotic_bound, brute_force_opt, rho};
use anaconda_core::bandit::Exp3;
use anaconda_core::benchmarks::{dfs_order, dfs_sg_run, CommGraph, SgTiming};
use anaconda_core::coordination::{AgentSetup, Anaconda, NeighborPolicy};
use anaconda_core::objective::{
    check_monotone, check_submodular, check_voc_shape, curvature, ground_set, voc, Choice, CoverageObjective,
    JointAssignment, Objective, MAX_AUDIT_UNIVERSE,
};
use anaconda_core::timing::{anaconda_round_time, budget_to_rounds, DelayModel};
use proptest::prelude::*;

/// Random set-cover instances: up to 4 agents, 4 actions each, 24 elements.
fn instance() -> impl Strategy<Value = CoverageObjective> {
    (1usize..=4, 1usize..=4, 4usize..=24).prop_flat_map(|(n, k, u)| {
        let set = proptest::collection::vec(0..u, 0..=u);
        proptest::collection::vec(proptest::collection::vec(set, k), n)
            .prop_map(move |sets| CoverageObjective::from_sets(sets, u, 1.0).unwrap())
    })
}

fn complete(n: usize) -> CommGraph {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    CommGraph::new(n, &edges).unwrap()
}

fn learned_team(f: &CoverageObjective, alpha: usize, horizon: u64, seed: u64) -> Anaconda {
    let n = f.agent_count();
    let setups: Vec<AgentSetup> = (0..n)
        .map(|i| AgentSetup {
            action_count: f.action_count(i),
            coordination: (0..n).filter(|&j| j != i).collect(),
            alpha,
            policy: NeighborPolicy::Learned,
        })
        .collect();
    Anaconda::new(f, &setups, horizon, DelayModel::new(0.01, 0.02).unwrap(), seed, 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exp3_distribution_stays_valid(
        k in 1usize..12,
        horizon in 1u64..5000,
        plays in proptest::collection::vec((0usize..12, 0.0f64..=1.0), 0..200),
    ) {
        let mut b = Exp3::new(k, horizon).unwrap();
        for (arm, r) in plays {
            b.update(arm % k, r).unwrap();
            let p = b.distribution();
            let total: f64 = p.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(p.probs().iter().all(|&q| q > 0.0 && q.is_finite()));
        }
    }

    #[test]
    fn exp3_full_reward_is_neutral_and_loss_lowers_the_arm(
        k in 2usize..10,
        arm in 0usize..10,
        r in 0.0f64..0.99,
    ) {
        let arm = arm % k;
        let mut b = Exp3::new(k, 100).unwrap();
        let before = b.distribution().probs().to_vec();
        b.update(arm, 1.0).unwrap();
        let same = b.distribution().probs().to_vec();
        for (x, y) in before.iter().zip(&same) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        b.update(arm, r).unwrap();
        prop_assert!(b.distribution().probs()[arm] < before[arm]);
    }

    #[test]
    fn exp3_rejects_unknown_arm(k in 1usize..8) {
        let mut b = Exp3::new(k, 10).unwrap();
        prop_assert!(b.update(k, 0.5).is_err());
    }

    #[test]
    fn coverage_is_normalized_monotone_submodular(f in instance()) {
        prop_assert_eq!(f.value(&[]), 0.0);
        let all = ground_set(&f);
        let ground = &all[..all.len().min(MAX_AUDIT_UNIVERSE)];
        prop_assert!(check_monotone(&f, ground).unwrap().is_none());
        prop_assert!(check_submodular(&f, ground).unwrap().is_none());
        prop_assert!(f.value(&all) <= f.total() + 1e-9);
    }

    #[test]
    fn voc_is_bounded_monotone_submodular(f in instance(), actions in proptest::collection::vec(0usize..4, 4)) {
        prop_assume!(f.agent_count() >= 2);
        let k = f.action_count(0);
        let item = Choice::new(0, actions[0] % k);
        let others: Vec<Choice> = (1..f.agent_count())
            .map(|j| Choice::new(j, actions[j] % f.action_count(j)))
            .collect();
        let v = voc(&f, item, &JointAssignment::from_choices(others.clone()).unwrap()).unwrap();
        prop_assert!(v >= 0.0 && v <= f.value(&[item]) + 1e-12);
        let every: Vec<Choice> = ground_set(&f)
            .into_iter()
            .filter(|c| c.agent != 0)
            .take(MAX_AUDIT_UNIVERSE)
            .collect();
        prop_assert!(check_voc_shape(&f, item, &every).unwrap().is_none());
    }

    #[test]
    fn rho_lies_between_one_minus_inverse_e_and_one(kappa in 0.0f64..=1.0, alpha in 0usize..200) {
        let r = rho(kappa, alpha);
        prop_assert!(r >= 1.0 - (-1f64).exp() - 1e-12 && r <= 1.0 + 1e-12);
        prop_assert!(rho(kappa, alpha + 1) <= r + 1e-12);
    }

    #[test]
    fn asymptotic_bound_dominates_both_terms(kappa in 0.0f64..=1.0, beta in 0.0f64..20.0) {
        let b = asymptotic_bound(kappa, beta);
        prop_assert!(b >= 1.0 - kappa && b >= 1.0 / (1.0 + beta * kappa));
        prop_assert!(b <= 1.0);
    }

    #[test]
    fn round_time_grows_with_bandwidth(alpha in 0usize..50, tf in 0.0f64..1.0, tc in 0.0f64..1.0) {
        let m = DelayModel::new(tf, tc).unwrap();
        let t = anaconda_round_time(alpha, m);
        prop_assert!((t - (tf * (2 * alpha + 3) as f64 + tc)).abs() < 1e-12);
        prop_assert!(anaconda_round_time(alpha + 1, m) >= t);
    }

    #[test]
    fn budget_rounds_fit_and_are_maximal(budget in 0.0f64..1e4, per in 1e-3f64..10.0) {
        let r = budget_to_rounds(budget, per).unwrap();
        prop_assert!(r as f64 * per <= budget * (1.0 + 1e-8));
        prop_assert!((r + 1) as f64 * per > budget);
        prop_assert!(budget_to_rounds(budget * 2.0, per).unwrap() >= r);
    }

    #[test]
    fn dfs_visits_everyone_once(n in 1usize..12, extra in proptest::collection::vec((0usize..12, 0usize..12), 0..30)) {
        // a path keeps the graph strongly connected; extra edges are arbitrary
        let mut edges: Vec<(usize, usize)> = (1..n).flat_map(|i| [(i - 1, i), (i, i - 1)]).collect();
        edges.extend(extra.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b));
        let g = CommGraph::new(n, &edges).unwrap();
        let o = dfs_order(&g, 0).unwrap();
        let mut seen = o.order.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn sequential_greedy_meets_curvature_bound(f in instance()) {
        let n = f.agent_count();
        let (_, opt) = brute_force_opt(&f).unwrap();
        let out = dfs_sg_run(&f, &complete(n), SgTiming { delays: DelayModel::ZERO, count_computation: true }).unwrap();
        prop_assert!(out.f_value >= opt / 2.0 - 1e-9);
        if let Ok(kappa) = curvature(&f, &ground_set(&f)) {
            prop_assert!(out.f_value >= opt / (1.0 + kappa) - 1e-9);
        }
        prop_assert!(out.f_value <= opt + 1e-9);
    }

    #[test]
    fn anaconda_rounds_respect_constraints(f in instance(), alpha in 0usize..4, seed in any::<u64>()) {
        let n = f.agent_count();
        let coordination: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        let alphas = vec![alpha; n];
        let mut team = learned_team(&f, alpha, 40, seed);
        let mut twin = learned_team(&f, alpha, 40, seed);
        let reversed: Vec<usize> = (0..n).rev().collect();
        let mut clock = 0.0;
        for _ in 0..40 {
            let r = team.step(&f).unwrap();
            let s = twin.step_in_order(&f, &reversed).unwrap();
            prop_assert_eq!(&r, &s);
            r.check_constraints(&alphas, &coordination).unwrap();
            prop_assert!(r.charged_evaluations.iter().all(|&c| c as usize == 2 * alpha + 3));
            prop_assert!(r.action_rewards.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!(r.sim_time > clock);
            clock = r.sim_time;
            prop_assert!((r.f_value - f.value(r.actions.choices())).abs() < 1e-12);
        }
    }
}

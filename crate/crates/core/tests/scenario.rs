use anaconda_core::objective::{JointAssignment, Objective};
use anaconda_core::scenario::{
    build_instance, preset, preset_with, run_experiment, run_trial, Algorithm, ExperimentOptions, TrialOptions,
};

fn overrides(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

#[test]
fn urban_block_pattern_covers_78_5_percent() {
    let inst = build_instance(&preset("urban").unwrap().variants[0].config, 0).unwrap();
    let area = inst.interest_area();
    // left camera of each block looks north-east into it, right camera south-west
    let pattern = JointAssignment::from_actions(&[2, 10, 2, 10, 2, 10, 2, 10]);
    let mirrored = JointAssignment::from_actions(&[14, 6, 14, 6, 14, 6, 14, 6]);
    for a in [pattern, mirrored] {
        let pct = 100.0 * inst.objective.value(a.choices()) / area;
        assert!((pct - 78.5).abs() < 1e-9, "{pct}");
    }
    // everyone facing north leaves the lower half of each block dark
    let north = JointAssignment::from_actions(&[4; 8]);
    let pct = 100.0 * inst.objective.value(north.choices()) / area;
    assert!(pct < 78.5, "{pct}");
}

#[test]
fn short_urban_run_is_consistent() {
    let e = preset_with("urban", &overrides(&["trials=2", "horizon.rounds=200"])).unwrap();
    let options = ExperimentOptions {
        jobs: 2,
        trial: TrialOptions { bounds: false, ..Default::default() },
    };
    let r = run_experiment(&e, &options).unwrap();
    assert_eq!(r.variants.len(), 1);
    let v = &r.variants[0];
    assert_eq!(v.algorithms.len(), 3);
    for a in &v.algorithms {
        assert_eq!(a.trials.len(), 2);
        for t in &a.trials {
            assert_eq!(t.series.len(), 200);
            assert!(t.audit.unwrap().exact());
            for row in &t.series {
                assert!((0.0..=100.0).contains(&row.coverage_pct));
            }
            let s = t.summary.unwrap();
            assert!(s.min <= s.mean && s.mean <= s.max && s.max <= 78.5 + 1e-9);
        }
        // the per-trial runs are reproducible on their own
        let again = run_trial(&v.config, a.algorithm, 1, &TrialOptions::default()).unwrap();
        assert_eq!(again.series, a.trials[1].series);
    }
    assert!(v.algorithm(Algorithm::Anaconda).is_some());
}

#[test]
fn different_trials_see_different_randomness() {
    let e = preset_with("urban", &overrides(&["horizon.rounds=100"])).unwrap();
    let c = &e.variants[0].config;
    let opts = TrialOptions::default();
    let a = run_trial(c, Algorithm::Anaconda, 0, &opts).unwrap();
    let b = run_trial(c, Algorithm::Anaconda, 1, &opts).unwrap();
    assert_ne!(a.series, b.series);
}

#[test]
fn scalability_budget_shapes_round_counts() {
    let e = preset_with("scalability", &overrides(&["trials=1"])).unwrap();
    let opts = TrialOptions::default();
    let mut bsg_rounds = Vec::new();
    for v in &e.variants {
        let a = run_trial(&v.config, Algorithm::Anaconda, 0, &opts).unwrap();
        // alpha 5 at 0.01 s per evaluation plus 0.01 s per message: 0.14 s
        assert_eq!(a.rounds_completed, 2142);
        assert!((a.round_seconds - 0.14).abs() < 1e-12);
        let b = run_trial(&v.config, Algorithm::DfsBsg, 0, &opts).unwrap();
        assert!(b.round_seconds * b.rounds_completed as f64 <= 300.0 + 1e-9);
        bsg_rounds.push(b.rounds_completed);
    }
    assert!(bsg_rounds.windows(2).all(|w| w[1] < w[0]), "{bsg_rounds:?}");
}

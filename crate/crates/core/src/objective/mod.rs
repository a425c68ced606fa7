//! Set-function objectives over agent actions.
//!
//! An objective maps any collection of `(agent, action)` pairs to a
//! nonnegative value. Multi-agent coordination only ever evaluates joint
//! assignments (one action per agent), but curvature and the exhaustive
//! property audits treat every pair in `V_N` as a ground-set element, so the
//! trait accepts arbitrary slices.

mod audit;
mod coverage;

pub use audit::{
    check_monotone, check_second_order_submodular, check_submodular, check_voc_shape, SecondOrderWitness,
    SubmodularWitness, VocWitness, MAX_AUDIT_UNIVERSE,
};
pub use coverage::{coverage_cells, CameraSpec, CoverageObjective, CoverageWorld, Interest};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One agent playing one action (an element of `V_N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Choice {
    pub agent: usize,
    pub action: usize,
}

impl Choice {
    pub const fn new(agent: usize, action: usize) -> Self {
        Choice { agent, action }
    }
}

/// Actions of a subset of agents, at most one per agent, kept sorted by agent id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointAssignment {
    entries: Vec<Choice>,
}

impl JointAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an assignment from pairs, rejecting a repeated agent.
    pub fn from_choices(choices: impl IntoIterator<Item = Choice>) -> Result<Self> {
        let mut out = Self::new();
        for c in choices {
            out.insert(c)?;
        }
        Ok(out)
    }

    /// `actions[i]` is agent `i`'s action.
    pub fn from_actions(actions: &[usize]) -> Self {
        JointAssignment {
            entries: actions.iter().enumerate().map(|(agent, &action)| Choice { agent, action }).collect(),
        }
    }

    pub fn insert(&mut self, choice: Choice) -> Result<()> {
        match self.entries.binary_search_by_key(&choice.agent, |c| c.agent) {
            Ok(_) => Err(Error::invalid(format!("agent {} already assigned", choice.agent))),
            Err(pos) => {
                self.entries.insert(pos, choice);
                Ok(())
            }
        }
    }

    pub fn with(&self, choice: Choice) -> Result<Self> {
        let mut out = self.clone();
        out.insert(choice)?;
        Ok(out)
    }

    pub fn action_of(&self, agent: usize) -> Option<usize> {
        self.entries
            .binary_search_by_key(&agent, |c| c.agent)
            .ok()
            .map(|i| self.entries[i].action)
    }

    pub fn contains_agent(&self, agent: usize) -> bool {
        self.action_of(agent).is_some()
    }

    pub fn choices(&self) -> &[Choice] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks agent and action indices against an objective.
    pub fn validate<O: Objective + ?Sized>(&self, objective: &O) -> Result<()> {
        for c in &self.entries {
            if c.agent >= objective.agent_count() {
                return Err(Error::invalid(format!("agent {} out of range", c.agent)));
            }
            if c.action >= objective.action_count(c.agent) {
                return Err(Error::invalid(format!(
                    "action {} out of range for agent {}",
                    c.action, c.agent
                )));
            }
        }
        Ok(())
    }
}

/// A normalized, monotone, submodular set function over agent actions.
///
/// Implementations must be pure: the same slice always yields the same
/// value, and `value(&[]) == 0`.
pub trait Objective: Sync {
    fn agent_count(&self) -> usize;

    fn action_count(&self, agent: usize) -> usize;

    fn value(&self, items: &[Choice]) -> f64;

    /// Largest singleton value of `agent`; bandit rewards are divided by it.
    fn normalizer(&self, agent: usize) -> f64 {
        (0..self.action_count(agent))
            .map(|a| self.value(&[Choice::new(agent, a)]))
            .fold(0.0, f64::max)
    }

    /// Upper bound on `value`, used to express results as percentages.
    fn total(&self) -> f64;
}

impl<O: Objective + ?Sized> Objective for &O {
    fn agent_count(&self) -> usize {
        (**self).agent_count()
    }
    fn action_count(&self, agent: usize) -> usize {
        (**self).action_count(agent)
    }
    fn value(&self, items: &[Choice]) -> f64 {
        (**self).value(items)
    }
    fn normalizer(&self, agent: usize) -> f64 {
        (**self).normalizer(agent)
    }
    fn total(&self) -> f64 {
        (**self).total()
    }
}

pub fn eval<O: Objective + ?Sized>(objective: &O, assignment: &JointAssignment) -> f64 {
    objective.value(assignment.choices())
}

fn with_item(context: &[Choice], item: Choice) -> Vec<Choice> {
    let mut v = Vec::with_capacity(context.len() + 1);
    v.extend_from_slice(context);
    v.push(item);
    v
}

/// `f(a | context) = f(context + a) - f(context)`.
pub fn marginal_gain<O: Objective + ?Sized>(objective: &O, item: Choice, context: &JointAssignment) -> Result<f64> {
    if context.contains_agent(item.agent) {
        return Err(Error::invalid(format!("agent {} already in context", item.agent)));
    }
    Ok(marginal_of(objective, item, context.choices()))
}

pub(crate) fn marginal_of<O: Objective + ?Sized>(objective: &O, item: Choice, context: &[Choice]) -> f64 {
    let gain = objective.value(&with_item(context, item)) - objective.value(context);
    gain.max(0.0)
}

/// Value of coordination `f(a) - f(a | neighbors)`: how much of the agent's
/// own contribution its neighbors' actions already account for.
pub fn voc<O: Objective + ?Sized>(objective: &O, item: Choice, neighbors: &JointAssignment) -> Result<f64> {
    if neighbors.contains_agent(item.agent) {
        return Err(Error::invalid(format!("agent {} is among its own neighbors", item.agent)));
    }
    Ok(voc_of(objective, item, neighbors.choices()))
}

pub(crate) fn voc_of<O: Objective + ?Sized>(objective: &O, item: Choice, neighbors: &[Choice]) -> f64 {
    if neighbors.is_empty() {
        return 0.0;
    }
    let alone = objective.value(&[item]);
    (alone - marginal_of(objective, item, neighbors)).max(0.0)
}

/// Total curvature `1 - min_v [f(V) - f(V - v)] / f(v)` over `ground`.
///
/// Elements with `f(v) = 0` are skipped; if every element is skipped the
/// function carries no curvature information and an error is returned.
pub fn curvature<O: Objective + ?Sized>(objective: &O, ground: &[Choice]) -> Result<f64> {
    curvature_of(ground.len(), |mask| {
        let items: Vec<Choice> = ground.iter().enumerate().filter(|(i, _)| mask(*i)).map(|(_, c)| *c).collect();
        objective.value(&items)
    })
}

/// Curvature of a set function given as a membership-predicate evaluator over
/// `n` ground elements. Shared by `curvature` and the VoC curvature.
pub(crate) fn curvature_of(n: usize, mut value: impl FnMut(&dyn Fn(usize) -> bool) -> f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Degenerate("empty ground set".into()));
    }
    let full = value(&|_| true);
    let mut min_ratio = f64::INFINITY;
    for v in 0..n {
        let single = value(&|i| i == v);
        if single <= 0.0 {
            continue;
        }
        let without = value(&|i| i != v);
        min_ratio = min_ratio.min((full - without) / single);
    }
    if !min_ratio.is_finite() {
        return Err(Error::Degenerate("every singleton has zero value".into()));
    }
    Ok((1.0 - min_ratio).clamp(0.0, 1.0))
}

/// Every `(agent, action)` pair of the objective, agent-major.
pub fn ground_set<O: Objective + ?Sized>(objective: &O) -> Vec<Choice> {
    (0..objective.agent_count())
        .flat_map(|agent| (0..objective.action_count(agent)).map(move |action| Choice { agent, action }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(agent_sets: Vec<Vec<Vec<usize>>>, universe: usize) -> CoverageObjective {
        CoverageObjective::from_sets(agent_sets, universe, 1.0).unwrap()
    }

    #[test]
    fn assignment_rejects_repeated_agent() {
        let mut a = JointAssignment::new();
        a.insert(Choice::new(2, 0)).unwrap();
        a.insert(Choice::new(0, 1)).unwrap();
        assert!(a.insert(Choice::new(2, 1)).is_err());
        assert_eq!(a.choices(), &[Choice::new(0, 1), Choice::new(2, 0)]);
        assert_eq!(a.action_of(2), Some(0));
        assert_eq!(a.action_of(1), None);
    }

    #[test]
    fn validate_catches_out_of_range_action() {
        let f = sets(vec![vec![vec![0]], vec![vec![1], vec![2]]], 3);
        assert!(JointAssignment::from_actions(&[0, 1]).validate(&f).is_ok());
        assert!(JointAssignment::from_actions(&[0, 2]).validate(&f).is_err());
        assert!(JointAssignment::from_actions(&[0, 0, 0]).validate(&f).is_err());
    }

    #[test]
    fn empty_assignment_is_zero() {
        let f = sets(vec![vec![vec![0, 1]], vec![vec![1, 2]]], 3);
        assert_eq!(eval(&f, &JointAssignment::new()), 0.0);
    }

    #[test]
    fn marginal_gain_from_empty_is_singleton_value() {
        let f = sets(vec![vec![vec![0, 1, 2]], vec![vec![2, 3]]], 4);
        let g = marginal_gain(&f, Choice::new(0, 0), &JointAssignment::new()).unwrap();
        assert_eq!(g, 3.0);
    }

    #[test]
    fn marginal_gain_zero_under_full_overlap() {
        let f = sets(vec![vec![vec![1, 2]], vec![vec![0, 1, 2, 3]]], 4);
        let ctx = JointAssignment::from_choices([Choice::new(1, 0)]).unwrap();
        assert_eq!(marginal_gain(&f, Choice::new(0, 0), &ctx).unwrap(), 0.0);
    }

    #[test]
    fn marginal_gain_rejects_agent_in_context() {
        let f = sets(vec![vec![vec![0], vec![1]]], 2);
        let ctx = JointAssignment::from_choices([Choice::new(0, 1)]).unwrap();
        assert!(marginal_gain(&f, Choice::new(0, 0), &ctx).is_err());
        assert!(voc(&f, Choice::new(0, 0), &ctx).is_err());
    }

    #[test]
    fn voc_extremes() {
        let f = sets(vec![vec![vec![1, 2]], vec![vec![0, 1, 2, 3]], vec![vec![5]]], 6);
        let a = Choice::new(0, 0);
        assert_eq!(voc(&f, a, &JointAssignment::new()).unwrap(), 0.0);
        let covering = JointAssignment::from_choices([Choice::new(1, 0)]).unwrap();
        assert_eq!(voc(&f, a, &covering).unwrap(), 2.0);
        let disjoint = JointAssignment::from_choices([Choice::new(2, 0)]).unwrap();
        assert_eq!(voc(&f, a, &disjoint).unwrap(), 0.0);
    }

    #[test]
    fn curvature_of_modular_and_duplicated_functions() {
        let modular = sets(vec![vec![vec![0, 1]], vec![vec![2]], vec![vec![3, 4, 5]]], 6);
        assert_eq!(curvature(&modular, &ground_set(&modular)).unwrap(), 0.0);

        let dup = sets(vec![vec![vec![0, 1]], vec![vec![0, 1]]], 2);
        assert_eq!(curvature(&dup, &ground_set(&dup)).unwrap(), 1.0);
    }

    #[test]
    fn curvature_skips_zero_singletons_and_rejects_all_zero() {
        let f = sets(vec![vec![vec![0, 1]], vec![vec![]]], 2);
        assert_eq!(curvature(&f, &ground_set(&f)).unwrap(), 0.0);
        let z = sets(vec![vec![vec![]], vec![vec![]]], 2);
        assert!(matches!(curvature(&z, &ground_set(&z)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn curvature_matches_direct_formula_on_fixed_instance() {
        // ground: {0,1,2,3}, {2,3,4}, {4,5}, {0}
        let f = sets(vec![vec![vec![0, 1, 2, 3], vec![2, 3, 4]], vec![vec![4, 5], vec![0]]], 6);
        // f(V) = 6. Removing {0,1,2,3}: {2,3,4,5,0} = 5 -> ratio 1/4.
        // Removing {2,3,4}: 6 -> 0/3. Removing {4,5}: 5 -> 1/2. Removing {0}: 6 -> 0.
        assert_eq!(curvature(&f, &ground_set(&f)).unwrap(), 1.0);
        let sub = [Choice::new(0, 0), Choice::new(1, 0)];
        // f = 6; drop first: {4,5}=2 -> 4/4; drop second: 4 -> 2/2 -> kappa 0.
        assert_eq!(curvature(&f, &sub).unwrap(), 0.0);
        let sub = [Choice::new(0, 0), Choice::new(0, 1)];
        // {0..4} = 5; drop first -> 3, ratio 2/4; drop second -> 4, ratio 1/3.
        assert!((curvature(&f, &sub).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }
}

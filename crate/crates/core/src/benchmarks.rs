//! Baselines: nearest and random neighbors for action selection, and the
//! sequential greedy algorithms run over a depth-first ordering of the
//! communication graph, with full information (DFS-SG) or bandit feedback
//! (DFS-BSG).

use crate::bandit::Exp3;
use crate::coordination::RoundRecord;
use crate::error::{Error, Result};
use crate::objective::{marginal_of, Choice, JointAssignment, Objective};
use crate::rng::{agent_stream, Role, Stream};
use crate::timing::{sequential_communication_time, DelayModel};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// The `alpha` members of `candidates` closest to `positions[agent]`,
/// ties to the lower id. Returned sorted by id.
pub fn nearest_neighbors(positions: &[[f64; 2]], agent: usize, candidates: &[usize], alpha: usize) -> Vec<usize> {
    let p = positions[agent];
    let d2 = |j: usize| {
        let q = positions[j];
        (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)
    };
    let mut c = candidates.to_vec();
    c.sort_by(|&a, &b| d2(a).total_cmp(&d2(b)).then(a.cmp(&b)));
    c.truncate(alpha);
    c.sort_unstable();
    c
}

/// `alpha` distinct members drawn uniformly, or all of them if there are
/// not more than `alpha`. Returned sorted by id.
pub fn random_neighbors<R: Rng + ?Sized>(candidates: &[usize], alpha: usize, rng: &mut R) -> Vec<usize> {
    if alpha >= candidates.len() {
        return candidates.to_vec();
    }
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, candidates.len(), alpha)
        .into_iter()
        .map(|k| candidates[k])
        .collect();
    picked.sort_unstable();
    picked
}

/// Directed communication graph; an edge `j -> i` means `j` can send to `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommGraph {
    out: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut out = vec![Vec::new(); node_count];
        for &(from, to) in edges {
            if from >= node_count || to >= node_count {
                return Err(Error::invalid(format!("edge {from}->{to} outside {node_count} nodes")));
            }
            if from == to {
                return Err(Error::invalid(format!("self-loop at {from}")));
            }
            out[from].push(to);
        }
        for o in &mut out {
            o.sort_unstable();
            o.dedup();
        }
        Ok(CommGraph { out })
    }

    /// Edges `j -> i` for every `j` in agent `i`'s coordination neighborhood.
    pub fn from_coordination(coordination: &[Vec<usize>]) -> Result<Self> {
        let edges: Vec<(usize, usize)> = coordination
            .iter()
            .enumerate()
            .flat_map(|(i, m)| m.iter().map(move |&j| (j, i)))
            .collect();
        Self::new(coordination.len(), &edges)
    }

    /// Both directions for every listed pair.
    pub fn undirected(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let both: Vec<(usize, usize)> = edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        Self::new(node_count, &both)
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out[from].binary_search(&to).is_ok()
    }

    /// Hop distances from `source`; `None` where unreachable.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.out.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.out[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.out.len();
        if n == 0 {
            return false;
        }
        if self.distances_from(0).iter().any(Option::is_none) {
            return false;
        }
        let mut reverse = vec![Vec::new(); n];
        for (u, o) in self.out.iter().enumerate() {
            for &v in o {
                reverse[v].push(u);
            }
        }
        CommGraph { out: reverse }.distances_from(0).iter().all(Option::is_some)
    }
}

/// Action-selection order and the hop count of each hand-off.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfsOrder {
    pub order: Vec<usize>,
    /// `hops[k]` is the shortest-path distance from `order[k]` to `order[k+1]`.
    pub hops: Vec<usize>,
}

impl DfsOrder {
    /// Position of each agent in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (k, &i) in self.order.iter().enumerate() {
            pos[i] = k;
        }
        pos
    }
}

/// Depth-first preorder from `root`, children in ascending id.
pub fn dfs_order(graph: &CommGraph, root: usize) -> Result<DfsOrder> {
    let n = graph.node_count();
    if root >= n {
        return Err(Error::invalid(format!("root {root} outside {n} nodes")));
    }
    if !graph.is_strongly_connected() {
        return Err(Error::Connectivity(
            "sequential algorithms need a strongly connected communication graph".into(),
        ));
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        if visited[u] {
            continue;
        }
        visited[u] = true;
        order.push(u);
        for &v in graph.out_neighbors(u).iter().rev() {
            if !visited[v] {
                stack.push(v);
            }
        }
    }
    let hops = order
        .windows(2)
        .map(|w| graph.distances_from(w[0])[w[1]].expect("strongly connected"))
        .collect();
    Ok(DfsOrder { order, hops })
}

/// The adversarial family for sequential hand-offs: a directed path
/// `0 -> 1 -> ... -> l-1`, an edge `l-1 -> 0`, and the remaining agents
/// reachable only from 0 and returning only to 1. Every hand-off between two
/// of those extra agents travels the whole path.
pub fn broom_graph(n: usize, path_len: usize) -> Result<CommGraph> {
    if path_len < 2 || path_len > n {
        return Err(Error::invalid("path length must lie in [2, n]"));
    }
    let mut edges: Vec<(usize, usize)> = (0..path_len - 1).map(|i| (i, i + 1)).collect();
    edges.push((path_len - 1, 0));
    for leaf in path_len..n {
        edges.push((0, leaf));
        edges.push((leaf, 1));
    }
    CommGraph::new(n, &edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgTiming {
    pub delays: DelayModel,
    /// Charge one evaluation per candidate action.
    pub count_computation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgOutcome {
    pub assignment: JointAssignment,
    pub f_value: f64,
    pub order: DfsOrder,
    pub duration: f64,
}

/// Full-information sequential greedy: each agent in DFS order takes the
/// action with the largest marginal gain given its predecessors' actions.
pub fn dfs_sg_run<O: Objective + ?Sized>(objective: &O, graph: &CommGraph, timing: SgTiming) -> Result<SgOutcome> {
    if graph.node_count() != objective.agent_count() {
        return Err(Error::invalid("graph and objective disagree on the agent count"));
    }
    let order = dfs_order(graph, 0)?;
    let mut chosen: Vec<Choice> = Vec::with_capacity(order.order.len());
    let mut evaluations = 0usize;
    for &i in &order.order {
        let mut best = (0, f64::NEG_INFINITY);
        for a in 0..objective.action_count(i) {
            let g = marginal_of(objective, Choice::new(i, a), &chosen);
            if g > best.1 {
                best = (a, g);
            }
        }
        evaluations += objective.action_count(i);
        chosen.push(Choice::new(i, best.0));
    }
    let mut duration = sequential_communication_time(&order.hops, timing.delays);
    if timing.count_computation {
        duration += evaluations as f64 * timing.delays.tau_f;
    }
    let assignment = JointAssignment::from_choices(chosen)?;
    Ok(SgOutcome {
        f_value: objective.value(assignment.choices()),
        assignment,
        order,
        duration,
    })
}

/// Sequential greedy with bandit feedback: every agent runs Exp3 over its
/// actions, rewarded by its marginal gain given its predecessors in DFS order.
#[derive(Debug, Clone)]
pub struct DfsBsg {
    order: DfsOrder,
    bandits: Vec<Exp3>,
    rngs: Vec<Stream>,
    normalizers: Vec<f64>,
    round_seconds: f64,
    evaluations_charged: u32,
    round: u64,
    clock: f64,
}

impl DfsBsg {
    /// `computation_evaluations` is the per-round evaluation count charged,
    /// conventionally the largest action count plus two.
    pub fn new<O: Objective + ?Sized>(
        objective: &O,
        graph: &CommGraph,
        horizon: u64,
        delays: DelayModel,
        computation_evaluations: usize,
        master_seed: u64,
        trial: u64,
    ) -> Result<Self> {
        let n = objective.agent_count();
        if graph.node_count() != n {
            return Err(Error::invalid("graph and objective disagree on the agent count"));
        }
        let order = dfs_order(graph, 0)?;
        let round_seconds =
            computation_evaluations as f64 * delays.tau_f + sequential_communication_time(&order.hops, delays);
        Ok(DfsBsg {
            bandits: (0..n)
                .map(|i| Exp3::new(objective.action_count(i), horizon))
                .collect::<Result<_>>()?,
            rngs: (0..n)
                .map(|i| agent_stream(master_seed, trial, i, Role::SequentialBandit, 0))
                .collect(),
            normalizers: (0..n).map(|i| objective.normalizer(i)).collect(),
            order,
            round_seconds,
            evaluations_charged: computation_evaluations as u32,
            round: 0,
            clock: 0.0,
        })
    }

    /// The largest action count plus two.
    pub fn default_computation_evaluations<O: Objective + ?Sized>(objective: &O) -> usize {
        (0..objective.agent_count())
            .map(|i| objective.action_count(i))
            .max()
            .unwrap_or(0)
            + 2
    }

    pub fn order(&self) -> &DfsOrder {
        &self.order
    }

    pub fn round_time(&self) -> f64 {
        self.round_seconds
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn bandits(&self) -> &[Exp3] {
        &self.bandits
    }

    pub fn step<O: Objective + ?Sized>(&mut self, objective: &O) -> Result<RoundRecord> {
        let n = self.bandits.len();
        let actions: Vec<usize> = self
            .bandits
            .iter()
            .zip(&mut self.rngs)
            .map(|(b, r)| b.sample(r))
            .collect();
        let mut prefix: Vec<Choice> = Vec::with_capacity(n);
        let mut marginals = vec![0.0; n];
        let mut rewards = vec![0.0; n];
        let mut neighborhoods = vec![Vec::new(); n];
        for &i in &self.order.order {
            let c = Choice::new(i, actions[i]);
            let before = objective.value(&prefix);
            prefix.push(c);
            let after = objective.value(&prefix);
            marginals[i] = after - before;
            let b = self.normalizers[i];
            rewards[i] = if b > 0.0 { marginals[i] / b } else { 0.0 };
            let mut seen: Vec<usize> = prefix[..prefix.len() - 1].iter().map(|c| c.agent).collect();
            seen.sort_unstable();
            neighborhoods[i] = seen;
        }
        for i in 0..n {
            self.bandits[i].update(actions[i], rewards[i])?;
        }
        self.round += 1;
        self.clock += self.round_seconds;
        let joint = JointAssignment::from_actions(&actions);
        Ok(RoundRecord {
            round: self.round,
            f_value: objective.value(joint.choices()),
            actions: joint,
            picks: neighborhoods.clone(),
            neighborhoods,
            marginals,
            action_rewards: rewards,
            slot_rewards: vec![Vec::new(); n],
            evaluations: vec![2; n],
            charged_evaluations: vec![self.evaluations_charged; n],
            messages: self.order.hops.iter().sum(),
            round_seconds: self.round_seconds,
            sim_time: self.clock,
        })
    }
}

//! ANACONDA agents: action selection and neighbor selection, alternated once
//! per round in three synchronous phases (draw, exchange, feedback).

use crate::bandit::Exp3;
use crate::benchmarks::random_neighbors;
use crate::error::{Error, Result};
use crate::objective::{Choice, JointAssignment, Objective};
use crate::rng::{agent_stream, Role, Stream};
use crate::timing::{anaconda_round_time, evaluations_per_round, DelayModel};
use serde::{Deserialize, Serialize};

/// How an agent picks whom to listen to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborPolicy {
    /// Stacked Exp3 bandits over the coordination neighborhood.
    Learned,
    /// A fixed list, e.g. the nearest agents.
    Fixed(Vec<usize>),
    /// A fresh uniform subset every round.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSetup {
    pub action_count: usize,
    /// Agents able to transmit to this one.
    pub coordination: Vec<usize>,
    pub alpha: usize,
    pub policy: NeighborPolicy,
}

#[derive(Debug, Clone)]
pub struct AgentState {
    id: usize,
    action_bandit: Exp3,
    /// One per bandwidth slot, each over `coordination`. Empty when the
    /// coordination neighborhood is.
    neighbor_bandits: Vec<Exp3>,
    base_coordination: Vec<usize>,
    coordination: Vec<usize>,
    alpha: usize,
    policy: NeighborPolicy,
    normalizer: f64,
    horizon: u64,
    action_rng: Stream,
    slot_rngs: Vec<Stream>,
    random_rng: Stream,
    active: bool,
}

/// What one agent drew in the first phase.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Draw {
    pub action: usize,
    /// Listened-to agents in slot order; repeats possible for learned picks.
    pub chain: Vec<usize>,
    /// Arm index per slot, only for learned picks.
    arms: Vec<usize>,
}

/// Everything an agent knows when computing its rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalView {
    pub own: Choice,
    pub chain: Vec<usize>,
    /// One message per distinct agent in `chain`.
    pub received: Vec<Choice>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    /// `f(a | N)`, unnormalized.
    pub marginal: f64,
    pub action_reward: f64,
    /// Normalized VoC increment per chain slot.
    pub slot_rewards: Vec<f64>,
    pub voc: f64,
    pub evaluations: u32,
}

struct Counted<'a, O: ?Sized> {
    objective: &'a O,
    calls: u32,
}

impl<O: Objective + ?Sized> Counted<'_, O> {
    fn f(&mut self, items: &[Choice]) -> f64 {
        self.calls += 1;
        self.objective.value(items)
    }
}

fn normalize(x: f64, b: f64) -> f64 {
    if b > 0.0 {
        x / b
    } else {
        0.0
    }
}

/// Rewards from a local view only: the VoC chain over the slots in order,
/// then the action's marginal gain given the distinct neighbors.
pub fn compute_feedback<O: Objective + ?Sized>(objective: &O, view: &LocalView, normalizer: f64) -> Feedback {
    let mut f = Counted { objective, calls: 0 };
    let own = view.own;
    let f_a = f.f(&[own]);
    let lookup = |j: usize| -> Choice {
        *view
            .received
            .iter()
            .find(|c| c.agent == j)
            .expect("every listened-to agent sent its action")
    };
    let mut prefix: Vec<Choice> = Vec::with_capacity(view.chain.len() + 1);
    let mut slot_rewards = Vec::with_capacity(view.chain.len());
    let mut last_voc = 0.0;
    for &j in &view.chain {
        if !prefix.iter().any(|c| c.agent == j) {
            prefix.push(lookup(j));
        }
        let without = f.f(&prefix);
        prefix.push(own);
        let with = f.f(&prefix);
        prefix.pop();
        let voc = f_a + without - with;
        slot_rewards.push(normalize(voc - last_voc, normalizer));
        last_voc = voc;
    }
    let without = f.f(&prefix);
    prefix.push(own);
    let with = f.f(&prefix);
    let marginal = with - without;
    Feedback {
        marginal,
        action_reward: normalize(marginal, normalizer),
        slot_rewards,
        voc: last_voc,
        evaluations: f.calls,
    }
}

impl AgentState {
    pub fn new<O: Objective + ?Sized>(
        objective: &O,
        id: usize,
        setup: &AgentSetup,
        horizon: u64,
        master_seed: u64,
        trial: u64,
    ) -> Result<Self> {
        if setup.action_count != objective.action_count(id) {
            return Err(Error::invalid(format!(
                "agent {id}: {} actions configured, objective has {}",
                setup.action_count,
                objective.action_count(id)
            )));
        }
        let n = objective.agent_count();
        let mut coordination = setup.coordination.clone();
        coordination.sort_unstable();
        coordination.dedup();
        if coordination.iter().any(|&j| j == id || j >= n) {
            return Err(Error::invalid(format!("agent {id}: bad coordination neighborhood")));
        }
        if let NeighborPolicy::Fixed(list) = &setup.policy {
            if list.len() > setup.alpha || list.iter().any(|j| coordination.binary_search(j).is_err()) {
                return Err(Error::invalid(format!(
                    "agent {id}: fixed neighbors must be at most alpha members of the coordination neighborhood"
                )));
            }
        }
        let mut agent = AgentState {
            id,
            action_bandit: Exp3::new(setup.action_count, horizon)?,
            neighbor_bandits: Vec::new(),
            base_coordination: coordination.clone(),
            coordination: Vec::new(),
            alpha: setup.alpha,
            policy: setup.policy.clone(),
            normalizer: objective.normalizer(id),
            horizon,
            action_rng: agent_stream(master_seed, trial, id, Role::ActionBandit, 0),
            slot_rngs: (0..setup.alpha)
                .map(|k| agent_stream(master_seed, trial, id, Role::NeighborBandit, k))
                .collect(),
            random_rng: agent_stream(master_seed, trial, id, Role::RandomNeighbors, 0),
            active: true,
        };
        agent.set_coordination(coordination)?;
        Ok(agent)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn coordination(&self) -> &[usize] {
        &self.coordination
    }

    pub fn action_bandit(&self) -> &Exp3 {
        &self.action_bandit
    }

    pub fn neighbor_bandits(&self) -> &[Exp3] {
        &self.neighbor_bandits
    }

    pub fn policy(&self) -> &NeighborPolicy {
        &self.policy
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Neighbor selection is skipped when the bandwidth covers everyone.
    pub fn bypasses_selection(&self) -> bool {
        self.alpha >= self.coordination.len()
    }

    /// Replaces the coordination neighborhood. Surviving neighbors keep
    /// their learned weights; newcomers start fresh.
    fn set_coordination(&mut self, coordination: Vec<usize>) -> Result<()> {
        if coordination.is_empty() {
            self.neighbor_bandits.clear();
        } else if self.neighbor_bandits.is_empty() {
            self.neighbor_bandits = (0..self.alpha)
                .map(|_| Exp3::new(coordination.len(), self.horizon))
                .collect::<Result<_>>()?;
        } else {
            let keep: Vec<Option<usize>> = coordination
                .iter()
                .map(|j| self.coordination.iter().position(|k| k == j))
                .collect();
            for b in &mut self.neighbor_bandits {
                b.remap_arms(&keep)?;
            }
        }
        self.coordination = coordination;
        Ok(())
    }

    pub fn actsel_draw(&mut self) -> usize {
        self.action_bandit.sample(&mut self.action_rng)
    }

    /// Ordered slot picks as agent ids, and the arm indices behind them.
    pub fn neisel_draw(&mut self) -> (Vec<usize>, Vec<usize>) {
        if self.alpha == 0 || self.coordination.is_empty() {
            return (Vec::new(), Vec::new());
        }
        match &self.policy {
            _ if self.bypasses_selection() => (self.coordination.clone(), Vec::new()),
            NeighborPolicy::Learned => {
                let arms: Vec<usize> = self
                    .neighbor_bandits
                    .iter()
                    .zip(&mut self.slot_rngs)
                    .map(|(b, rng)| b.sample(rng))
                    .collect();
                (arms.iter().map(|&a| self.coordination[a]).collect(), arms)
            }
            NeighborPolicy::Fixed(list) => (list.clone(), Vec::new()),
            NeighborPolicy::Random => (
                random_neighbors(&self.coordination, self.alpha, &mut self.random_rng),
                Vec::new(),
            ),
        }
    }

    pub fn draw(&mut self) -> Draw {
        let action = self.actsel_draw();
        let (chain, arms) = self.neisel_draw();
        Draw { action, chain, arms }
    }

    pub fn actsel_feedback(&mut self, action: usize, reward: f64) -> Result<()> {
        self.action_bandit.update(action, reward)
    }

    /// Slot `k`'s bandit receives the `k`-th VoC increment.
    pub fn neisel_feedback(&mut self, arms: &[usize], slot_rewards: &[f64]) -> Result<()> {
        for ((b, &arm), &r) in self.neighbor_bandits.iter_mut().zip(arms).zip(slot_rewards) {
            b.update(arm, r)?;
        }
        Ok(())
    }

    fn learn(&mut self, draw: &Draw, feedback: &Feedback) -> Result<()> {
        self.actsel_feedback(draw.action, feedback.action_reward)?;
        if !draw.arms.is_empty() {
            self.neisel_feedback(&draw.arms, &feedback.slot_rewards)?;
        }
        Ok(())
    }
}

/// Builds each agent's local view from the drawn actions. Only the entries
/// for agents in the chain are read.
pub fn exchange(agent: usize, draw: &Draw, actions: &[Option<usize>]) -> LocalView {
    let mut received: Vec<Choice> = Vec::new();
    for &j in &draw.chain {
        if !received.iter().any(|c| c.agent == j) {
            let a = actions[j].expect("listened-to agent is active");
            received.push(Choice::new(j, a));
        }
    }
    LocalView {
        own: Choice::new(agent, draw.action),
        chain: draw.chain.clone(),
        received,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub actions: JointAssignment,
    /// Listened-to agents in slot order, per agent.
    pub picks: Vec<Vec<usize>>,
    /// Distinct listened-to agents, sorted, per agent.
    pub neighborhoods: Vec<Vec<usize>>,
    /// `f(a_i | N_i)` per agent.
    pub marginals: Vec<f64>,
    pub action_rewards: Vec<f64>,
    pub slot_rewards: Vec<Vec<f64>>,
    pub f_value: f64,
    /// Oracle calls each agent actually made.
    pub evaluations: Vec<u32>,
    /// Oracle calls each agent is charged for.
    pub charged_evaluations: Vec<u32>,
    pub messages: usize,
    pub round_seconds: f64,
    /// Simulated clock after this round.
    pub sim_time: f64,
}

impl RoundRecord {
    /// Bandwidth and membership constraints, checked per agent.
    pub fn check_constraints(&self, alphas: &[usize], coordination: &[Vec<usize>]) -> Result<()> {
        for (i, n) in self.neighborhoods.iter().enumerate() {
            if n.len() > alphas[i] {
                return Err(Error::invalid(format!(
                    "round {}: agent {i} listens to {} agents with bandwidth {}",
                    self.round,
                    n.len(),
                    alphas[i]
                )));
            }
            if n.iter().any(|j| !coordination[i].contains(j)) {
                return Err(Error::invalid(format!(
                    "round {}: agent {i} listens outside its coordination neighborhood",
                    self.round
                )));
            }
            if self.evaluations[i] > self.charged_evaluations[i] {
                return Err(Error::invalid(format!(
                    "round {}: agent {i} made {} evaluations, charged {}",
                    self.round, self.evaluations[i], self.charged_evaluations[i]
                )));
            }
        }
        Ok(())
    }
}

/// A team of ANACONDA agents and its simulated clock.
#[derive(Debug, Clone)]
pub struct Anaconda {
    agents: Vec<AgentState>,
    delays: DelayModel,
    round: u64,
    clock: f64,
}

impl Anaconda {
    pub fn new<O: Objective + ?Sized>(
        objective: &O,
        setups: &[AgentSetup],
        horizon: u64,
        delays: DelayModel,
        master_seed: u64,
        trial: u64,
    ) -> Result<Self> {
        if setups.len() != objective.agent_count() {
            return Err(Error::invalid(format!(
                "{} agent setups for {} agents",
                setups.len(),
                objective.agent_count()
            )));
        }
        let agents = setups
            .iter()
            .enumerate()
            .map(|(i, s)| AgentState::new(objective, i, s, horizon, master_seed, trial))
            .collect::<Result<_>>()?;
        Ok(Anaconda {
            agents,
            delays,
            round: 0,
            clock: 0.0,
        })
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn rounds_done(&self) -> u64 {
        self.round
    }

    /// Simulated duration of one round: the slowest active agent.
    pub fn round_time(&self) -> f64 {
        self.agents
            .iter()
            .filter(|a| a.active)
            .map(|a| anaconda_round_time(a.alpha, self.delays))
            .fold(0.0, f64::max)
    }

    /// Agent joins or leaves. Everyone's coordination neighborhood is
    /// restricted to active agents; learned weights of remaining
    /// neighbors are kept.
    pub fn set_active(&mut self, agent: usize, active: bool) -> Result<()> {
        if agent >= self.agents.len() {
            return Err(Error::invalid(format!("no agent {agent}")));
        }
        self.agents[agent].active = active;
        let mask: Vec<bool> = self.agents.iter().map(|a| a.active).collect();
        for a in &mut self.agents {
            let m: Vec<usize> = a.base_coordination.iter().copied().filter(|&j| mask[j]).collect();
            if m != a.coordination {
                a.set_coordination(m)?;
            }
            if let NeighborPolicy::Fixed(list) = &mut a.policy {
                list.retain(|&j| mask[j]);
            }
        }
        Ok(())
    }

    pub fn step<O: Objective + ?Sized>(&mut self, objective: &O) -> Result<RoundRecord> {
        let order: Vec<usize> = (0..self.agents.len()).collect();
        self.step_in_order(objective, &order)
    }

    /// One round, visiting agents in `order` within each phase. Every agent
    /// owns its random streams, so the order cannot change the outcome.
    pub fn step_in_order<O: Objective + ?Sized>(&mut self, objective: &O, order: &[usize]) -> Result<RoundRecord> {
        let n = self.agents.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::invalid("execution order must be a permutation of the agents"));
        }

        let mut draws: Vec<Option<Draw>> = vec![None; n];
        for &i in order {
            if self.agents[i].active {
                draws[i] = Some(self.agents[i].draw());
            }
        }
        let actions: Vec<Option<usize>> = draws.iter().map(|d| d.as_ref().map(|d| d.action)).collect();

        let mut views: Vec<Option<LocalView>> = vec![None; n];
        for &i in order {
            if let Some(d) = &draws[i] {
                views[i] = Some(exchange(i, d, &actions));
            }
        }

        let mut feedback: Vec<Option<Feedback>> = vec![None; n];
        for &i in order {
            if let (Some(d), Some(v)) = (&draws[i], &views[i]) {
                let fb = compute_feedback(objective, v, self.agents[i].normalizer);
                self.agents[i].learn(d, &fb)?;
                feedback[i] = Some(fb);
            }
        }

        self.round += 1;
        let round_seconds = self.round_time();
        self.clock += round_seconds;

        let joint = JointAssignment::from_choices(
            actions
                .iter()
                .enumerate()
                .filter_map(|(i, a)| a.map(|a| Choice::new(i, a))),
        )?;
        let mut record = RoundRecord {
            round: self.round,
            f_value: objective.value(joint.choices()),
            actions: joint,
            picks: Vec::with_capacity(n),
            neighborhoods: Vec::with_capacity(n),
            marginals: Vec::with_capacity(n),
            action_rewards: Vec::with_capacity(n),
            slot_rewards: Vec::with_capacity(n),
            evaluations: Vec::with_capacity(n),
            charged_evaluations: Vec::with_capacity(n),
            messages: 0,
            round_seconds,
            sim_time: self.clock,
        };
        for i in 0..n {
            match (&draws[i], &feedback[i], &views[i]) {
                (Some(d), Some(fb), Some(v)) => {
                    let mut hood: Vec<usize> = v.received.iter().map(|c| c.agent).collect();
                    hood.sort_unstable();
                    record.messages += hood.len();
                    record.picks.push(d.chain.clone());
                    record.neighborhoods.push(hood);
                    record.marginals.push(fb.marginal);
                    record.action_rewards.push(fb.action_reward);
                    record.slot_rewards.push(fb.slot_rewards.clone());
                    record.evaluations.push(fb.evaluations);
                    record.charged_evaluations.push(evaluations_per_round(self.agents[i].alpha) as u32);
                }
                _ => {
                    record.picks.push(Vec::new());
                    record.neighborhoods.push(Vec::new());
                    record.marginals.push(0.0);
                    record.action_rewards.push(0.0);
                    record.slot_rewards.push(Vec::new());
                    record.evaluations.push(0);
                    record.charged_evaluations.push(0);
                }
            }
        }
        Ok(record)
    }
}

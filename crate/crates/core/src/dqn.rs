//! Dual Q-network agent: a per-candidate location scorer and a port-type
//! head, epsilon-greedy selection, a FIFO replay buffer, TD targets against
//! target networks and the episodic training loop.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, EnvError, Environment, PlacementPlan, StateVector, TraceRow, STATE_SIZE};
use crate::math;
use crate::nn::{Adam, Gradients, Network, NnError};
use crate::ports::{PortType, PORT_TYPE_COUNT};
use crate::rng::{derive_seed, stream, SimRng, Stream};

pub type Input = [f64; STATE_SIZE];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DqnError {
    #[error("no candidates to choose from")]
    NoCandidates,
    #[error("non-terminal transition without next states")]
    MissingNextStates,
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
    #[error("episode {episode}, step {step}: {source}")]
    Env { episode: usize, step: usize, source: EnvError },
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub gamma: f64,
    pub epsilon_init: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub batch: usize,
    pub lr_alpha: f64,
    pub lr_beta: f64,
    pub tau_soft: f64,
    pub replay_capacity: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 100,
            steps_per_episode: 10,
            gamma: 0.99,
            epsilon_init: 1.0,
            epsilon_decay: 0.995,
            epsilon_min: 0.05,
            batch: 8,
            lr_alpha: 0.001,
            lr_beta: 0.001,
            tau_soft: 0.005,
            replay_capacity: 10_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), DqnError> {
        let bad = |m| Err(DqnError::InvalidConfig(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(0.0 <= self.epsilon_min && self.epsilon_min <= self.epsilon_init && self.epsilon_init <= 1.0) {
            return bad("need 0 <= epsilon_min <= epsilon_init <= 1");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay must lie in (0, 1]");
        }
        if self.batch == 0 || self.replay_capacity < self.batch {
            return bad("need 1 <= batch <= replay_capacity");
        }
        if !(self.lr_alpha > 0.0 && self.lr_beta > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(self.tau_soft > 0.0 && self.tau_soft <= 1.0) {
            return bad("tau_soft must lie in (0, 1]");
        }
        Ok(())
    }

    /// `max(epsilon_min, epsilon_init * decay^t)` with `decay^t` correctly
    /// rounded, so the schedule does not depend on a `pow` implementation.
    pub fn epsilon(&self, t: u64) -> f64 {
        self.epsilon_min.max(self.epsilon_init * math::pow_u64(self.epsilon_decay, t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Input,
    pub port: PortType,
    pub reward: f64,
    /// Every candidate state after the step, for the max in the targets.
    pub next_states: Vec<Input>,
    pub terminal: bool,
}

/// Bounded FIFO of transitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer { capacity, items: VecDeque::with_capacity(capacity.min(1024)) }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends, evicting the oldest entry when full.
    pub fn push(&mut self, t: Transition) {
        if self.capacity == 0 {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// `batch` distinct entries chosen uniformly; `None` if too few.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Option<Vec<&Transition>> {
        if batch > self.items.len() {
            return None;
        }
        let idx = rand::seq::index::sample(rng, self.items.len(), batch);
        Some(idx.iter().map(|i| &self.items[i]).collect())
    }
}

fn score(q_loc: &Network, s: &Input) -> Result<f64, DqnError> {
    Ok(q_loc.forward(s)?[0])
}

fn scores(q_loc: &Network, states: &[Input]) -> Result<Vec<f64>, DqnError> {
    states.iter().map(|s| score(q_loc, s)).collect()
}

/// Epsilon-greedy over per-candidate scores; lowest index wins ties.
pub fn select_location<R: Rng + ?Sized>(
    q_loc: &Network,
    states: &[Input],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize, DqnError> {
    if states.is_empty() {
        return Err(DqnError::NoCandidates);
    }
    if rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(0..states.len()));
    }
    Ok(math::argmax(&scores(q_loc, states)?).expect("non-empty"))
}

/// Epsilon-greedy over the ten port-type outputs; lowest type wins ties.
pub fn select_port<R: Rng + ?Sized>(
    q_port: &Network,
    state: &Input,
    epsilon: f64,
    rng: &mut R,
) -> Result<PortType, DqnError> {
    let j = if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..PORT_TYPE_COUNT)
    } else {
        math::argmax(&q_port.forward(state)?).expect("ten outputs")
    };
    Ok(PortType::from_index(j).expect("index within catalog"))
}

/// `r + gamma * max_a' Q_target(s', a')` over the next candidates.
pub fn td_target_loc(t: &Transition, q_loc_target: &Network, gamma: f64) -> Result<f64, DqnError> {
    Ok(td_targets(t, q_loc_target, None, gamma)?.0)
}

/// `r + gamma * max_j Q_port_target(s'_chosen)_j`, where `s'_chosen` is the
/// next candidate picked greedily by the location target network.
pub fn td_target_port(
    t: &Transition,
    q_port_target: &Network,
    q_loc_target: &Network,
    gamma: f64,
) -> Result<f64, DqnError> {
    Ok(td_targets(t, q_loc_target, Some(q_port_target), gamma)?.1)
}

/// Both targets from a single scoring pass over the next candidates. The
/// port target is only computed when its network is given.
fn td_targets(
    t: &Transition,
    q_loc_target: &Network,
    q_port_target: Option<&Network>,
    gamma: f64,
) -> Result<(f64, f64), DqnError> {
    if t.terminal {
        return Ok((t.reward, t.reward));
    }
    if t.next_states.is_empty() {
        return Err(DqnError::MissingNextStates);
    }
    let next = scores(q_loc_target, &t.next_states)?;
    let chosen = math::argmax(&next).expect("non-empty");
    let y_loc = t.reward + gamma * next[chosen];
    let y_port = match q_port_target {
        Some(net) => {
            let best = net.forward(&t.next_states[chosen])?.into_iter().fold(f64::NEG_INFINITY, f64::max);
            t.reward + gamma * best
        }
        None => t.reward,
    };
    Ok((y_loc, y_port))
}

/// Online and target networks for both heads, with their optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub q_loc: Network,
    pub q_loc_target: Network,
    pub q_port: Network,
    pub q_port_target: Network,
    pub opt_loc: Adam,
    pub opt_port: Adam,
}

impl Agent {
    pub fn new(config: &TrainConfig) -> Result<Self, DqnError> {
        let q_loc = Network::q_network(STATE_SIZE, 1, derive_seed(config.seed, 0))?;
        let q_port = Network::q_network(STATE_SIZE, PORT_TYPE_COUNT, derive_seed(config.seed, 1))?;
        Ok(Agent {
            opt_loc: Adam::new(&q_loc, config.lr_alpha),
            opt_port: Adam::new(&q_port, config.lr_beta),
            q_loc_target: q_loc.clone(),
            q_port_target: q_port.clone(),
            q_loc,
            q_port,
        })
    }

    /// Greedy action for the current candidates.
    pub fn act_greedy(&self, states: &[Input]) -> Result<(usize, PortType), DqnError> {
        let mut none = stream(0, Stream::Exploration);
        let loc = select_location(&self.q_loc, states, 0.0, &mut none)?;
        let port = select_port(&self.q_port, &states[loc], 0.0, &mut none)?;
        Ok((loc, port))
    }
}

/// One gradient step on each head from a sampled batch, then soft target
/// updates. Returns the two mean squared TD errors, or `None` when the
/// replay holds fewer than `batch` transitions.
pub fn train_step<R: Rng + ?Sized>(
    agent: &mut Agent,
    replay: &ReplayBuffer,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<Option<(f64, f64)>, DqnError> {
    let Some(batch) = replay.sample(config.batch, rng) else {
        return Ok(None);
    };
    let n = batch.len() as f64;

    let mut targets = Vec::with_capacity(batch.len());
    for t in &batch {
        targets.push(td_targets(t, &agent.q_loc_target, Some(&agent.q_port_target), config.gamma)?);
    }

    let mut loss_loc = 0.0;
    let mut grads = Gradients::zeros_like(&agent.q_loc);
    for (t, (y, _)) in batch.iter().zip(&targets) {
        let trace = agent.q_loc.forward_cached(&t.state)?;
        let err = trace.output()[0] - y;
        loss_loc += err * err / n;
        agent.q_loc.backward_into(&trace, &[2.0 * err / n], &mut grads)?;
    }
    agent.opt_loc.update(&mut agent.q_loc, &grads)?;

    let mut loss_port = 0.0;
    let mut grads = Gradients::zeros_like(&agent.q_port);
    for (t, (_, y)) in batch.iter().zip(&targets) {
        let trace = agent.q_port.forward_cached(&t.state)?;
        let j = t.port.index();
        let err = trace.output()[j] - y;
        loss_port += err * err / n;
        let mut out_grad = vec![0.0; PORT_TYPE_COUNT];
        out_grad[j] = 2.0 * err / n;
        agent.q_port.backward_into(&trace, &out_grad, &mut grads)?;
    }
    agent.opt_port.update(&mut agent.q_port, &grads)?;

    agent.q_loc_target.soft_update(&agent.q_loc, config.tau_soft)?;
    agent.q_port_target.soft_update(&agent.q_port, config.tau_soft)?;
    Ok(Some((loss_loc, loss_port)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    pub global_step: u64,
    pub epsilon: f64,
    pub reward: f64,
    pub loss_loc: Option<f64>,
    pub loss_port: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub steps: Vec<StepRecord>,
    pub episode_rewards: Vec<f64>,
}

impl TrainingHistory {
    pub fn epsilon_trace(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.epsilon)
    }
}

fn inputs(states: &[StateVector], rho_max: f64) -> Vec<Input> {
    states.iter().map(|s| s.normalized(rho_max)).collect()
}

/// Resumable training state: everything needed to continue bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trainer {
    pub config: TrainConfig,
    pub agent: Agent,
    pub replay: ReplayBuffer,
    pub history: TrainingHistory,
    pub global_step: u64,
    pub episodes_done: usize,
    rng_explore: SimRng,
    rng_replay: SimRng,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self, DqnError> {
        config.validate()?;
        Ok(Trainer {
            agent: Agent::new(&config)?,
            replay: ReplayBuffer::new(config.replay_capacity),
            history: TrainingHistory::default(),
            global_step: 0,
            episodes_done: 0,
            rng_explore: stream(config.seed, Stream::Exploration),
            rng_replay: stream(config.seed, Stream::Replay),
            config,
        })
    }

    pub fn is_done(&self) -> bool {
        self.episodes_done >= self.config.episodes
    }

    fn reset_seed(&self, episode: usize) -> u64 {
        derive_seed(self.config.seed, episode as u64)
    }

    /// Runs one episode and returns its total reward.
    pub fn run_episode(&mut self, env: &mut Environment<'_>) -> Result<f64, DqnError> {
        let episode = self.episodes_done;
        let ctx = |step| move |source| DqnError::Env { episode, step, source };
        env.reset(self.reset_seed(episode)).map_err(ctx(0))?;
        let rho_max = env.rho_max();
        let mut total = 0.0;
        for step in 0..self.config.steps_per_episode {
            let states = inputs(env.states(), rho_max);
            let epsilon = self.config.epsilon(self.global_step);
            let loc = select_location(&self.agent.q_loc, &states, epsilon, &mut self.rng_explore)?;
            let port = select_port(&self.agent.q_port, &states[loc], epsilon, &mut self.rng_explore)?;
            let outcome = env.step(Action { loc, port }).map_err(ctx(step))?;
            let reward = outcome.reward.total;
            total += reward;
            let terminal = step + 1 == self.config.steps_per_episode;
            self.replay.push(Transition {
                state: states[loc],
                port,
                reward,
                next_states: if terminal { Vec::new() } else { inputs(env.states(), rho_max) },
                terminal,
            });
            let losses = train_step(&mut self.agent, &self.replay, &self.config, &mut self.rng_replay)?;
            self.history.steps.push(StepRecord {
                episode,
                step,
                global_step: self.global_step,
                epsilon,
                reward,
                loss_loc: losses.map(|l| l.0),
                loss_port: losses.map(|l| l.1),
            });
            self.global_step += 1;
        }
        self.history.episode_rewards.push(total);
        self.episodes_done += 1;
        Ok(total)
    }

    /// Runs the remaining episodes.
    pub fn train(&mut self, env: &mut Environment<'_>) -> Result<(), DqnError> {
        while !self.is_done() {
            self.run_episode(env)?;
        }
        Ok(())
    }
}

/// Rolls the greedy policy out for `steps` placements from a fresh reset.
pub fn greedy_rollout(
    agent: &Agent,
    env: &mut Environment<'_>,
    steps: usize,
    reset_seed: u64,
) -> Result<PlacementPlan, DqnError> {
    let ctx = |step| move |source| DqnError::Env { episode: 0, step, source };
    env.reset(reset_seed).map_err(ctx(0))?;
    let mut plan = PlacementPlan { method: "dqn".into(), initial: env.stations().to_vec(), ..Default::default() };
    for step in 0..steps {
        let states = inputs(env.states(), env.rho_max());
        let (loc, port) = agent.act_greedy(&states)?;
        let outcome = env.step(Action { loc, port }).map_err(ctx(step))?;
        plan.trace.push(TraceRow::new(step, &outcome));
        plan.added.push(outcome.placed);
    }
    Ok(plan)
}

/// Trains from scratch and returns the agent, its history and the greedy
/// placement of the final policy.
pub fn train(
    env: &mut Environment<'_>,
    config: &TrainConfig,
) -> Result<(Agent, TrainingHistory, PlacementPlan), DqnError> {
    let mut trainer = Trainer::new(config.clone())?;
    trainer.train(env)?;
    let plan = greedy_rollout(&trainer.agent, env, config.steps_per_episode, derive_seed(config.seed, u64::MAX))?;
    Ok((trainer.agent, trainer.history, plan))
}

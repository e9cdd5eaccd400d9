//! The SARSA(λ) learning loop with feature-space exploration bonuses.
//!
//! An [`Agent`] owns everything one learning run needs — value heads,
//! density model, exploration schedule position, and behaviour rng — and
//! persists all of it across episodes. Three architectures share the
//! loop:
//!
//! - **split** (the default): an extrinsic head trained on environment
//!   reward and an intrinsic head trained on the exploration bonus;
//!   behaviour is greedy in their sum, so optimism about novelty steers
//!   the policy without ever contaminating the extrinsic estimates;
//! - **combined**: a single head trained on `reward + bonus`;
//! - **baseline**: a single head trained on reward alone, ε-greedy, with
//!   the density model left untouched.
//!
//! Each training step acts with the previously selected action, prices
//! the state being *left* through the density model, selects the next
//! action, and applies the TD updates through replacing eligibility
//! traces. Greedy evaluation episodes freeze all of that and follow the
//! extrinsic head alone.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bonus::{exploration_bonus, BonusConfig, BonusError};
use crate::density::FactorTable;
use crate::envs::Environment;
use crate::features::{FeatureId, FeatureVector};
use crate::math;
use crate::value::{td_error, LinearQ, TdStep};

/// How value estimates are factored across heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Separate extrinsic and intrinsic heads; behaviour is greedy in
    /// their sum.
    #[default]
    Split,
    /// One head trained on the bonus-augmented reward.
    Combined,
    /// One head trained on environment reward alone; no density model.
    Baseline,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Split => "split",
            Architecture::Combined => "combined",
            Architecture::Baseline => "baseline",
        })
    }
}

/// How the behaviour policy explores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ActionSelection {
    /// With probability ε a uniformly random action, otherwise greedy.
    #[default]
    #[serde(rename = "egreedy")]
    EGreedy,
    /// With probability ε an action sampled from a Boltzmann distribution
    /// over the intrinsic values, otherwise greedy. Requires the split
    /// architecture (the intrinsic head is what gets sampled).
    #[serde(rename = "boltzmann")]
    Boltzmann,
}

impl fmt::Display for ActionSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionSelection::EGreedy => "egreedy",
            ActionSelection::Boltzmann => "boltzmann",
        })
    }
}

/// Exploration-rate schedule over global training steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// A fixed rate.
    Constant {
        /// The rate itself.
        epsilon: f64,
    },
    /// Linear anneal from `start` at step 0 down to `min` at
    /// `anneal_steps`, constant afterwards.
    Linear {
        /// Rate at step 0.
        start: f64,
        /// Rate from `anneal_steps` onwards.
        min: f64,
        /// Number of steps the anneal spans.
        anneal_steps: u64,
    },
}

impl EpsilonSchedule {
    /// The exploration rate in force at global step `step`.
    pub fn epsilon_at(&self, step: u64) -> f64 {
        match *self {
            EpsilonSchedule::Constant { epsilon } => epsilon,
            EpsilonSchedule::Linear {
                start,
                min,
                anneal_steps,
            } => {
                let frac = step as f64 / anneal_steps as f64;
                start - (start - min) * if frac < 1.0 { frac } else { 1.0 }
            }
        }
    }
}

impl Default for EpsilonSchedule {
    /// The bonus-driven agents' default: anneal from 1 down to 0.01.
    /// The harness sizes `anneal_steps` to 10% of the step budget; this
    /// standalone default spans 10,000 steps.
    fn default() -> Self {
        EpsilonSchedule::Linear {
            start: 1.0,
            min: 0.01,
            anneal_steps: 10_000,
        }
    }
}

/// Everything configurable about an [`Agent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    /// Learning rate.
    ///
    /// Stability rule of thumb for linear value functions with
    /// replacing traces: keep `alpha` times the number of
    /// simultaneously active features comfortably below 1, or the
    /// weights can diverge (caught by
    /// [`check_finite`](Agent::check_finite), not silently).
    pub alpha: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Eligibility-trace decay.
    pub lambda: f64,
    /// Exploration-bonus scale and pseudo-count variant.
    pub bonus: BonusConfig,
    /// Exploration-rate schedule.
    pub epsilon_schedule: EpsilonSchedule,
    /// Behaviour-policy exploration scheme.
    pub selection: ActionSelection,
    /// Head layout.
    pub architecture: Architecture,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            alpha: 0.01,
            gamma: 0.99,
            lambda: 0.9,
            bonus: BonusConfig::default(),
            epsilon_schedule: EpsilonSchedule::default(),
            selection: ActionSelection::EGreedy,
            architecture: Architecture::Split,
        }
    }
}

impl AgentConfig {
    /// Rejects configurations that cannot be run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ConfigError::Alpha { value: self.alpha });
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ConfigError::Gamma { value: self.gamma });
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(ConfigError::Lambda { value: self.lambda });
        }
        if !(self.bonus.beta >= 0.0 && self.bonus.beta.is_finite()) {
            return Err(ConfigError::Beta { value: self.bonus.beta });
        }
        match self.epsilon_schedule {
            EpsilonSchedule::Constant { epsilon } => {
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(ConfigError::Epsilon { value: epsilon });
                }
            }
            EpsilonSchedule::Linear {
                start,
                min,
                anneal_steps,
            } => {
                if !(0.0..=1.0).contains(&start) {
                    return Err(ConfigError::Epsilon { value: start });
                }
                if !(0.0..=1.0).contains(&min) {
                    return Err(ConfigError::Epsilon { value: min });
                }
                if min > start {
                    return Err(ConfigError::EpsilonIncreasing { start, min });
                }
                if anneal_steps == 0 {
                    return Err(ConfigError::ZeroAnnealSteps);
                }
            }
        }
        if self.selection == ActionSelection::Boltzmann
            && self.architecture != Architecture::Split
        {
            return Err(ConfigError::BoltzmannNeedsSplit);
        }
        Ok(())
    }
}

/// Why an [`AgentConfig`] was rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfigError {
    /// The learning rate must be positive and finite.
    Alpha {
        /// The rejected value.
        value: f64,
    },
    /// The discount factor must lie in `[0, 1]`.
    Gamma {
        /// The rejected value.
        value: f64,
    },
    /// The trace decay must lie in `[0, 1]`.
    Lambda {
        /// The rejected value.
        value: f64,
    },
    /// The bonus scale must be nonnegative and finite.
    Beta {
        /// The rejected value.
        value: f64,
    },
    /// Exploration rates must lie in `[0, 1]`.
    Epsilon {
        /// The rejected value.
        value: f64,
    },
    /// A linear schedule must not anneal upwards.
    EpsilonIncreasing {
        /// Rate at step 0.
        start: f64,
        /// Rate after the anneal.
        min: f64,
    },
    /// A linear schedule must span at least one step.
    ZeroAnnealSteps,
    /// Boltzmann selection samples the intrinsic head, which only the
    /// split architecture has.
    BoltzmannNeedsSplit,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Alpha { value } => {
                write!(f, "alpha must be positive and finite, got {value}")
            }
            ConfigError::Gamma { value } => write!(f, "gamma must lie in [0, 1], got {value}"),
            ConfigError::Lambda { value } => write!(f, "lambda must lie in [0, 1], got {value}"),
            ConfigError::Beta { value } => {
                write!(f, "beta must be nonnegative and finite, got {value}")
            }
            ConfigError::Epsilon { value } => {
                write!(f, "epsilon must lie in [0, 1], got {value}")
            }
            ConfigError::EpsilonIncreasing { start, min } => write!(
                f,
                "epsilon schedule must not increase: start {start} < min {min}"
            ),
            ConfigError::ZeroAnnealSteps => write!(f, "anneal_steps must be positive"),
            ConfigError::BoltzmannNeedsSplit => write!(
                f,
                "boltzmann selection needs the split architecture (it samples the intrinsic head)"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

/// Why an [`Agent`] call failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentError {
    /// The configuration was rejected before any learning happened.
    Config(ConfigError),
    /// The density model failed to assign a strictly higher probability
    /// to an observation just recorded into it.
    Bonus(BonusError),
}

impl From<ConfigError> for AgentError {
    fn from(e: ConfigError) -> Self {
        AgentError::Config(e)
    }
}

impl From<BonusError> for AgentError {
    fn from(e: BonusError) -> Self {
        AgentError::Bonus(e)
    }
}

impl fmt::Display for AgentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentError::Config(e) => write!(f, "invalid agent config: {e}"),
            AgentError::Bonus(e) => write!(f, "exploration bonus failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AgentError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            AgentError::Config(e) => Some(e),
            AgentError::Bonus(e) => Some(e),
        }
    }
}

/// Argmax with ties broken uniformly at random among the maximisers.
fn argmax_uniform<R: Rng + ?Sized>(q: &[f64], rng: &mut R) -> usize {
    let mut max = f64::NEG_INFINITY;
    for &v in q {
        if v > max {
            max = v;
        }
    }
    let ties: Vec<usize> = (0..q.len()).filter(|&i| q[i] == max).collect();
    if ties.is_empty() {
        // Only possible when every value is NaN (a diverged value
        // function). Pick deterministically and let the caller's
        // finiteness checks surface the divergence.
        return 0;
    }
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.gen_range(0..ties.len())]
    }
}

/// ε-greedy selection: with probability `epsilon` a uniformly random
/// action, otherwise the argmax of `q_values` with ties broken uniformly
/// at random.
///
/// # Panics
///
/// Panics on an empty action set or `epsilon` outside `[0, 1]`.
pub fn select_egreedy<R: Rng + ?Sized>(q_values: &[f64], epsilon: f64, rng: &mut R) -> usize {
    assert!(!q_values.is_empty(), "need at least one action");
    assert!((0.0..=1.0).contains(&epsilon), "epsilon must lie in [0, 1]");
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q_values.len())
    } else {
        argmax_uniform(q_values, rng)
    }
}

/// Boltzmann selection over split heads: with probability `1 - epsilon`
/// the argmax of `q_e + q_i` (ties uniform), otherwise an action sampled
/// with probability proportional to `exp(q_i[a])`. The exponentials are
/// max-shifted, which cannot change the sampled distribution but keeps
/// them from overflowing.
///
/// # Panics
///
/// Panics on an empty action set, mismatched array lengths, or `epsilon`
/// outside `[0, 1]`.
pub fn select_boltzmann<R: Rng + ?Sized>(
    q_e: &[f64],
    q_i: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> usize {
    assert!(!q_e.is_empty(), "need at least one action");
    assert_eq!(q_e.len(), q_i.len(), "head value arrays must align");
    assert!((0.0..=1.0).contains(&epsilon), "epsilon must lie in [0, 1]");
    if rng.gen::<f64>() < epsilon {
        let mut max = f64::NEG_INFINITY;
        for &v in q_i {
            if v > max {
                max = v;
            }
        }
        let weights: Vec<f64> = q_i.iter().map(|&v| math::exp(v - max)).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        for (i, w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                return i;
            }
        }
        // Round-off can leave u at exactly 0 after the last weight.
        q_i.len() - 1
    } else {
        let sums: Vec<f64> = q_e.iter().zip(q_i).map(|(&e, &i)| e + i).collect();
        argmax_uniform(&sums, rng)
    }
}

/// What one training step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSummary {
    /// The action acted on (selected at the previous step).
    pub action: usize,
    /// Extrinsic reward observed.
    pub reward: f64,
    /// Exploration bonus priced on the state that was left; zero for the
    /// baseline architecture.
    pub bonus: f64,
    /// Pseudo-count behind the bonus; `None` for the baseline.
    pub pseudo_count: Option<f64>,
    /// Whether this transition ended the episode.
    pub terminal: bool,
}

/// Totals of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    /// Sum of extrinsic rewards.
    pub ext_return: f64,
    /// Sum of exploration bonuses.
    pub int_return: f64,
    /// Number of environment transitions taken.
    pub steps: u64,
    /// Distinct feature ids observed over the agent's whole lifetime.
    pub distinct_features: usize,
    /// Whether the episode reached a terminal state (as opposed to the
    /// step cap).
    pub terminated: bool,
}

/// Breach reported by [`Agent::check_finite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFiniteValue {
    /// Which store holds the offending value.
    pub location: &'static str,
}

impl fmt::Display for NonFiniteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "non-finite value in {}", self.location)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NonFiniteValue {}

/// A SARSA(λ) learner, optionally bonus-driven, persistent across
/// episodes.
#[derive(Debug, Clone)]
pub struct Agent {
    pub(crate) cfg: AgentConfig,
    pub(crate) q_ext: LinearQ,
    pub(crate) q_int: Option<LinearQ>,
    pub(crate) density: FactorTable,
    pub(crate) seen: BTreeSet<FeatureId>,
    pub(crate) step_count: u64,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) pending: Option<(FeatureVector, usize)>,
}

impl Agent {
    /// A fresh zero-initialised agent.
    pub fn new(cfg: AgentConfig, num_actions: usize, seed: u64) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Ok(Agent {
            q_ext: LinearQ::new(num_actions),
            q_int: (cfg.architecture == Architecture::Split)
                .then(|| LinearQ::new(num_actions)),
            density: FactorTable::new(),
            seen: BTreeSet::new(),
            step_count: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cfg,
            pending: None,
        })
    }

    /// The configuration the agent runs under.
    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    /// Global training steps taken so far.
    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// The density model (empty and untouched in the baseline).
    pub fn density(&self) -> &FactorTable {
        &self.density
    }

    /// Pre-registers feature ids in the density model.
    ///
    /// When the feature space is known upfront this makes every density
    /// evaluation span the full space from the first step: unseen
    /// registered features contribute their prototype probability
    /// instead of being absorbed lazily on first sight. Registration
    /// does not mark a feature as observed, and the baseline
    /// architecture ignores the density entirely.
    pub fn register_features<I>(&mut self, ids: I)
    where
        I: IntoIterator<Item = FeatureId>,
    {
        for id in ids {
            self.density.register(id);
        }
    }

    /// The extrinsic value head.
    pub fn extrinsic(&self) -> &LinearQ {
        &self.q_ext
    }

    /// The intrinsic value head (`None` outside the split architecture).
    pub fn intrinsic(&self) -> Option<&LinearQ> {
        self.q_int.as_ref()
    }

    /// Number of distinct feature ids observed so far.
    pub fn distinct_features(&self) -> usize {
        self.seen.len()
    }

    /// The exploration rate in force at the current step count.
    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon_schedule.epsilon_at(self.step_count)
    }

    /// The state-action pair the next [`train_step`](Self::train_step)
    /// will act on, if an episode is underway.
    pub fn pending(&self) -> Option<(&FeatureVector, usize)> {
        self.pending.as_ref().map(|(v, a)| (v, *a))
    }

    fn note_seen(&mut self, v: &FeatureVector) {
        for id in v {
            self.seen.insert(id);
        }
    }

    /// Behaviour-policy action at `v` under the current schedule.
    fn select_action(&mut self, v: &FeatureVector) -> usize {
        let epsilon = self.epsilon();
        match self.cfg.selection {
            ActionSelection::EGreedy => {
                let mut q = self.q_ext.q_values(v);
                if let Some(q_int) = &self.q_int {
                    for (sum, intrinsic) in q.iter_mut().zip(q_int.q_values(v)) {
                        *sum += intrinsic;
                    }
                }
                select_egreedy(&q, epsilon, &mut self.rng)
            }
            ActionSelection::Boltzmann => {
                let q_int = self
                    .q_int
                    .as_ref()
                    .expect("validated: boltzmann runs on the split architecture");
                select_boltzmann(
                    &self.q_ext.q_values(v),
                    &q_int.q_values(v),
                    epsilon,
                    &mut self.rng,
                )
            }
        }
    }

    /// Resets `env` with `seed`, clears both heads' traces, and selects
    /// the episode's first action.
    pub fn begin_episode<E: Environment + ?Sized>(&mut self, env: &mut E, seed: u64) {
        let features = env.reset(seed);
        self.q_ext.clear_traces();
        if let Some(q) = &mut self.q_int {
            q.clear_traces();
        }
        self.note_seen(&features);
        let action = self.select_action(&features);
        self.pending = Some((features, action));
    }

    /// One SARSA(λ) step: act with the stored action, price the state
    /// being left through the density model, select the successor action,
    /// and apply the TD updates.
    ///
    /// # Panics
    ///
    /// Panics if no episode is underway — [`Self::begin_episode`] starts
    /// one, and a terminal transition ends it.
    pub fn train_step<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
    ) -> Result<StepSummary, AgentError> {
        let (features, action) = self
            .pending
            .take()
            .expect("no episode underway: call begin_episode first");
        let step = env.step(action);
        self.note_seen(&step.features);

        // The bonus prices the state being *left*: recording it raises its
        // density, and the pseudo-count derives from that rise.
        let outcome = match self.cfg.architecture {
            Architecture::Baseline => None,
            Architecture::Split | Architecture::Combined => {
                Some(exploration_bonus(&mut self.density, &features, &self.cfg.bonus)?)
            }
        };
        let bonus = outcome.map_or(0.0, |o| o.bonus);

        // The successor action is selected before the weight updates land;
        // its value is re-estimated from the updated weights when the next
        // step's TD error is formed.
        let next_action = if step.terminal {
            None
        } else {
            Some(self.select_action(&step.features))
        };

        let AgentConfig {
            alpha,
            gamma,
            lambda,
            ..
        } = self.cfg;
        match self.cfg.architecture {
            Architecture::Split => {
                let q_int = self
                    .q_int
                    .as_mut()
                    .expect("split architecture has an intrinsic head");
                let delta_ext = td_error(TdStep {
                    reward: step.reward,
                    gamma,
                    q_current: self.q_ext.q_value(&features, action),
                    q_next: next_action.map_or(0.0, |a| self.q_ext.q_value(&step.features, a)),
                });
                let delta_int = td_error(TdStep {
                    reward: bonus,
                    gamma,
                    q_current: q_int.q_value(&features, action),
                    q_next: next_action.map_or(0.0, |a| q_int.q_value(&step.features, a)),
                });
                self.q_ext.mark_visit(&features, action);
                self.q_ext.apply_update(delta_ext, alpha);
                self.q_ext.decay_traces(gamma, lambda);
                q_int.mark_visit(&features, action);
                q_int.apply_update(delta_int, alpha);
                q_int.decay_traces(gamma, lambda);
            }
            Architecture::Combined | Architecture::Baseline => {
                let delta = td_error(TdStep {
                    reward: step.reward + bonus,
                    gamma,
                    q_current: self.q_ext.q_value(&features, action),
                    q_next: next_action.map_or(0.0, |a| self.q_ext.q_value(&step.features, a)),
                });
                self.q_ext.mark_visit(&features, action);
                self.q_ext.apply_update(delta, alpha);
                self.q_ext.decay_traces(gamma, lambda);
            }
        }

        self.step_count += 1;
        let summary = StepSummary {
            action,
            reward: step.reward,
            bonus,
            pseudo_count: outcome.map(|o| o.pseudo_count),
            terminal: step.terminal,
        };
        self.pending = next_action.map(|a| (step.features, a));
        Ok(summary)
    }

    /// One full training episode: reset, loop [`Self::train_step`] until
    /// terminal or `step_cap`, then clear traces.
    ///
    /// # Panics
    ///
    /// Panics if `step_cap` is zero.
    pub fn run_episode<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        seed: u64,
        step_cap: u64,
    ) -> Result<EpisodeStats, AgentError> {
        assert!(step_cap > 0, "step_cap must be positive");
        self.begin_episode(env, seed);
        let mut stats = EpisodeStats {
            ext_return: 0.0,
            int_return: 0.0,
            steps: 0,
            distinct_features: 0,
            terminated: false,
        };
        while stats.steps < step_cap {
            let summary = self.train_step(env)?;
            stats.ext_return += summary.reward;
            stats.int_return += summary.bonus;
            stats.steps += 1;
            if summary.terminal {
                stats.terminated = true;
                break;
            }
        }
        self.q_ext.clear_traces();
        if let Some(q) = &mut self.q_int {
            q.clear_traces();
        }
        self.pending = None;
        stats.distinct_features = self.seen.len();
        Ok(stats)
    }

    /// One frozen greedy evaluation episode: ε = 0, no weight updates, no
    /// density updates. Actions maximise the extrinsic head alone (ties
    /// uniform), so the score reflects the learned extrinsic policy with
    /// the exploration machinery switched off.
    ///
    /// # Panics
    ///
    /// Panics if `step_cap` is zero.
    pub fn eval_episode<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        seed: u64,
        step_cap: u64,
    ) -> EpisodeStats {
        assert!(step_cap > 0, "step_cap must be positive");
        let mut features = env.reset(seed);
        let mut stats = EpisodeStats {
            ext_return: 0.0,
            int_return: 0.0,
            steps: 0,
            distinct_features: self.seen.len(),
            terminated: false,
        };
        while stats.steps < step_cap {
            let action = argmax_uniform(&self.q_ext.q_values(&features), &mut self.rng);
            let step = env.step(action);
            stats.ext_return += step.reward;
            stats.steps += 1;
            features = step.features;
            if step.terminal {
                stats.terminated = true;
                break;
            }
        }
        stats
    }

    /// Scans every weight, trace, density factor, and the schedule output
    /// for NaN or infinity.
    pub fn check_finite(&self) -> Result<(), NonFiniteValue> {
        let check = |q: &LinearQ, weights: &'static str, traces: &'static str| {
            for (_, _, w) in q.weights_iter() {
                if !w.is_finite() {
                    return Err(NonFiniteValue { location: weights });
                }
            }
            for (_, _, e) in q.traces_iter() {
                if !e.is_finite() {
                    return Err(NonFiniteValue { location: traces });
                }
            }
            Ok(())
        };
        check(&self.q_ext, "extrinsic weights", "extrinsic traces")?;
        if let Some(q) = &self.q_int {
            check(q, "intrinsic weights", "intrinsic traces")?;
        }
        for (_, p) in self.density.factors() {
            if !p.is_finite() {
                return Err(NonFiniteValue {
                    location: "density factors",
                });
            }
        }
        if !self.epsilon().is_finite() {
            return Err(NonFiniteValue {
                location: "epsilon schedule",
            });
        }
        Ok(())
    }
}

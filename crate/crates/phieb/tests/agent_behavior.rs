//! Cross-architecture agreement and long-run numeric health of the
//! learning loop, exercised through the public API only.

use phieb::agent::{ActionSelection, Agent, AgentConfig, Architecture, EpsilonSchedule};
use phieb::bonus::BonusConfig;
use phieb::envs::{Environment, FeatureMapKind, SparseChain, Step};
use phieb::features::FeatureVector;

fn zero_bonus_config(architecture: Architecture) -> AgentConfig {
    AgentConfig {
        architecture,
        bonus: BonusConfig {
            beta: 0.0,
            ..BonusConfig::default()
        },
        epsilon_schedule: EpsilonSchedule::Constant { epsilon: 0.0 },
        selection: ActionSelection::EGreedy,
        ..AgentConfig::default()
    }
}

/// With the bonus scale at zero and no exploration noise, the intrinsic
/// head never receives a signal, so all three architectures reduce to
/// the same algorithm: they must pick the same actions at every step and
/// end with bitwise-identical extrinsic weights.
#[test]
fn architectures_agree_when_bonus_and_epsilon_vanish() {
    let run = |architecture: Architecture| {
        let mut env = SparseChain::default_chain(FeatureMapKind::Tabular);
        let mut agent =
            Agent::new(zero_bonus_config(architecture), env.num_actions(), 42).unwrap();
        let mut actions = Vec::new();
        for episode in 0..20u64 {
            agent.begin_episode(&mut env, episode);
            for _ in 0..env.step_cap() {
                let summary = agent.train_step(&mut env).unwrap();
                actions.push(summary.action);
                assert_eq!(summary.bonus, 0.0, "beta = 0 must zero the bonus exactly");
                if summary.terminal {
                    break;
                }
            }
        }
        let weights: Vec<(usize, u64, u64)> = agent
            .extrinsic()
            .weights_iter()
            .map(|(action, id, w)| (action, id.raw(), w.to_bits()))
            .collect();
        (actions, weights)
    };

    let (split_actions, split_weights) = run(Architecture::Split);
    let (combined_actions, combined_weights) = run(Architecture::Combined);
    let (baseline_actions, baseline_weights) = run(Architecture::Baseline);

    assert_eq!(split_actions, combined_actions);
    assert_eq!(split_actions, baseline_actions);
    assert_eq!(split_weights, combined_weights);
    assert_eq!(split_weights, baseline_weights);
}

/// A synthetic environment whose observation is a window of ids sliding
/// through a large pool, so the density model is forced to register new
/// features for a long time while old ones keep decaying.
struct FeatureChurn {
    step: u64,
    pool: u64,
    window: u64,
}

impl FeatureChurn {
    fn observe(&self) -> FeatureVector {
        let base = self.step * self.window;
        FeatureVector::from_ids((0..self.window).map(|j| (base + j) % self.pool))
    }
}

impl Environment for FeatureChurn {
    fn name(&self) -> &'static str {
        "feature_churn"
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn step_cap(&self) -> u64 {
        u64::MAX
    }

    fn reset(&mut self, _seed: u64) -> FeatureVector {
        self.step = 0;
        self.observe()
    }

    fn step(&mut self, _action: usize) -> Step {
        self.step += 1;
        Step {
            reward: 0.0,
            features: self.observe(),
            terminal: false,
        }
    }
}

fn churn_run(pool: u64, window: u64, steps: u64) {
    let mut env = FeatureChurn {
        step: 0,
        pool,
        window,
    };
    let mut agent = Agent::new(AgentConfig::default(), env.num_actions(), 7).unwrap();
    agent.begin_episode(&mut env, 0);
    for _ in 0..steps {
        let summary = agent.train_step(&mut env).unwrap();
        assert!(summary.bonus.is_finite());
        assert!(summary.bonus >= 0.0);
        let pseudo = summary.pseudo_count.expect("split agents report counts");
        assert!(pseudo.is_finite() && pseudo >= 0.0);
    }
    assert_eq!(agent.distinct_features(), pool as usize);
    assert_eq!(agent.density().len(), pool as usize);
    agent.check_finite().unwrap();
}

/// Sustained learning over a rotating feature space stays finite.  A
/// scaled stand-in for the full-size run below, small enough for every
/// test pass.
#[test]
fn stress_rotating_features_scaled() {
    churn_run(1_000, 20, 50_000);
}

/// The full-size stress run: a million steps with a hundred thousand
/// distinct features.  Every density update touches every registered
/// feature, so this takes hours; run it explicitly with
/// `cargo test -p phieb -- --ignored stress_rotating_features_full`.
#[test]
#[ignore = "full-scale stress run; takes hours"]
fn stress_rotating_features_full() {
    churn_run(100_000, 20, 1_000_000);
}

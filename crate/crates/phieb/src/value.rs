//! Sparse linear action-value functions with replacing eligibility traces.
//!
//! Q-values are linear in the binary features: `Q(s, a)` is the sum of the
//! weights of action `a` over the features active in `s`. Weights and
//! traces are stored sparsely per action; ids never touched weigh zero.
//! Traces are *replacing*: marking a visited state-action pair sets the
//! traces of its active features to one rather than accumulating, and
//! every decay pass multiplies all traces by `gamma * lambda`, evicting
//! entries that fall below [`TRACE_EPSILON`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::features::{FeatureId, FeatureVector};

/// Traces below this magnitude are dropped during decay.
pub const TRACE_EPSILON: f64 = 1e-8;

/// Inputs of a one-step temporal-difference error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdStep {
    /// Reward (or bonus) observed on the transition.
    pub reward: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Q-value of the state-action pair being updated.
    pub q_current: f64,
    /// Q-value of the successor state-action pair; pass 0 when the
    /// transition is terminal so that no bootstrapping occurs.
    pub q_next: f64,
}

/// One-step TD error `reward + gamma * q_next - q_current`.
pub fn td_error(step: TdStep) -> f64 {
    step.reward + step.gamma * step.q_next - step.q_current
}

/// Per-action sparse weights and replacing eligibility traces.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearQ {
    weights: Vec<BTreeMap<FeatureId, f64>>,
    traces: Vec<BTreeMap<FeatureId, f64>>,
}

impl LinearQ {
    /// A zero-initialised value function over `num_actions` actions.
    ///
    /// # Panics
    ///
    /// Panics if `num_actions` is zero.
    pub fn new(num_actions: usize) -> Self {
        assert!(num_actions > 0, "need at least one action");
        LinearQ {
            weights: alloc::vec![BTreeMap::new(); num_actions],
            traces: alloc::vec![BTreeMap::new(); num_actions],
        }
    }

    /// Number of actions.
    pub fn num_actions(&self) -> usize {
        self.weights.len()
    }

    /// The weight of `id` under action `a` (zero if never updated).
    pub fn weight(&self, a: usize, id: FeatureId) -> f64 {
        self.weights[a].get(&id).copied().unwrap_or(0.0)
    }

    /// The trace of `id` under action `a` (zero if not live).
    pub fn trace(&self, a: usize, id: FeatureId) -> f64 {
        self.traces[a].get(&id).copied().unwrap_or(0.0)
    }

    /// `Q(s, a)`: sum of action-`a` weights over the active features.
    pub fn q_value(&self, v: &FeatureVector, a: usize) -> f64 {
        let weights = &self.weights[a];
        v.iter().map(|id| weights.get(&id).copied().unwrap_or(0.0)).sum()
    }

    /// `Q(s, a)` for every action.
    pub fn q_values(&self, v: &FeatureVector) -> Vec<f64> {
        (0..self.num_actions()).map(|a| self.q_value(v, a)).collect()
    }

    /// Sets the traces of the visited pair's active features to one
    /// (replacing semantics).
    pub fn mark_visit(&mut self, v: &FeatureVector, a: usize) {
        let traces = &mut self.traces[a];
        for id in v {
            traces.insert(id, 1.0);
        }
    }

    /// Multiplies every live trace by `gamma * lambda`, evicting those
    /// that fall below [`TRACE_EPSILON`].
    pub fn decay_traces(&mut self, gamma: f64, lambda: f64) {
        let factor = gamma * lambda;
        for traces in &mut self.traces {
            if factor == 0.0 {
                traces.clear();
                continue;
            }
            for trace in traces.values_mut() {
                *trace *= factor;
            }
            traces.retain(|_, trace| *trace >= TRACE_EPSILON);
        }
    }

    /// Applies `weights[a][i] += alpha * delta * traces[a][i]` for every
    /// live trace.
    pub fn apply_update(&mut self, delta: f64, alpha: f64) {
        let scale = alpha * delta;
        if scale == 0.0 {
            return;
        }
        for (weights, traces) in self.weights.iter_mut().zip(&self.traces) {
            for (&id, &trace) in traces {
                *weights.entry(id).or_insert(0.0) += scale * trace;
            }
        }
    }

    /// Drops all traces (episode boundary).
    pub fn clear_traces(&mut self) {
        for traces in &mut self.traces {
            traces.clear();
        }
    }

    /// Total number of stored weights across actions.
    pub fn weight_count(&self) -> usize {
        self.weights.iter().map(BTreeMap::len).sum()
    }

    /// Total number of live traces across actions.
    pub fn trace_count(&self) -> usize {
        self.traces.iter().map(BTreeMap::len).sum()
    }

    /// Iterates over all stored weights as `(action, id, weight)`.
    pub fn weights_iter(&self) -> impl Iterator<Item = (usize, FeatureId, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .flat_map(|(a, m)| m.iter().map(move |(&id, &w)| (a, id, w)))
    }

    /// Iterates over all live traces as `(action, id, trace)`.
    pub fn traces_iter(&self) -> impl Iterator<Item = (usize, FeatureId, f64)> + '_ {
        self.traces
            .iter()
            .enumerate()
            .flat_map(|(a, m)| m.iter().map(move |(&id, &e)| (a, id, e)))
    }

    pub(crate) fn weights_maps(&self) -> &[BTreeMap<FeatureId, f64>] {
        &self.weights
    }

    pub(crate) fn traces_maps(&self) -> &[BTreeMap<FeatureId, f64>] {
        &self.traces
    }

    pub(crate) fn set_weights(&mut self, weights: Vec<BTreeMap<FeatureId, f64>>) {
        assert_eq!(weights.len(), self.traces.len());
        self.weights = weights;
    }

    pub(crate) fn set_traces(&mut self, traces: Vec<BTreeMap<FeatureId, f64>>) {
        assert_eq!(traces.len(), self.weights.len());
        self.traces = traces;
    }
}

//! Desk-scale hard-exploration benchmark environments.
//!
//! Each environment is episodic, exposes a small discrete action set, and
//! reports observations as sparse binary feature vectors through one of
//! two feature maps:
//!
//! - **tabular**: one id per distinct environment state (one-hot), so the
//!   density model degenerates to per-state visit counting;
//! - **factored**: a handful of ids shared across states (position
//!   components, room, inventory), so novelty generalises between states
//!   that share structure.
//!
//! The three environments probe different exploration regimes:
//! [`SparseChain`] (deep directed exploration against stochastic
//! slipping), [`KeyedRooms`] (long-horizon subgoals: fetch a key, unlock
//! doors, cross rooms), and [`DenseGrid`] (dense small rewards, optionally
//! with distractor features that flip every step).

pub mod chain;
pub mod grid;
pub mod rooms;

pub use chain::SparseChain;
pub use grid::{DenseGrid, DenseGridConfig};
pub use rooms::{KeyedRooms, LayoutError};

use crate::features::FeatureVector;

/// Which feature map an environment reports observations through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMapKind {
    /// One id per distinct environment state.
    #[default]
    Tabular,
    /// Shared component ids (rows, columns, rooms, flags, ...).
    Factored,
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// Extrinsic reward of the transition.
    pub reward: f64,
    /// Observation of the successor state.
    pub features: FeatureVector,
    /// Whether the successor state is terminal.
    pub terminal: bool,
}

/// An episodic environment with sparse binary observations.
pub trait Environment {
    /// Short stable name ("sparse_chain", "keyed_rooms", "dense_grid").
    fn name(&self) -> &'static str;

    /// Number of discrete actions, indexed `0..num_actions`.
    fn num_actions(&self) -> usize;

    /// Recommended per-episode step cap.
    fn step_cap(&self) -> u64;

    /// Starts a new episode, reseeding any environment-local randomness,
    /// and returns the initial observation.
    fn reset(&mut self, seed: u64) -> FeatureVector;

    /// Takes `action` and returns the transition.
    ///
    /// # Panics
    ///
    /// Panics if called on a terminal episode or with an out-of-range
    /// action; both are caller bugs.
    fn step(&mut self, action: usize) -> Step;
}

//! Count-based exploration in feature space.
//!
//! This crate implements an exploration method for reinforcement-learning
//! agents that use sparse binary feature representations. The visit density
//! of a feature vector is modelled as a product of independent
//! Krichevsky-Trofimov (KT) estimators, one per feature. From two
//! consecutive density evaluations of the same vector (before and after
//! recording it) a pseudo-count is recovered, and an optimistic bonus
//! `beta / sqrt(pseudo_count)` is paid to the agent. Because the density
//! lives in the same feature space as the value function, novelty
//! generalises across states that share features.
//!
//! The crate is organised into the layers of that pipeline:
//!
//! - [`features`]: sparse binary feature vectors (sorted unique ids).
//! - [`density`]: the per-feature KT factor table and its log-space
//!   product evaluation.
//! - [`bonus`]: pseudo-counts and exploration bonuses derived from
//!   density evaluations.
//! - [`value`]: sparse linear action-value functions with replacing
//!   eligibility traces.
//! - [`agent`]: SARSA(lambda) control loops — a split extrinsic/intrinsic
//!   two-head learner, a combined augmented-reward learner, and an
//!   epsilon-greedy baseline.
//! - [`envs`]: small hard-exploration benchmark environments.
//! - [`snapshot`]: serializable snapshots of tables, weights, and whole
//!   agents.
//!
//! The crate is `no_std`-compatible (with `alloc`) when built without the
//! default `std` feature; file IO, experiment orchestration, and the CLI
//! live in the companion `phieb-harness` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(missing_docs)]

extern crate alloc;

pub mod agent;
pub mod bonus;
pub mod density;
pub mod envs;
pub mod features;
mod math;
pub mod snapshot;
pub mod value;

pub use agent::{ActionSelection, Agent, AgentConfig, Architecture, EpsilonSchedule};
pub use bonus::{BonusConfig, PseudoCountVariant};
pub use density::FactorTable;
pub use features::{FeatureId, FeatureVector};
pub use value::LinearQ;

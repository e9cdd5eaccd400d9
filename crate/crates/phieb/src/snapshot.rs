//! Serializable checkpoints of a whole [`Agent`].
//!
//! A [`Checkpoint`] bundles both value heads, the density model, the set
//! of observed feature ids, the global step count, and the behaviour rng
//! mid-stream, so a restored agent continues exactly where the original
//! left off. Take checkpoints between episodes: the pending state-action
//! pair is deliberately not part of the snapshot, and a restored agent
//! starts fresh at its next [`Agent::begin_episode`].
//!
//! The types here are plain data with `serde` derives; pick any format
//! (the companion binary uses JSON).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentConfig, Architecture, ConfigError};
use crate::density::FactorTable;
use crate::features::FeatureId;
use crate::value::LinearQ;

/// Version tag of the checkpoint layout.
pub const SNAPSHOT_VERSION: u32 = 1;

/// Wire form of a [`FactorTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorTableSnapshot {
    /// Number of observations recorded.
    pub t: u64,
    /// `(raw feature id, activation probability)` pairs, strictly
    /// ascending by id.
    pub factors: Vec<(u64, f64)>,
}

impl From<&FactorTable> for FactorTableSnapshot {
    fn from(table: &FactorTable) -> Self {
        FactorTableSnapshot {
            t: table.t(),
            factors: table.factors().map(|(id, p)| (id.raw(), p)).collect(),
        }
    }
}

/// Wire form of a [`LinearQ`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearQSnapshot {
    /// Per-action `(raw feature id, weight)` pairs, strictly ascending by
    /// id within each action.
    pub weights: Vec<Vec<(u64, f64)>>,
    /// Per-action `(raw feature id, trace)` pairs, strictly ascending by
    /// id within each action.
    pub traces: Vec<Vec<(u64, f64)>>,
}

impl From<&LinearQ> for LinearQSnapshot {
    fn from(q: &LinearQ) -> Self {
        let flatten = |maps: &[BTreeMap<FeatureId, f64>]| {
            maps.iter()
                .map(|m| m.iter().map(|(&id, &x)| (id.raw(), x)).collect())
                .collect()
        };
        LinearQSnapshot {
            weights: flatten(q.weights_maps()),
            traces: flatten(q.traces_maps()),
        }
    }
}

/// A whole agent, frozen into serializable data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Layout version; always [`SNAPSHOT_VERSION`] when written by this
    /// crate.
    pub version: u32,
    /// Head layout the snapshot was taken under.
    pub architecture: Architecture,
    /// Global training steps taken.
    pub step_count: u64,
    /// Extrinsic head.
    pub q_ext: LinearQSnapshot,
    /// Intrinsic head; present exactly for the split architecture.
    pub q_int: Option<LinearQSnapshot>,
    /// Density model.
    pub density: FactorTableSnapshot,
    /// Distinct raw feature ids observed so far, strictly ascending.
    pub seen: Vec<u64>,
    /// Behaviour rng, mid-stream.
    pub rng: ChaCha8Rng,
}

/// Why a checkpoint was rejected on restore.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnapshotError {
    /// The version tag is not [`SNAPSHOT_VERSION`].
    Version {
        /// The tag found in the checkpoint.
        found: u32,
    },
    /// The restoring config's architecture differs from the snapshot's.
    Architecture {
        /// Architecture requested by the config.
        config: Architecture,
        /// Architecture recorded in the checkpoint.
        snapshot: Architecture,
    },
    /// The intrinsic head's presence contradicts the architecture tag.
    HeadShape,
    /// The heads disagree about the action count, or it is zero.
    Actions,
    /// A density probability lies outside `(0, 1)`.
    Probability {
        /// Raw id of the offending factor.
        id: u64,
        /// The offending value.
        value: f64,
    },
    /// An id list is not strictly ascending.
    UnsortedIds,
    /// The agent configuration itself is invalid.
    Config(ConfigError),
}

impl From<ConfigError> for SnapshotError {
    fn from(e: ConfigError) -> Self {
        SnapshotError::Config(e)
    }
}

impl fmt::Display for SnapshotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapshotError::Version { found } => write!(
                f,
                "unsupported checkpoint version {found} (this crate writes {SNAPSHOT_VERSION})"
            ),
            SnapshotError::Architecture { config, snapshot } => write!(
                f,
                "config wants the {config} architecture but the checkpoint holds {snapshot}"
            ),
            SnapshotError::HeadShape => {
                write!(f, "intrinsic head presence contradicts the architecture tag")
            }
            SnapshotError::Actions => write!(f, "inconsistent or zero action count"),
            SnapshotError::Probability { id, value } => {
                write!(f, "density factor {id} holds probability {value} outside (0, 1)")
            }
            SnapshotError::UnsortedIds => write!(f, "feature ids must be strictly ascending"),
            SnapshotError::Config(e) => write!(f, "invalid agent config: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SnapshotError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SnapshotError::Config(e) => Some(e),
            _ => None,
        }
    }
}

fn check_ascending(pairs: &[(u64, f64)]) -> Result<(), SnapshotError> {
    if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(SnapshotError::UnsortedIds);
    }
    Ok(())
}

fn build_linear(snapshot: &LinearQSnapshot) -> Result<LinearQ, SnapshotError> {
    if snapshot.weights.is_empty() || snapshot.weights.len() != snapshot.traces.len() {
        return Err(SnapshotError::Actions);
    }
    let build = |lists: &[Vec<(u64, f64)>]| -> Result<Vec<BTreeMap<FeatureId, f64>>, SnapshotError> {
        lists
            .iter()
            .map(|pairs| {
                check_ascending(pairs)?;
                Ok(pairs.iter().map(|&(id, x)| (FeatureId(id), x)).collect())
            })
            .collect()
    };
    let mut q = LinearQ::new(snapshot.weights.len());
    q.set_weights(build(&snapshot.weights)?);
    q.set_traces(build(&snapshot.traces)?);
    Ok(q)
}

fn build_density(snapshot: &FactorTableSnapshot) -> Result<FactorTable, SnapshotError> {
    check_ascending(&snapshot.factors)?;
    for &(id, p) in &snapshot.factors {
        if !(p > 0.0 && p < 1.0) {
            return Err(SnapshotError::Probability { id, value: p });
        }
    }
    let factors = snapshot
        .factors
        .iter()
        .map(|&(id, p)| (FeatureId(id), p))
        .collect();
    Ok(FactorTable::from_parts(factors, snapshot.t))
}

impl Agent {
    /// Freezes the agent into a serializable [`Checkpoint`].
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: SNAPSHOT_VERSION,
            architecture: self.cfg.architecture,
            step_count: self.step_count,
            q_ext: LinearQSnapshot::from(&self.q_ext),
            q_int: self.q_int.as_ref().map(LinearQSnapshot::from),
            density: FactorTableSnapshot::from(&self.density),
            seen: self.seen.iter().map(|id| id.raw()).collect(),
            rng: self.rng.clone(),
        }
    }

    /// Rebuilds an agent from a checkpoint, resuming the original's value
    /// estimates, density model, schedule position, and rng stream.
    pub fn restore(cfg: AgentConfig, checkpoint: &Checkpoint) -> Result<Agent, SnapshotError> {
        cfg.validate()?;
        if checkpoint.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version {
                found: checkpoint.version,
            });
        }
        if cfg.architecture != checkpoint.architecture {
            return Err(SnapshotError::Architecture {
                config: cfg.architecture,
                snapshot: checkpoint.architecture,
            });
        }
        if checkpoint.q_int.is_some() != (checkpoint.architecture == Architecture::Split) {
            return Err(SnapshotError::HeadShape);
        }
        let q_ext = build_linear(&checkpoint.q_ext)?;
        let q_int = checkpoint
            .q_int
            .as_ref()
            .map(|snapshot| {
                let q = build_linear(snapshot)?;
                if q.num_actions() != q_ext.num_actions() {
                    return Err(SnapshotError::Actions);
                }
                Ok(q)
            })
            .transpose()?;
        let density = build_density(&checkpoint.density)?;
        if checkpoint.seen.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SnapshotError::UnsortedIds);
        }
        let seen: BTreeSet<FeatureId> = checkpoint.seen.iter().map(|&id| FeatureId(id)).collect();
        Ok(Agent {
            cfg,
            q_ext,
            q_int,
            density,
            seen,
            step_count: checkpoint.step_count,
            rng: checkpoint.rng.clone(),
            pending: None,
        })
    }
}

//! Sparse binary feature vectors.
//!
//! A state observation is encoded as the set of feature ids that are
//! active (value 1); everything not listed is inactive (value 0). Ids are
//! dense per-run integers assigned by an environment's feature map — there
//! is no global registry. A [`FeatureVector`] stores the active ids sorted
//! and deduplicated, which makes membership a binary search and
//! intersection a linear merge walk.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a single binary feature.
///
/// Ids are plain integers; equality of ids across two states means the
/// states share that feature.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct FeatureId(pub u64);

impl FeatureId {
    /// Creates an id from a raw integer.
    pub const fn new(raw: u64) -> Self {
        FeatureId(raw)
    }

    /// The raw integer value of the id.
    pub const fn raw(self) -> u64 {
        self.0
    }
}

impl From<u64> for FeatureId {
    fn from(raw: u64) -> Self {
        FeatureId(raw)
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Why a raw id sequence is not a valid feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationError {
    /// Two adjacent ids are out of order; `position` indexes the second.
    Unsorted {
        /// Index of the element that is smaller than its predecessor.
        position: usize,
    },
    /// Two adjacent ids are equal; `position` indexes the second.
    Duplicate {
        /// Index of the repeated element.
        position: usize,
    },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::Unsorted { position } => {
                write!(f, "feature ids out of order at position {position}")
            }
            ValidationError::Duplicate { position } => {
                write!(f, "duplicate feature id at position {position}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ValidationError {}

/// Checks that `ids` is strictly increasing (sorted, no duplicates).
///
/// Returns the position of the first offending element otherwise.
pub fn validate(ids: &[FeatureId]) -> Result<(), ValidationError> {
    for (position, pair) in ids.windows(2).enumerate() {
        if pair[1] < pair[0] {
            return Err(ValidationError::Unsorted {
                position: position + 1,
            });
        }
        if pair[1] == pair[0] {
            return Err(ValidationError::Duplicate {
                position: position + 1,
            });
        }
    }
    Ok(())
}

/// An immutable set of active feature ids, sorted and unique.
///
/// The empty vector is legal: it describes a state with no active
/// features.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct FeatureVector {
    ids: Vec<FeatureId>,
}

impl FeatureVector {
    /// The empty feature vector.
    pub fn empty() -> Self {
        FeatureVector { ids: Vec::new() }
    }

    /// Builds a vector from arbitrary ids, sorting and deduplicating.
    pub fn from_ids<I, T>(ids: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<FeatureId>,
    {
        let mut ids: Vec<FeatureId> = ids.into_iter().map(Into::into).collect();
        ids.sort_unstable();
        ids.dedup();
        FeatureVector { ids }
    }

    /// Builds a vector from ids that are already sorted and unique.
    ///
    /// Fails with the offending position if they are not.
    pub fn try_from_sorted(ids: Vec<FeatureId>) -> Result<Self, ValidationError> {
        validate(&ids)?;
        Ok(FeatureVector { ids })
    }

    /// The active ids, sorted ascending.
    pub fn ids(&self) -> &[FeatureId] {
        &self.ids
    }

    /// Number of active features.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Whether no feature is active.
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Whether `id` is active in this vector.
    pub fn contains(&self, id: FeatureId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    /// Iterates over the active ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = FeatureId> + '_ {
        self.ids.iter().copied()
    }

    /// The set of ids active in both vectors (linear merge walk).
    pub fn intersect(&self, other: &FeatureVector) -> FeatureVector {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    out.push(self.ids[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        FeatureVector { ids: out }
    }
}

impl<'a> IntoIterator for &'a FeatureVector {
    type Item = FeatureId;
    type IntoIter = core::iter::Copied<core::slice::Iter<'a, FeatureId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.ids.iter().copied()
    }
}

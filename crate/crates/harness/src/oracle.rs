//! Brute-force reference computations.
//!
//! Everything here is written the slow, obvious way on purpose: direct
//! products instead of log-space sums, explicit counting instead of
//! incremental updates.  Tests compare the optimised library against
//! these, so the two must not share code.

use std::collections::BTreeMap;

/// Per-feature sequence-prediction probabilities computed directly from
/// activation histories via the add-half counting rule: a feature active
/// `n` times in `t` observations gets probability `(n + 1/2) / (t + 1)`.
///
/// `histories` is feature-major: one activation sequence per feature, all
/// the same length.  An empty history yields the prior 0.5.
///
/// # Panics
///
/// Panics if the sequences have different lengths.
pub fn oracle_kt(histories: &[Vec<bool>]) -> Vec<f64> {
    if let Some(first) = histories.first() {
        for h in histories {
            assert_eq!(h.len(), first.len(), "histories must share a length");
        }
    }
    histories
        .iter()
        .map(|h| {
            let t = h.len() as f64;
            let n = h.iter().filter(|&&active| active).count() as f64;
            (n + 0.5) / (t + 1.0)
        })
        .collect()
}

/// The visit density of an observation under a table of per-feature
/// activation counts, computed as a direct product with no logarithms.
///
/// `counts` maps every *registered* feature id to the number of times it
/// has been active in `t` observations; ids absent from `counts` are
/// unregistered and contribute nothing.  Active registered features
/// contribute `(n + 1/2) / (t + 1)`, inactive registered features the
/// complement.  An empty table has density 1.
pub fn oracle_density(counts: &BTreeMap<u64, u64>, t: u64, active: &[u64]) -> f64 {
    let mut product = 1.0;
    for (&id, &n) in counts {
        let p_active = (n as f64 + 0.5) / (t as f64 + 1.0);
        if active.contains(&id) {
            product *= p_active;
        } else {
            product *= 1.0 - p_active;
        }
    }
    product
}

/// Exact visit counts per state for a tabular trajectory: how often each
/// state id appears.  The ground truth that pseudo-counts are tracked
/// against.
pub fn oracle_tabular_counts(trajectory: &[u64]) -> BTreeMap<u64, u64> {
    let mut counts = BTreeMap::new();
    for &state in trajectory {
        *counts.entry(state).or_insert(0) += 1;
    }
    counts
}

//! Factored visit-density model over sparse binary features.
//!
//! Each feature id `i` gets an independent Krichevsky-Trofimov (KT)
//! estimator of the probability that `i` is active in an observation. After
//! `t` recorded observations in which `i` was active `n` times, the KT
//! estimate is `(n + 1/2) / (t + 1)`. The visit density of a feature
//! vector is the product over features of the probability of that
//! feature's observed value (active or inactive), evaluated in log space
//! so that products over many features cannot underflow.
//!
//! The table is sparse: it stores estimators only for ids it has seen.
//! Ids never stored contribute the *prototype* estimate `0.5 / (t + 1)`
//! when they appear active in a query — the KT estimate of a feature with
//! zero activations — and contribute nothing when inactive, since an
//! unbounded universe of never-active features cannot be enumerated.
//!
//! Updates are incremental: recording an observation rescales every stored
//! probability by `(t + 1) / (t + 2)` and adds `1 / (t + 2)` to the active
//! ones, which reproduces the closed-form KT estimate exactly (up to float
//! rounding) without storing counts.

use alloc::collections::BTreeMap;

use crate::features::{FeatureId, FeatureVector};
use crate::math;

/// Closed-form KT estimate: probability of a feature being active after it
/// was active `activations` times in `t` observations.
///
/// # Panics
///
/// Panics if `activations > t`: a feature cannot be active more often than
/// observations were recorded.
pub fn kt_estimate(activations: u64, t: u64) -> f64 {
    assert!(
        activations <= t,
        "activation count {activations} exceeds observation count {t}"
    );
    (activations as f64 + 0.5) / (t as f64 + 1.0)
}

/// Sparse product-of-KT-estimators visit-density model.
///
/// Stores one activation probability per seen feature id plus the global
/// observation count `t`. Evaluation ([`log_visit_density`]) is pure;
/// only [`update`] and [`register`] mutate the table.
///
/// [`log_visit_density`]: FactorTable::log_visit_density
/// [`update`]: FactorTable::update
/// [`register`]: FactorTable::register
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorTable {
    factors: BTreeMap<FeatureId, f64>,
    t: u64,
}

impl FactorTable {
    /// An empty table at `t = 0`.
    pub fn new() -> Self {
        FactorTable::default()
    }

    /// Number of observations recorded so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Number of stored per-feature estimators.
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    /// Whether no estimator is stored yet.
    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// KT estimate for a feature that has never been active: `0.5 / (t+1)`.
    pub fn prototype(&self) -> f64 {
        0.5 / (self.t as f64 + 1.0)
    }

    /// The stored activation probability for `id`, if any.
    pub fn probability(&self, id: FeatureId) -> Option<f64> {
        self.factors.get(&id).copied()
    }

    /// Iterates over stored `(id, activation probability)` pairs in id order.
    pub fn factors(&self) -> impl Iterator<Item = (FeatureId, f64)> + '_ {
        self.factors.iter().map(|(&id, &p)| (id, p))
    }

    pub(crate) fn from_parts(factors: BTreeMap<FeatureId, f64>, t: u64) -> Self {
        FactorTable { factors, t }
    }

    /// Ensures `id` has a stored estimator, inserting the prototype if absent.
    ///
    /// Registering is equivalent to having tracked the feature as inactive
    /// since the beginning: the inserted prototype decays under subsequent
    /// updates exactly like a count-zero estimator started at `t = 0`.
    pub fn register(&mut self, id: FeatureId) {
        let prototype = self.prototype();
        self.factors.entry(id).or_insert(prototype);
    }

    /// Log visit density of `v` under the current table. Pure.
    ///
    /// Sums `ln p_i` for active stored ids, `ln prototype` for active
    /// unstored ids, and `ln (1 - p_j)` for stored ids not active in `v`.
    /// Returns 0 exactly when the table is empty and `v` is empty.
    pub fn log_visit_density(&self, v: &FeatureVector) -> f64 {
        let mut log_density = 0.0;
        let mut unstored_active = 0u64;
        let mut stored = self.factors.iter();
        let mut next = stored.next();
        for id in v {
            // Stored ids below `id` are inactive in `v`.
            while let Some((&fid, &p)) = next {
                if fid >= id {
                    break;
                }
                log_density += math::ln_1p(-p);
                next = stored.next();
            }
            match next {
                Some((&fid, &p)) if fid == id => {
                    log_density += math::ln(p);
                    next = stored.next();
                }
                _ => unstored_active += 1,
            }
        }
        while let Some((_, &p)) = next {
            log_density += math::ln_1p(-p);
            next = stored.next();
        }
        if unstored_active > 0 {
            log_density += unstored_active as f64 * math::ln(self.prototype());
        }
        log_density
    }

    /// Records the observation `v` and advances `t` by one.
    ///
    /// Active ids not yet stored are first inserted at the prototype, then
    /// every stored probability is rescaled by `(t+1)/(t+2)` and the active
    /// ones receive `+ 1/(t+2)`; a freshly inserted id therefore ends at
    /// `1.5/(t+2)`, the KT estimate of one activation in `t+1` observations.
    pub fn update(&mut self, v: &FeatureVector) {
        let prototype = self.prototype();
        for id in v {
            self.factors.entry(id).or_insert(prototype);
        }
        let decay = (self.t as f64 + 1.0) / (self.t as f64 + 2.0);
        for p in self.factors.values_mut() {
            *p *= decay;
        }
        let increment = 1.0 / (self.t as f64 + 2.0);
        for id in v {
            *self
                .factors
                .get_mut(&id)
                .expect("active ids were inserted above") += increment;
        }
        self.t += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fv(ids: &[u64]) -> FeatureVector {
        FeatureVector::from_ids(ids.iter().copied())
    }

    /// Independent closed-form probability of `v` given activation counts:
    /// linear-space product, no incremental arithmetic.
    fn direct_product(table: &FactorTable, v: &FeatureVector) -> f64 {
        let mut density = 1.0;
        for (id, p) in table.factors() {
            density *= if v.contains(id) { p } else { 1.0 - p };
        }
        for id in v {
            if table.probability(id).is_none() {
                density *= table.prototype();
            }
        }
        density
    }

    #[test]
    fn kt_estimate_examples() {
        assert_relative_eq!(kt_estimate(0, 3), 0.125);
        assert_relative_eq!(kt_estimate(3, 3), 0.875);
        assert_relative_eq!(kt_estimate(0, 0), 0.5);
    }

    #[test]
    #[should_panic(expected = "exceeds observation count")]
    fn kt_estimate_rejects_count_above_t() {
        kt_estimate(4, 3);
    }

    #[test]
    fn prototype_matches_zero_count_estimate() {
        let mut table = FactorTable::new();
        assert_relative_eq!(table.prototype(), 0.5);
        for _ in 0..3 {
            table.update(&fv(&[2]));
        }
        assert_relative_eq!(table.prototype(), 0.125);
        assert_relative_eq!(table.prototype(), kt_estimate(0, 3));
    }

    #[test]
    fn update_moves_factor_toward_observation() {
        // Active feature at t=0: 0.5 -> 0.75.
        let mut table = FactorTable::new();
        table.register(FeatureId(7));
        table.update(&fv(&[7]));
        assert_relative_eq!(table.probability(FeatureId(7)).unwrap(), 0.75);

        // Active feature with p = 0.875 at t=3: -> 0.9.
        let mut table = FactorTable::new();
        for _ in 0..3 {
            table.update(&fv(&[7]));
        }
        assert_relative_eq!(
            table.probability(FeatureId(7)).unwrap(),
            0.875,
            max_relative = 1e-12
        );
        table.update(&fv(&[7]));
        assert_relative_eq!(
            table.probability(FeatureId(7)).unwrap(),
            0.9,
            max_relative = 1e-12
        );

        // Inactive feature with p = 0.125 at t=3: -> 0.1.
        let mut table = FactorTable::new();
        table.register(FeatureId(4));
        for _ in 0..3 {
            table.update(&FeatureVector::empty());
        }
        assert_relative_eq!(
            table.probability(FeatureId(4)).unwrap(),
            0.125,
            max_relative = 1e-12
        );
        table.update(&FeatureVector::empty());
        assert_relative_eq!(
            table.probability(FeatureId(4)).unwrap(),
            0.1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn fresh_active_id_lands_at_one_activation_estimate() {
        let mut table = FactorTable::new();
        for _ in 0..3 {
            table.update(&fv(&[1]));
        }
        // Id 9 first appears at t=3: must equal KT(1, 4) = 1.5/5.
        table.update(&fv(&[1, 9]));
        assert_relative_eq!(
            table.probability(FeatureId(9)).unwrap(),
            kt_estimate(1, 4),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            table.probability(FeatureId(9)).unwrap(),
            0.3,
            max_relative = 1e-12
        );
    }

    /// Three observations of (0,1,0) over ids {1,2,3}, then queries of
    /// (1,1,0) and (1,0,1). The registration order of the never-active ids
    /// must not matter.
    #[test]
    fn worked_example_densities() {
        for register_first in [true, false] {
            let mut table = FactorTable::new();
            if register_first {
                table.register(FeatureId(1));
                table.register(FeatureId(3));
            }
            for _ in 0..3 {
                table.update(&fv(&[2]));
            }
            if !register_first {
                table.register(FeatureId(1));
                table.register(FeatureId(3));
            }
            let rho_a = math::exp(table.log_visit_density(&fv(&[1, 2])));
            let rho_b = math::exp(table.log_visit_density(&fv(&[1, 3])));
            assert_relative_eq!(rho_a, 49.0 / 512.0, max_relative = 1e-12);
            assert_relative_eq!(rho_b, 1.0 / 512.0, max_relative = 1e-12);
            // The query sharing more features with the history is likelier.
            assert!(rho_a > rho_b);
        }
    }

    #[test]
    fn density_of_recorded_vector() {
        let mut table = FactorTable::new();
        for _ in 0..3 {
            table.update(&fv(&[2]));
        }
        assert_relative_eq!(
            math::exp(table.log_visit_density(&fv(&[2]))),
            0.875,
            max_relative = 1e-12
        );
    }

    #[test]
    fn empty_table_empty_query_is_log_one() {
        let table = FactorTable::new();
        assert_eq!(table.log_visit_density(&FeatureVector::empty()), 0.0);
    }

    #[test]
    fn empty_table_uses_prototype_for_all_active() {
        let table = FactorTable::new();
        let lp = table.log_visit_density(&fv(&[4, 5]));
        assert_relative_eq!(math::exp(lp), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn evaluation_is_pure() {
        let mut table = FactorTable::new();
        table.update(&fv(&[1]));
        let before = table.clone();
        let _ = table.log_visit_density(&fv(&[1, 2, 3]));
        assert_eq!(table, before);
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn table_grows_only_with_distinct_ids() {
        let mut table = FactorTable::new();
        for step in 0..100u64 {
            table.update(&fv(&[step % 7, 100 + step % 3]));
        }
        assert_eq!(table.len(), 10);
        assert_eq!(table.t(), 100);
    }

    proptest! {
        /// Incremental updates must reproduce the closed-form KT estimate
        /// for every stored id's true activation count.
        #[test]
        fn incremental_matches_closed_form(
            history in proptest::collection::vec(
                proptest::collection::vec(0u64..50, 0..8), 1..200),
        ) {
            let mut table = FactorTable::new();
            let mut counts: BTreeMap<FeatureId, u64> = BTreeMap::new();
            for step in &history {
                let v = FeatureVector::from_ids(step.iter().copied());
                for id in &v {
                    *counts.entry(id).or_insert(0) += 1;
                }
                table.update(&v);
            }
            let t = history.len() as u64;
            prop_assert_eq!(table.t(), t);
            for (id, p) in table.factors() {
                let expected = kt_estimate(counts[&id], t);
                prop_assert!((p - expected).abs() < 1e-12,
                    "id {} incremental {} vs closed form {}", id, p, expected);
            }
        }

        /// Log-space evaluation agrees with the direct linear product.
        #[test]
        fn log_space_matches_direct_product(
            history in proptest::collection::vec(
                proptest::collection::vec(0u64..20, 0..6), 1..60),
            query in proptest::collection::vec(0u64..25, 0..10),
        ) {
            let mut table = FactorTable::new();
            for step in &history {
                table.update(&FeatureVector::from_ids(step.iter().copied()));
            }
            let v = FeatureVector::from_ids(query);
            let from_log = math::exp(table.log_visit_density(&v));
            let direct = direct_product(&table, &v);
            prop_assert!((from_log - direct).abs() <= 1e-12 * direct.max(1e-300),
                "log-space {} vs direct {}", from_log, direct);
        }

        /// Recording any observation strictly raises its own density.
        #[test]
        fn update_strictly_raises_density(
            history in proptest::collection::vec(
                proptest::collection::vec(0u64..30, 0..6), 0..80),
            observed in proptest::collection::vec(0u64..30, 0..8),
        ) {
            let mut table = FactorTable::new();
            for step in &history {
                table.update(&FeatureVector::from_ids(step.iter().copied()));
            }
            let v = FeatureVector::from_ids(observed);
            prop_assume!(!(v.is_empty() && table.is_empty()));
            let before = table.log_visit_density(&v);
            table.update(&v);
            let after = table.log_visit_density(&v);
            prop_assert!(after > before, "density did not increase: {} -> {}", before, after);
        }

        /// Stored probabilities stay inside (0, 1) and each factor's
        /// active/inactive probabilities sum to one exactly.
        #[test]
        fn factors_stay_normalized(
            history in proptest::collection::vec(
                proptest::collection::vec(0u64..40, 0..10), 1..150),
        ) {
            let mut table = FactorTable::new();
            for step in &history {
                table.update(&FeatureVector::from_ids(step.iter().copied()));
            }
            for (_, p) in table.factors() {
                prop_assert!(p > 0.0 && p < 1.0);
                prop_assert_eq!(p + (1.0 - p), 1.0);
            }
        }

        /// Log density is never positive, and zero only for the trivial case.
        #[test]
        fn log_density_nonpositive(
            history in proptest::collection::vec(
                proptest::collection::vec(0u64..30, 0..6), 0..60),
            query in proptest::collection::vec(0u64..40, 0..10),
        ) {
            let mut table = FactorTable::new();
            for step in &history {
                table.update(&FeatureVector::from_ids(step.iter().copied()));
            }
            let v = FeatureVector::from_ids(query);
            let lp = table.log_visit_density(&v);
            if table.is_empty() && v.is_empty() {
                prop_assert_eq!(lp, 0.0);
            } else {
                prop_assert!(lp <= 0.0);
            }
        }
    }

    /// Registered-but-never-active ids track the prototype exactly, no
    /// matter when they were registered.
    #[test]
    fn registration_time_is_invisible() {
        let mut early = FactorTable::new();
        early.register(FeatureId(42));
        let mut late = FactorTable::new();
        let steps: Vec<FeatureVector> = (0..20).map(|s| fv(&[s % 5])).collect();
        for v in &steps {
            early.update(v);
            late.update(v);
        }
        late.register(FeatureId(42));
        let (pe, pl) = (
            early.probability(FeatureId(42)).unwrap(),
            late.probability(FeatureId(42)).unwrap(),
        );
        assert_relative_eq!(pe, pl, max_relative = 1e-12);
        assert_relative_eq!(pe, kt_estimate(0, 20), max_relative = 1e-12);
    }
}

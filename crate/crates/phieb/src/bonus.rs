//! Pseudo-counts and exploration bonuses from density recoding.
//!
//! Recording an observation strictly raises its own visit density. The gap
//! between the density `rho` just before recording and `rho'` just after
//! implies how many equivalent prior visits the model had assigned to that
//! observation — its *pseudo-count*. An optimistic exploration bonus
//! `beta / sqrt(pseudo_count)` then rewards the agent for visiting states
//! whose features are still novel. The bonus depends only on the state's
//! features, never on the action taken.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::density::FactorTable;
use crate::features::FeatureVector;
use crate::math;

/// How the pseudo-count is derived from the two density evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PseudoCountVariant {
    /// `rho (1 - rho') / (rho' - rho)`: the value consistent with both
    /// `rho = n / t` and `rho' = (n + 1) / (t + 1)` holding exactly. For a
    /// single always-active feature this reproduces the KT count `t + 1/2`.
    #[default]
    Exact,
    /// `1 / (rho'/rho - 1)`: drops the `(1 - rho')` correction. Cheaper,
    /// and close to the exact form whenever `rho'` is small, but inflated
    /// by `1 / (1 - rho')` when the density is large.
    Ratio,
}

/// Bonus scale and pseudo-count variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BonusConfig {
    /// Bonus scale `beta`; the bonus is `beta / sqrt(pseudo_count)`.
    pub beta: f64,
    /// Pseudo-count derivation.
    pub variant: PseudoCountVariant,
}

impl Default for BonusConfig {
    fn default() -> Self {
        BonusConfig {
            beta: 0.05,
            variant: PseudoCountVariant::Exact,
        }
    }
}

/// Error from a pseudo-count derivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BonusError {
    /// The post-recording density did not strictly exceed the
    /// pre-recording density. Recording always moves every factor toward
    /// the observation, so this indicates a corrupted table or a
    /// degenerate call (for example an empty observation on an empty
    /// table, where there is no factor to move).
    NonincreasingDensity {
        /// Log density before recording.
        log_rho: f64,
        /// Log density after recording.
        log_rho_prime: f64,
    },
}

impl fmt::Display for BonusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BonusError::NonincreasingDensity {
                log_rho,
                log_rho_prime,
            } => write!(
                f,
                "visit density did not increase after recording: \
                 log rho {log_rho} -> log rho' {log_rho_prime}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for BonusError {}

/// Pseudo-count from log densities before (`log_rho`) and after
/// (`log_rho_prime`) recording the same observation.
///
/// Fails with [`BonusError::NonincreasingDensity`] unless
/// `log_rho_prime > log_rho` strictly.
pub fn pseudo_count(
    log_rho: f64,
    log_rho_prime: f64,
    variant: PseudoCountVariant,
) -> Result<f64, BonusError> {
    let delta = log_rho_prime - log_rho;
    if !(delta > 0.0) {
        return Err(BonusError::NonincreasingDensity {
            log_rho,
            log_rho_prime,
        });
    }
    // expm1 keeps precision when consecutive densities are nearly equal,
    // which is exactly the well-visited regime where counts are large.
    let ratio_minus_one = math::exp_m1(delta);
    Ok(match variant {
        PseudoCountVariant::Ratio => 1.0 / ratio_minus_one,
        PseudoCountVariant::Exact => -math::exp_m1(log_rho_prime) / ratio_minus_one,
    })
}

/// Everything produced by one exploration-bonus evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusOutcome {
    /// Log visit density before the observation was recorded.
    pub log_rho: f64,
    /// Log visit density after the observation was recorded.
    pub log_rho_prime: f64,
    /// Derived pseudo-count.
    pub pseudo_count: f64,
    /// `beta / sqrt(pseudo_count)`.
    pub bonus: f64,
}

/// Evaluates the density of `v`, records `v` into `table`, re-evaluates,
/// and derives the pseudo-count and bonus.
///
/// This is the one call per time step that mutates the density model; the
/// two evaluations around it are pure.
pub fn exploration_bonus(
    table: &mut FactorTable,
    v: &FeatureVector,
    cfg: &BonusConfig,
) -> Result<BonusOutcome, BonusError> {
    let log_rho = table.log_visit_density(v);
    table.update(v);
    let log_rho_prime = table.log_visit_density(v);
    let pseudo_count = pseudo_count(log_rho, log_rho_prime, cfg.variant)?;
    Ok(BonusOutcome {
        log_rho,
        log_rho_prime,
        pseudo_count,
        bonus: cfg.beta / math::sqrt(pseudo_count),
    })
}

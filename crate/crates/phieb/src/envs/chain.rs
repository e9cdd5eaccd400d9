//! A linear chain with a slippery rightward action and a single goal.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::FeatureVector;

use super::{Environment, FeatureMapKind, Step};

/// Move one cell toward the start (always succeeds).
pub const LEFT: usize = 0;
/// Move one cell toward the goal (slips backward with probability `slip`).
pub const RIGHT: usize = 1;

/// A chain of `length` cells. The agent starts at cell 0; cell
/// `length - 1` pays reward 1 and ends the episode. RIGHT advances one
/// cell but slips one cell backward with probability `slip`; LEFT always
/// moves one cell backward. Movement is clamped at cell 0.
///
/// The only reward sits at the far end, behind `length - 1` consecutive
/// cells of stochastic headwind: an undirected random walk's chance of
/// ever reaching it within an episode is negligible, while a committed
/// rightward policy still succeeds almost always.
///
/// Feature maps: tabular is the cell one-hot (`length` ids); factored
/// adds a coarse region id (`cell / 4`) shared by neighbouring cells.
#[derive(Debug, Clone)]
pub struct SparseChain {
    length: u64,
    slip: f64,
    map: FeatureMapKind,
    cell: u64,
    terminal: bool,
    rng: ChaCha8Rng,
}

impl SparseChain {
    /// Default number of cells.
    pub const DEFAULT_LENGTH: u64 = 20;
    /// Default slip probability of the RIGHT action. At 0.3 an
    /// undirected random walk reaches the far end of the default chain
    /// in well under 0.1% of 200-step episodes, while a committed
    /// rightward policy still does so almost surely.
    pub const DEFAULT_SLIP: f64 = 0.3;

    /// Creates a chain with the given geometry.
    ///
    /// # Panics
    ///
    /// Panics if `length < 2` or `slip` is outside `[0, 1)`.
    pub fn new(length: u64, slip: f64, map: FeatureMapKind) -> Self {
        assert!(length >= 2, "chain needs at least two cells");
        assert!((0.0..1.0).contains(&slip), "slip must lie in [0, 1)");
        SparseChain {
            length,
            slip,
            map,
            cell: 0,
            terminal: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// The default 20-cell chain.
    pub fn default_chain(map: FeatureMapKind) -> Self {
        SparseChain::new(Self::DEFAULT_LENGTH, Self::DEFAULT_SLIP, map)
    }

    /// Number of cells.
    pub fn length(&self) -> u64 {
        self.length
    }

    /// Current cell of the agent.
    pub fn cell(&self) -> u64 {
        self.cell
    }

    fn observe(&self) -> FeatureVector {
        match self.map {
            FeatureMapKind::Tabular => FeatureVector::from_ids([self.cell]),
            FeatureMapKind::Factored => {
                FeatureVector::from_ids([self.cell, self.length + self.cell / 4])
            }
        }
    }
}

impl Environment for SparseChain {
    fn name(&self) -> &'static str {
        "sparse_chain"
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn step_cap(&self) -> u64 {
        200
    }

    fn reset(&mut self, seed: u64) -> FeatureVector {
        self.cell = 0;
        self.terminal = false;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.observe()
    }

    fn step(&mut self, action: usize) -> Step {
        assert!(!self.terminal, "episode is over; reset first");
        assert!(action < 2, "chain actions are LEFT (0) and RIGHT (1)");
        let moved_right = action == RIGHT && self.rng.gen::<f64>() >= self.slip;
        self.cell = if moved_right {
            self.cell + 1
        } else {
            self.cell.saturating_sub(1)
        };
        let reached_goal = self.cell == self.length - 1;
        self.terminal = reached_goal;
        Step {
            reward: if reached_goal { 1.0 } else { 0.0 },
            features: self.observe(),
            terminal: reached_goal,
        }
    }
}

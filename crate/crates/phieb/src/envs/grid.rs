//! A small grid paying a little reward for each first visit.

use alloc::vec::Vec;

use crate::features::FeatureVector;

use super::{Environment, FeatureMapKind, Step};

/// Move up one row.
pub const UP: usize = 0;
/// Move down one row.
pub const DOWN: usize = 1;
/// Move left one column.
pub const LEFT: usize = 2;
/// Move right one column.
pub const RIGHT: usize = 3;

/// Geometry and distractor settings for [`DenseGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseGridConfig {
    /// Grid width in cells.
    pub width: usize,
    /// Grid height in cells.
    pub height: usize,
    /// Number of distractor feature ids active on every observation.
    pub distractors: usize,
    /// Size of the rotating distractor id pool (must be positive when
    /// `distractors > 0`).
    pub distractor_pool: usize,
}

impl Default for DenseGridConfig {
    fn default() -> Self {
        DenseGridConfig {
            width: 8,
            height: 8,
            distractors: 0,
            distractor_pool: 0,
        }
    }
}

/// An `8x8` (by default) grid world. Each move onto a never-visited cell
/// pays reward 0.1; revisits pay nothing. The episode ends when every
/// cell has been visited. Movement into the border leaves the agent in
/// place. Transitions are deterministic.
///
/// With `distractors > 0` the observation additionally contains a window
/// of ids from a rotating pool that shifts every step, so many features
/// flip on and off each transition regardless of what the agent does —
/// a stand-in for environments whose observations churn on their own.
///
/// Feature maps: tabular is the cell one-hot; factored is row id plus
/// column id. Distractor ids follow after the map's own id range.
#[derive(Debug, Clone)]
pub struct DenseGrid {
    cfg: DenseGridConfig,
    map: FeatureMapKind,
    pos: (usize, usize),
    visited: Vec<bool>,
    visited_count: usize,
    steps_taken: u64,
    terminal: bool,
}

impl DenseGrid {
    /// Reward paid on each first visit to a cell.
    pub const FIRST_VISIT_REWARD: f64 = 0.1;

    /// Creates a grid world.
    ///
    /// # Panics
    ///
    /// Panics if the grid has fewer than two cells, or if `distractors`
    /// is positive with a pool smaller than the distractor count.
    pub fn new(cfg: DenseGridConfig, map: FeatureMapKind) -> Self {
        assert!(cfg.width * cfg.height >= 2, "grid needs at least two cells");
        if cfg.distractors > 0 {
            assert!(
                cfg.distractor_pool >= cfg.distractors,
                "distractor pool must hold at least one full window"
            );
        }
        let cells = cfg.width * cfg.height;
        DenseGrid {
            cfg,
            map,
            pos: (0, 0),
            visited: alloc::vec![false; cells],
            visited_count: 0,
            steps_taken: 0,
            terminal: false,
        }
    }

    /// The default 8x8 grid without distractors.
    pub fn default_grid(map: FeatureMapKind) -> Self {
        DenseGrid::new(DenseGridConfig::default(), map)
    }

    /// Number of distinct cells visited so far this episode.
    pub fn cells_visited(&self) -> usize {
        self.visited_count
    }

    /// Current `(row, column)` of the agent.
    pub fn position(&self) -> (usize, usize) {
        self.pos
    }

    fn cell_index(&self, pos: (usize, usize)) -> usize {
        pos.0 * self.cfg.width + pos.1
    }

    /// First id of the distractor range.
    pub fn distractor_base(&self) -> u64 {
        match self.map {
            FeatureMapKind::Tabular => (self.cfg.width * self.cfg.height) as u64,
            FeatureMapKind::Factored => (self.cfg.width + self.cfg.height) as u64,
        }
    }

    fn observe(&self) -> FeatureVector {
        let mut ids: Vec<u64> = match self.map {
            FeatureMapKind::Tabular => alloc::vec![self.cell_index(self.pos) as u64],
            FeatureMapKind::Factored => alloc::vec![
                self.pos.0 as u64,
                (self.cfg.height + self.pos.1) as u64,
            ],
        };
        if self.cfg.distractors > 0 {
            let base = self.distractor_base();
            let pool = self.cfg.distractor_pool as u64;
            let offset = self.steps_taken * self.cfg.distractors as u64;
            for j in 0..self.cfg.distractors as u64 {
                ids.push(base + (offset + j) % pool);
            }
        }
        FeatureVector::from_ids(ids)
    }

    fn mark_visited(&mut self) -> bool {
        let index = self.cell_index(self.pos);
        if self.visited[index] {
            false
        } else {
            self.visited[index] = true;
            self.visited_count += 1;
            true
        }
    }
}

impl Environment for DenseGrid {
    fn name(&self) -> &'static str {
        "dense_grid"
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn step_cap(&self) -> u64 {
        300
    }

    fn reset(&mut self, _seed: u64) -> FeatureVector {
        self.pos = (0, 0);
        self.visited.iter_mut().for_each(|v| *v = false);
        self.visited_count = 0;
        self.steps_taken = 0;
        self.terminal = false;
        // The start cell counts as visited but pays nothing.
        self.mark_visited();
        self.observe()
    }

    fn step(&mut self, action: usize) -> Step {
        assert!(!self.terminal, "episode is over; reset first");
        let (row, col) = self.pos;
        let target = match action {
            UP => (row.wrapping_sub(1), col),
            DOWN => (row + 1, col),
            LEFT => (row, col.wrapping_sub(1)),
            RIGHT => (row, col + 1),
            _ => panic!("grid actions are UP (0), DOWN (1), LEFT (2), RIGHT (3)"),
        };
        if target.0 < self.cfg.height && target.1 < self.cfg.width {
            self.pos = target;
        }
        self.steps_taken += 1;
        let first_visit = self.mark_visited();
        let all_visited = self.visited_count == self.visited.len();
        self.terminal = all_visited;
        Step {
            reward: if first_visit { Self::FIRST_VISIT_REWARD } else { 0.0 },
            features: self.observe(),
            terminal: all_visited,
        }
    }
}

//! Four rooms, locked doors, a key, and a distant goal.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Wall,
    Floor,
    Door,
    Key,
    Goal,
}

/// Why a layout grid could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutError {
    /// The grid has no rows.
    Empty,
    /// A row's length differs from the first row's.
    Ragged {
        /// Zero-based row index of the offending line.
        row: usize,
    },
    /// A character other than `# . K D S G`.
    UnknownChar {
        /// Zero-based row of the character.
        row: usize,
        /// Zero-based column of the character.
        col: usize,
        /// The character itself.
        ch: char,
    },
    /// The grid must contain exactly one `S`; it has `found`.
    StartCount {
        /// Number of `S` cells found.
        found: usize,
    },
    /// The grid must contain exactly one `K`; it has `found`.
    KeyCount {
        /// Number of `K` cells found.
        found: usize,
    },
    /// The grid must contain exactly one `G`; it has `found`.
    GoalCount {
        /// Number of `G` cells found.
        found: usize,
    },
}

impl fmt::Display for LayoutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutError::Empty => write!(f, "layout has no rows"),
            LayoutError::Ragged { row } => write!(f, "layout row {row} has a different length"),
            LayoutError::UnknownChar { row, col, ch } => {
                write!(f, "unknown layout character {ch:?} at row {row}, column {col}")
            }
            LayoutError::StartCount { found } => {
                write!(f, "layout needs exactly one start 'S', found {found}")
            }
            LayoutError::KeyCount { found } => {
                write!(f, "layout needs exactly one key 'K', found {found}")
            }
            LayoutError::GoalCount { found } => {
                write!(f, "layout needs exactly one goal 'G', found {found}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LayoutError {}

/// A grid world of four rooms behind locked doors.
///
/// The agent starts at `S`, must walk onto `K` to pick up the key, and can
/// then pass `D` door cells to reach the goal `G` (reward 1, terminal).
/// Walls (`#`) and locked doors block movement (the agent stays put).
/// Transitions are deterministic.
///
/// Feature maps: tabular is one id per `(row, column, key-held)` state;
/// factored is four ids — global row, global column, room quadrant, and
/// the key-held flag — so states in the same column of different rooms
/// share exactly the column id.
///
/// Layouts are plain text grids (`#` wall, `.` floor, `K` key, `D` door,
/// `S` start, `G` goal) parsed with [`KeyedRooms::from_layout`];
/// [`KeyedRooms::generate_layout`] produces the canonical four-room grid
/// at any room size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyedRooms {
    grid: Vec<Vec<Cell>>,
    width: usize,
    height: usize,
    start: (usize, usize),
    map: FeatureMapKind,
    pos: (usize, usize),
    has_key: bool,
    terminal: bool,
}

impl KeyedRooms {
    /// Default room side length of [`KeyedRooms::default_rooms`]: four
    /// rooms of 8x8 cells.
    pub const DEFAULT_ROOM_SIZE: usize = 8;

    /// Parses a text-grid layout.
    pub fn from_layout(layout: &str, map: FeatureMapKind) -> Result<Self, LayoutError> {
        let lines: Vec<&str> = layout
            .lines()
            .map(|line| line.trim_end_matches('\r'))
            .filter(|line| !line.is_empty())
            .collect();
        if lines.is_empty() {
            return Err(LayoutError::Empty);
        }
        let width = lines[0].len();
        let mut grid = Vec::with_capacity(lines.len());
        let mut starts = Vec::new();
        let mut keys = 0usize;
        let mut goals = 0usize;
        for (row, line) in lines.iter().enumerate() {
            if line.len() != width {
                return Err(LayoutError::Ragged { row });
            }
            let mut cells = Vec::with_capacity(width);
            for (col, ch) in line.chars().enumerate() {
                let cell = match ch {
                    '#' => Cell::Wall,
                    '.' => Cell::Floor,
                    'D' => Cell::Door,
                    'K' => {
                        keys += 1;
                        Cell::Key
                    }
                    'G' => {
                        goals += 1;
                        Cell::Goal
                    }
                    'S' => {
                        starts.push((row, col));
                        Cell::Floor
                    }
                    _ => return Err(LayoutError::UnknownChar { row, col, ch }),
                };
                cells.push(cell);
            }
            grid.push(cells);
        }
        if starts.len() != 1 {
            return Err(LayoutError::StartCount { found: starts.len() });
        }
        if keys != 1 {
            return Err(LayoutError::KeyCount { found: keys });
        }
        if goals != 1 {
            return Err(LayoutError::GoalCount { found: goals });
        }
        let height = grid.len();
        let start = starts[0];
        Ok(KeyedRooms {
            grid,
            width,
            height,
            start,
            map,
            pos: start,
            has_key: false,
            terminal: false,
        })
    }

    /// The canonical four-room grid: 2x2 rooms of side `room_size`, door
    /// cells in all four shared walls, start top-left, key in the start
    /// room's far corner, goal in the far room's far corner.
    pub fn generate_layout(room_size: usize) -> String {
        assert!(room_size >= 2, "rooms need at least two cells per side");
        let r = room_size;
        let n = 2 * r + 3;
        let mid = r + 1;
        let mut rows: Vec<Vec<char>> = (0..n)
            .map(|row| {
                (0..n)
                    .map(|col| {
                        if row == 0 || col == 0 || row == n - 1 || col == n - 1 {
                            '#'
                        } else if row == mid || col == mid {
                            '#'
                        } else {
                            '.'
                        }
                    })
                    .collect()
            })
            .collect();
        // Doors sit at the far ends of the shared walls so that every
        // room-to-room leg crosses a full room.
        rows[1][mid] = 'D'; // rooms 0-1, top
        rows[mid][1] = 'D'; // rooms 0-2, left
        rows[mid][n - 2] = 'D'; // rooms 1-3, right
        rows[n - 2][mid] = 'D'; // rooms 2-3, bottom
        rows[1][1] = 'S';
        rows[r][r] = 'K';
        rows[n - 2][n - 2] = 'G';
        let mut out = String::with_capacity(n * (n + 1));
        for row in rows {
            out.extend(row);
            out.push('\n');
        }
        out
    }

    /// The canonical layout at [`DEFAULT_ROOM_SIZE`](Self::DEFAULT_ROOM_SIZE)
    /// (a 19x19 grid whose shortest solution is 46 steps).
    pub fn default_rooms(map: FeatureMapKind) -> Self {
        KeyedRooms::from_layout(&Self::generate_layout(Self::DEFAULT_ROOM_SIZE), map)
            .expect("generated layout is valid")
    }

    /// Grid width in cells.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Grid height in cells.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Whether the agent currently holds the key.
    pub fn has_key(&self) -> bool {
        self.has_key
    }

    /// Current `(row, column)` of the agent.
    pub fn position(&self) -> (usize, usize) {
        self.pos
    }

    /// Room quadrant of a cell: `0` top-left, `1` top-right, `2`
    /// bottom-left, `3` bottom-right, split at the central wall lines.
    pub fn room_of(&self, row: usize, col: usize) -> usize {
        let below = row > self.height / 2;
        let right = col > self.width / 2;
        (below as usize) * 2 + right as usize
    }

    /// Length of the shortest successful trajectory (start to goal,
    /// fetching the key on the way), or `None` if the goal is unreachable.
    ///
    /// Breadth-first search over `(row, column, key-held)`; useful for
    /// validating hand-written layouts.
    pub fn shortest_solution_length(&self) -> Option<u64> {
        let mut visited = alloc::vec![false; self.width * self.height * 2];
        let index = |pos: (usize, usize), key: bool| {
            (pos.0 * self.width + pos.1) * 2 + key as usize
        };
        let mut queue = VecDeque::new();
        visited[index(self.start, false)] = true;
        queue.push_back((self.start, false, 0u64));
        while let Some((pos, key, steps)) = queue.pop_front() {
            for action in [UP, DOWN, LEFT, RIGHT] {
                let (next, picked) = self.apply_move(pos, key, action);
                let next_key = key || picked;
                if self.grid[next.0][next.1] == Cell::Goal {
                    return Some(steps + 1);
                }
                if !visited[index(next, next_key)] {
                    visited[index(next, next_key)] = true;
                    queue.push_back((next, next_key, steps + 1));
                }
            }
        }
        None
    }

    /// Where a move from `pos` with `key` held lands, and whether it picks
    /// up the key.
    fn apply_move(&self, pos: (usize, usize), key: bool, action: usize) -> ((usize, usize), bool) {
        let (row, col) = pos;
        let target = match action {
            UP => (row.wrapping_sub(1), col),
            DOWN => (row + 1, col),
            LEFT => (row, col.wrapping_sub(1)),
            RIGHT => (row, col + 1),
            _ => panic!("room actions are UP (0), DOWN (1), LEFT (2), RIGHT (3)"),
        };
        if target.0 >= self.height || target.1 >= self.width {
            return (pos, false);
        }
        match self.grid[target.0][target.1] {
            Cell::Wall => (pos, false),
            Cell::Door if !key => (pos, false),
            Cell::Key => (target, !key),
            _ => (target, false),
        }
    }

    fn observe(&self) -> FeatureVector {
        let (row, col) = self.pos;
        match self.map {
            FeatureMapKind::Tabular => FeatureVector::from_ids([
                ((row * self.width + col) * 2 + self.has_key as usize) as u64,
            ]),
            FeatureMapKind::Factored => {
                let h = self.height as u64;
                let w = self.width as u64;
                FeatureVector::from_ids([
                    row as u64,
                    h + col as u64,
                    h + w + self.room_of(row, col) as u64,
                    h + w + 4 + self.has_key as u64,
                ])
            }
        }
    }
}

impl Environment for KeyedRooms {
    fn name(&self) -> &'static str {
        "keyed_rooms"
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn step_cap(&self) -> u64 {
        500
    }

    fn reset(&mut self, _seed: u64) -> FeatureVector {
        self.pos = self.start;
        self.has_key = false;
        self.terminal = false;
        self.observe()
    }

    fn step(&mut self, action: usize) -> Step {
        assert!(!self.terminal, "episode is over; reset first");
        let (next, picked) = self.apply_move(self.pos, self.has_key, action);
        self.pos = next;
        self.has_key |= picked;
        let reached_goal = self.grid[next.0][next.1] == Cell::Goal;
        self.terminal = reached_goal;
        Step {
            reward: if reached_goal { 1.0 } else { 0.0 },
            features: self.observe(),
            terminal: reached_goal,
        }
    }
}

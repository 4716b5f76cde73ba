use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A grid cell, addressed as `(row, col)` with row 0 at the top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn manhattan(self, other: Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// The four grid moves. Declaration order is the tie-break order used
/// everywhere an argmax over actions is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    Up,
    Down,
    Left,
    Right,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Up, Move::Down, Move::Left, Move::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Move> {
        Move::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidAction(format!("move index {i} out of range")))
    }

    pub fn delta(self) -> (isize, isize) {
        match self {
            Move::Up => (-1, 0),
            Move::Down => (1, 0),
            Move::Left => (0, -1),
            Move::Right => (0, 1),
        }
    }

    pub fn arrow(self) -> char {
        match self {
            Move::Up => '^',
            Move::Down => 'v',
            Move::Left => '<',
            Move::Right => '>',
        }
    }
}

/// Static cell structure shared by the grid worlds and the discretized mazes.
///
/// `hazards` are cells the agent can never occupy at the end of a step
/// (the CliffWalking cliff); they are excluded from the state set just
/// like walls but do not block movement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub height: usize,
    pub width: usize,
    pub walls: BTreeSet<Cell>,
    pub hazards: BTreeSet<Cell>,
    pub start: Cell,
    pub goal: Cell,
}

impl Layout {
    /// Parses a map written in the `{0,1,r,g}` alphabet, one row per line.
    /// Tokens may be whitespace separated or packed.
    pub fn parse(text: &str) -> Result<Layout> {
        let mut rows: Vec<Vec<char>> = Vec::new();
        for line in text.lines() {
            let row: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
            if !row.is_empty() {
                rows.push(row);
            }
        }
        if rows.is_empty() {
            return Err(Error::format("empty map"));
        }
        let width = rows[0].len();
        let mut walls = BTreeSet::new();
        let (mut start, mut goal) = (None, None);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::format(format!(
                    "map row {r} has {} cells, expected {width}",
                    row.len()
                )));
            }
            for (c, ch) in row.iter().enumerate() {
                match ch {
                    '0' => {}
                    '1' => {
                        walls.insert(Cell::new(r, c));
                    }
                    'r' => start = Some(Cell::new(r, c)),
                    'g' => goal = Some(Cell::new(r, c)),
                    other => {
                        return Err(Error::format(format!(
                            "unexpected map symbol `{other}` at ({r},{c})"
                        )))
                    }
                }
            }
        }
        let start = start.ok_or_else(|| Error::format("map has no start cell `r`"))?;
        let goal = goal.ok_or_else(|| Error::format("map has no goal cell `g`"))?;
        Ok(Layout {
            height: rows.len(),
            width,
            walls,
            hazards: BTreeSet::new(),
            start,
            goal,
        })
    }

    /// Renders the map in the same alphabet, space separated.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in 0..self.height {
            let row: Vec<&str> = (0..self.width)
                .map(|c| {
                    let cell = Cell::new(r, c);
                    if cell == self.start {
                        "r"
                    } else if cell == self.goal {
                        "g"
                    } else if self.walls.contains(&cell) {
                        "1"
                    } else {
                        "0"
                    }
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn is_wall(&self, cell: Cell) -> bool {
        self.walls.contains(&cell)
    }

    /// Cells an agent can occupy: in bounds, not wall, not hazard.
    pub fn is_state(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && !self.walls.contains(&cell) && !self.hazards.contains(&cell)
    }

    pub fn states(&self) -> Vec<Cell> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| Cell::new(r, c)))
            .filter(|&c| self.is_state(c))
            .collect()
    }

    pub fn cell_count(&self) -> usize {
        self.height * self.width
    }

    pub fn flat_index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    /// Neighbour reached by `mv`, or `None` when it leaves the grid.
    pub fn offset(&self, cell: Cell, mv: Move) -> Option<Cell> {
        let (dr, dc) = mv.delta();
        let r = cell.row.checked_add_signed(dr)?;
        let c = cell.col.checked_add_signed(dc)?;
        let next = Cell::new(r, c);
        self.in_bounds(next).then_some(next)
    }

    /// Breadth-first shortest distances (in moves) from `source` over
    /// state cells, ignoring hazard resets. Unreachable cells are `None`.
    pub fn bfs_distances(&self, source: Cell) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.cell_count()];
        if !self.is_state(source) {
            return dist;
        }
        let mut queue = VecDeque::from([source]);
        dist[self.flat_index(source)] = Some(0);
        while let Some(cell) = queue.pop_front() {
            let d = dist[self.flat_index(cell)].unwrap_or(0);
            for mv in Move::ALL {
                if let Some(next) = self.offset(cell, mv) {
                    let idx = self.flat_index(next);
                    if self.is_state(next) && dist[idx].is_none() {
                        dist[idx] = Some(d + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        dist
    }

    /// One shortest cell path from `from` to `to` (inclusive), taking the
    /// first move in [`Move::ALL`] order that decreases the distance.
    pub fn shortest_path(&self, from: Cell, to: Cell) -> Option<Vec<Cell>> {
        let dist = self.bfs_distances(to);
        let mut d = dist[self.flat_index(from)]?;
        let mut path = vec![from];
        let mut cur = from;
        while d > 0 {
            let next = Move::ALL.iter().find_map(|&mv| {
                self.offset(cur, mv)
                    .filter(|n| dist[self.flat_index(*n)] == Some(d - 1))
            })?;
            path.push(next);
            cur = next;
            d -= 1;
        }
        Some(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        let text = "1 1 1 1 1\n1 r 0 0 1\n1 1 1 0 1\n1 g 0 0 1\n1 1 1 1 1\n";
        let layout = Layout::parse(text).unwrap();
        assert_eq!(layout.height, 5);
        assert_eq!(layout.start, Cell::new(1, 1));
        assert_eq!(layout.goal, Cell::new(3, 1));
        assert_eq!(layout.states().len(), 7);
        assert_eq!(layout.render(), text);
        assert_eq!(Layout::parse("11111\n1r001\n11101\n1g001\n11111").unwrap(), layout);
    }

    #[test]
    fn parse_rejects_bad_symbols_and_ragged_rows() {
        assert!(Layout::parse("1 x\n").is_err());
        assert!(Layout::parse("r 0\n0\ng 0\n").is_err());
        assert!(Layout::parse("0 0\n0 g\n").is_err());
    }

    #[test]
    fn shortest_path_prefers_move_order() {
        let layout = Layout::parse("r0\n0g").unwrap();
        let path = layout.shortest_path(layout.start, layout.goal).unwrap();
        assert_eq!(path, vec![Cell::new(0, 0), Cell::new(1, 0), Cell::new(1, 1)]);
    }
}

//! 4-connected grid maps.

use thiserror::Error;

/// A grid cell addressed by column `x` and row `y`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    /// True iff the two cells share an edge (4-connectivity).
    pub fn adjacent(self, other: Cell) -> bool {
        self.manhattan(other) == 1
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("blocked vector has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("grid dimensions must be positive")]
    EmptyGrid,
}

/// A rectangular map of blocked and passable cells. Agents move between
/// edge-adjacent passable cells; diagonals never connect.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridMap {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
}

impl GridMap {
    /// A map with every cell passable.
    pub fn open(width: u32, height: u32) -> Self {
        GridMap::new(width, height, vec![false; (width * height) as usize]).unwrap()
    }

    /// `blocked` is row-major: index `y * width + x`.
    pub fn new(width: u32, height: u32, blocked: Vec<bool>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid);
        }
        let expected = (width as usize) * (height as usize);
        if blocked.len() != expected {
            return Err(GridError::BadLength {
                expected,
                got: blocked.len(),
            });
        }
        Ok(GridMap {
            width,
            height,
            blocked,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        debug_assert!(self.in_bounds(c));
        self.blocked[self.cell_index(c)]
    }

    pub fn set_blocked(&mut self, c: Cell, blocked: bool) {
        let idx = self.cell_index(c);
        self.blocked[idx] = blocked;
    }

    /// Row-major index of a cell, used for deterministic tie-breaking.
    pub fn cell_index(&self, c: Cell) -> usize {
        (c.y as usize) * (self.width as usize) + c.x as usize
    }

    /// Passable 4-neighbors in fixed order: north, west, east, south.
    pub fn neighbors4(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        let candidates = [
            (c.y > 0).then(|| Cell::new(c.x, c.y - 1)),
            (c.x > 0).then(|| Cell::new(c.x - 1, c.y)),
            (c.x + 1 < self.width).then(|| Cell::new(c.x + 1, c.y)),
            (c.y + 1 < self.height).then(|| Cell::new(c.x, c.y + 1)),
        ];
        candidates
            .into_iter()
            .flatten()
            .filter(|&n| !self.is_blocked(n))
    }

    pub fn unblocked_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
            .filter(|&c| !self.is_blocked(c))
    }

    /// Cells of the largest connected component of passable cells, sorted by
    /// row-major index. Instance generation draws starts and goals from this
    /// set so that every task is mutually reachable.
    pub fn largest_component(&self) -> Vec<Cell> {
        let n = self.blocked.len();
        let mut seen = vec![false; n];
        let mut best: Vec<Cell> = Vec::new();
        for start in self.unblocked_cells() {
            if seen[self.cell_index(start)] {
                continue;
            }
            let mut component = vec![start];
            seen[self.cell_index(start)] = true;
            let mut stack = vec![start];
            while let Some(c) = stack.pop() {
                for nb in self.neighbors4(c) {
                    let idx = self.cell_index(nb);
                    if !seen[idx] {
                        seen[idx] = true;
                        component.push(nb);
                        stack.push(nb);
                    }
                }
            }
            if component.len() > best.len() {
                best = component;
            }
        }
        best.sort_by_key(|&c| self.cell_index(c));
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_respect_bounds_and_obstacles() {
        let mut map = GridMap::open(3, 3);
        map.set_blocked(Cell::new(1, 0), true);
        let from_origin: Vec<Cell> = map.neighbors4(Cell::new(0, 0)).collect();
        assert_eq!(from_origin, vec![Cell::new(0, 1)]);
        let center: Vec<Cell> = map.neighbors4(Cell::new(1, 1)).collect();
        assert_eq!(
            center,
            vec![Cell::new(0, 1), Cell::new(2, 1), Cell::new(1, 2)]
        );
    }

    #[test]
    fn largest_component_picks_bigger_side() {
        // Vertical wall at x=1 splits a 3x2 map into 1x2 and 1x2; block one
        // more cell to make the right side strictly larger.
        let mut map = GridMap::open(3, 2);
        map.set_blocked(Cell::new(1, 0), true);
        map.set_blocked(Cell::new(1, 1), true);
        map.set_blocked(Cell::new(0, 1), true);
        let comp = map.largest_component();
        assert_eq!(comp, vec![Cell::new(2, 0), Cell::new(2, 1)]);
    }

    #[test]
    fn adjacency_is_4_connected() {
        assert!(Cell::new(1, 1).adjacent(Cell::new(1, 2)));
        assert!(!Cell::new(1, 1).adjacent(Cell::new(2, 2)));
        assert!(!Cell::new(1, 1).adjacent(Cell::new(1, 1)));
    }
}

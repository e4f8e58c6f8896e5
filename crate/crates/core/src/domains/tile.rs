use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DomainError;
use crate::topology::{HValue, StateId, StateSpace};

/// Sliding-tile puzzle with the Manhattan-distance heuristic.
///
/// States are permutations ranked by their Lehmer code. The goal puts tiles
/// `1..n` in row-major order with the blank (0) last. Blank moves are
/// generated in the order up, down, left, right.
#[derive(Debug, Clone)]
pub struct TilePuzzle {
    rows: usize,
    cols: usize,
    initial: StateId,
    goal: StateId,
    bound: usize,
}

const MAX_CELLS: usize = 12;

impl TilePuzzle {
    pub fn new(rows: u8, cols: u8, tiles: &[u8]) -> Result<Self, DomainError> {
        let (rows, cols) = (rows as usize, cols as usize);
        let cells = rows * cols;
        if rows == 0 || cols == 0 || !(2..=MAX_CELLS).contains(&cells) {
            return Err(DomainError::InvalidParameters(alloc::format!(
                "tile board {rows}x{cols} must have 2..={MAX_CELLS} cells"
            )));
        }
        if tiles.len() != cells {
            return Err(DomainError::InvalidParameters("tile count does not match board".into()));
        }
        let mut seen = vec![false; cells];
        for &t in tiles {
            let t = t as usize;
            if t >= cells || seen[t] {
                return Err(DomainError::InvalidParameters("tiles are not a permutation".into()));
            }
            seen[t] = true;
        }
        let goal_tiles = goal_tiles(cells);
        if !solvable(tiles, &goal_tiles, cols) {
            return Err(DomainError::UnsolvableTiles);
        }
        Ok(TilePuzzle {
            rows,
            cols,
            initial: StateId(rank(tiles)),
            goal: StateId(rank(&goal_tiles)),
            bound: factorial(cells),
        })
    }

    /// Random walk of `moves` blank moves from the goal, never undoing the
    /// previous move.
    pub fn scrambled(rows: u8, cols: u8, moves: u32, seed: u64) -> Result<Self, DomainError> {
        let cells = rows as usize * cols as usize;
        let base = TilePuzzle::new(rows, cols, &goal_tiles(cells))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tiles = goal_tiles(cells);
        let mut prev_blank = usize::MAX;
        for _ in 0..moves {
            let blank = tiles.iter().position(|&t| t == 0).unwrap();
            let options: Vec<usize> =
                base.neighbours(blank).filter(|&c| c != prev_blank).collect();
            let to = options[rng.gen_range(0..options.len())];
            tiles.swap(blank, to);
            prev_blank = blank;
        }
        TilePuzzle::new(rows, cols, &tiles)
    }

    pub fn tiles(&self, s: StateId) -> Vec<u8> {
        unrank(s.0, self.rows * self.cols)
    }

    fn neighbours(&self, cell: usize) -> impl Iterator<Item = usize> {
        let (r, c) = (cell / self.cols, cell % self.cols);
        let cols = self.cols;
        let up = (r > 0).then(|| cell - cols);
        let down = (r + 1 < self.rows).then(|| cell + cols);
        let left = (c > 0).then(|| cell - 1);
        let right = (c + 1 < cols).then(|| cell + 1);
        [up, down, left, right].into_iter().flatten()
    }
}

impl StateSpace for TilePuzzle {
    fn initial(&self) -> StateId {
        self.initial
    }

    fn is_goal(&self, s: StateId) -> bool {
        s == self.goal
    }

    fn successors(&self, s: StateId, out: &mut Vec<StateId>) {
        if self.is_goal(s) {
            return;
        }
        let mut tiles = self.tiles(s);
        let blank = tiles.iter().position(|&t| t == 0).unwrap();
        let moves: Vec<usize> = self.neighbours(blank).collect();
        for to in moves {
            tiles.swap(blank, to);
            out.push(StateId(rank(&tiles)));
            tiles.swap(blank, to);
        }
    }

    fn heuristic(&self, s: StateId) -> HValue {
        let tiles = self.tiles(s);
        let mut h = 0;
        for (cell, &t) in tiles.iter().enumerate() {
            if t == 0 {
                continue;
            }
            let home = t as usize - 1;
            let (r, c) = (cell / self.cols, cell % self.cols);
            let (hr, hc) = (home / self.cols, home % self.cols);
            h += (r.abs_diff(hr) + c.abs_diff(hc)) as HValue;
        }
        h
    }

    fn state_bound(&self) -> usize {
        self.bound
    }
}

fn goal_tiles(cells: usize) -> Vec<u8> {
    (1..cells as u8).chain(core::iter::once(0)).collect()
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn rank(perm: &[u8]) -> u32 {
    let n = perm.len();
    let mut r: u64 = 0;
    for i in 0..n {
        let smaller = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count() as u64;
        r = r * (n - i) as u64 + smaller;
    }
    r as u32
}

fn unrank(mut r: u32, n: usize) -> Vec<u8> {
    let mut digits = vec![0usize; n];
    for i in (0..n).rev() {
        let base = (n - i) as u32;
        digits[i] = (r % base) as usize;
        r /= base;
    }
    let mut pool: Vec<u8> = (0..n as u8).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

/// Each move is a transposition with the blank and moves the blank one step,
/// so permutation parity must equal the parity of the blank's distance to its
/// goal cell.
fn solvable(tiles: &[u8], goal: &[u8], cols: usize) -> bool {
    // Parity of the permutation mapping goal positions to current positions.
    let n = tiles.len();
    let mut pos_in_goal = vec![0usize; n];
    for (i, &t) in goal.iter().enumerate() {
        pos_in_goal[t as usize] = i;
    }
    let perm: Vec<usize> = tiles.iter().map(|&t| pos_in_goal[t as usize]).collect();
    let mut visited = vec![false; n];
    let mut transpositions = 0;
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !visited[j] {
            visited[j] = true;
            j = perm[j];
            len += 1;
        }
        transpositions += len - 1;
    }
    let blank = tiles.iter().position(|&t| t == 0).unwrap();
    let goal_blank = goal.iter().position(|&t| t == 0).unwrap();
    let dist = (blank / cols).abs_diff(goal_blank / cols) + (blank % cols).abs_diff(goal_blank % cols);
    transpositions % 2 == dist % 2
}

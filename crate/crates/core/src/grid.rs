//! Grid data model shared by every stage of the pipeline.
//!
//! A garage is an `h x w` matrix of [`Cell`] codes. Reads outside the matrix
//! return [`Cell::Obstacle`], so border cells never need special cases.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 1024;

/// Cell code of the structure matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
#[repr(i8)]
pub enum Cell {
    /// Obstacle, or outside the floor plan.
    Obstacle = -1,
    /// Parking space or free space.
    Free = 0,
    Lane = 1,
    Entrance = 2,
    Exit = 3,
}

impl Cell {
    #[inline]
    pub fn code(self) -> i8 {
        self as i8
    }

    /// Lanes, entrances and exits: the cells a car can drive over.
    #[inline]
    pub fn is_drivable(self) -> bool {
        matches!(self, Cell::Lane | Cell::Entrance | Cell::Exit)
    }

    #[inline]
    pub fn is_floor(self) -> bool {
        self != Cell::Obstacle
    }
}

impl TryFrom<i8> for Cell {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        Cell::try_from(v as i64)
    }
}

impl TryFrom<i64> for Cell {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        Ok(match v {
            -1 => Cell::Obstacle,
            0 => Cell::Free,
            1 => Cell::Lane,
            2 => Cell::Entrance,
            3 => Cell::Exit,
            other => return Err(Error::InvalidCode(other)),
        })
    }
}

impl From<Cell> for i8 {
    fn from(c: Cell) -> i8 {
        c.code()
    }
}

/// Grid coordinate. Signed so that neighbourhood reads can step past the border.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub row: i32,
    pub col: i32,
}

impl Coord {
    #[inline]
    pub const fn new(row: i32, col: i32) -> Self {
        Coord { row, col }
    }

    #[inline]
    pub fn step(self, dir: Dir) -> Coord {
        let (dr, dc) = dir.delta();
        Coord::new(self.row + dr, self.col + dc)
    }

    #[inline]
    pub fn offset(self, dr: i32, dc: i32) -> Coord {
        Coord::new(self.row + dr, self.col + dc)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

pub fn manhattan(a: Coord, b: Coord) -> u32 {
    a.row.abs_diff(b.row) + a.col.abs_diff(b.col)
}

/// Compass direction. Row index grows southward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

    #[inline]
    pub fn delta(self) -> (i32, i32) {
        match self {
            Dir::N => (-1, 0),
            Dir::E => (0, 1),
            Dir::S => (1, 0),
            Dir::W => (0, -1),
        }
    }

    #[inline]
    pub fn opposite(self) -> Dir {
        match self {
            Dir::N => Dir::S,
            Dir::E => Dir::W,
            Dir::S => Dir::N,
            Dir::W => Dir::E,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Dir::N | Dir::S)
    }
}

/// Neighbourhood shape used by [`StructureMatrix::neighborhood`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Neighborhood {
    /// N, NE, E, SE, S, SW, W, NW.
    Eight,
    /// N, E, S, W.
    Four,
}

const EIGHT: [(i32, i32); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Result of the frontier/inner test on a single square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SquareClass {
    Frontier,
    Inner,
    Neither,
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructureMatrix {
    h: usize,
    w: usize,
    cells: Vec<Cell>,
}

impl StructureMatrix {
    pub fn filled(h: usize, w: usize, cell: Cell) -> Result<Self> {
        check_dims(h, w)?;
        Ok(StructureMatrix { h, w, cells: vec![cell; h * w] })
    }

    pub fn from_cells(h: usize, w: usize, cells: Vec<Cell>) -> Result<Self> {
        check_dims(h, w)?;
        if cells.len() != h * w {
            return Err(Error::DimensionMismatch { field: "cells", expected: h * w, found: cells.len() });
        }
        Ok(StructureMatrix { h, w, cells })
    }

    /// Builds a matrix from rows of raw integer codes.
    pub fn from_codes<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let h = rows.len();
        let w = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        check_dims(h, w)?;
        let mut cells = Vec::with_capacity(h * w);
        for row in rows {
            let row = row.as_ref();
            if row.len() != w {
                return Err(Error::DimensionMismatch { field: "row", expected: w, found: row.len() });
            }
            for &v in row {
                cells.push(Cell::try_from(v)?);
            }
        }
        Ok(StructureMatrix { h, w, cells })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.h
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.w
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    #[inline]
    pub fn in_bounds(&self, c: Coord) -> bool {
        c.row >= 0 && c.col >= 0 && (c.row as usize) < self.h && (c.col as usize) < self.w
    }

    #[inline]
    fn index(&self, c: Coord) -> usize {
        c.row as usize * self.w + c.col as usize
    }

    /// Reads a cell; anything outside the matrix is an obstacle.
    #[inline]
    pub fn get(&self, c: Coord) -> Cell {
        if self.in_bounds(c) {
            self.cells[self.index(c)]
        } else {
            Cell::Obstacle
        }
    }

    pub fn set(&mut self, c: Coord, cell: Cell) -> Result<()> {
        self.check(c)?;
        let i = self.index(c);
        self.cells[i] = cell;
        Ok(())
    }

    pub fn check(&self, c: Coord) -> Result<()> {
        if self.in_bounds(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { row: c.row, col: c.col, h: self.h, w: self.w })
        }
    }

    /// All coordinates in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        let w = self.w;
        (0..self.h * w).map(move |i| Coord::new((i / w) as i32, (i % w) as i32))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coord, Cell)> + '_ {
        self.coords().zip(self.cells.iter().copied())
    }

    pub fn positions_of(&self, cell: Cell) -> Vec<Coord> {
        self.iter().filter(|&(_, c)| c == cell).map(|(p, _)| p).collect()
    }

    pub fn count(&self, cell: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == cell).count()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cell]> {
        self.cells.chunks(self.w)
    }

    pub fn to_codes(&self) -> Vec<Vec<i8>> {
        self.rows().map(|r| r.iter().map(|c| c.code()).collect()).collect()
    }

    pub fn transpose(&self) -> StructureMatrix {
        let mut cells = Vec::with_capacity(self.cells.len());
        for col in 0..self.w {
            for row in 0..self.h {
                cells.push(self.cells[row * self.w + col]);
            }
        }
        StructureMatrix { h: self.w, w: self.h, cells }
    }

    /// SHA-256 over the dimensions and row-major codes, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.h as u32).to_le_bytes());
        hasher.update((self.w as u32).to_le_bytes());
        hasher.update(self.cells.iter().map(|c| c.code() as u8).collect::<Vec<_>>());
        hex::encode(hasher.finalize())
    }

    pub fn neighborhood(&self, c: Coord, kind: Neighborhood) -> Result<Vec<Cell>> {
        self.check(c)?;
        Ok(match kind {
            Neighborhood::Eight => EIGHT.iter().map(|&(dr, dc)| self.get(c.offset(dr, dc))).collect(),
            Neighborhood::Four => Dir::ALL.iter().map(|&d| self.get(c.step(d))).collect(),
        })
    }

    /// Raw sum of the eight neighbour codes.
    pub fn eight_sum(&self, c: Coord) -> Result<i32> {
        self.check(c)?;
        Ok(self.eight_sum_unchecked(c))
    }

    #[inline]
    pub(crate) fn eight_sum_unchecked(&self, c: Coord) -> i32 {
        EIGHT.iter().map(|&(dr, dc)| self.get(c.offset(dr, dc)).code() as i32).sum()
    }

    pub fn classify_square(&self, c: Coord) -> Result<SquareClass> {
        self.check(c)?;
        Ok(self.classify_unchecked(c))
    }

    pub(crate) fn classify_unchecked(&self, c: Coord) -> SquareClass {
        if self.get(c) != Cell::Free {
            return SquareClass::Neither;
        }
        match self.eight_sum_unchecked(c) {
            s if s < 0 => SquareClass::Frontier,
            0 => SquareClass::Inner,
            _ => SquareClass::Neither,
        }
    }

    /// Number of 4-neighbours that are drivable (codes 1, 2, 3).
    pub fn drivable_degree(&self, c: Coord) -> Result<u8> {
        self.check(c)?;
        Ok(self.drivable_degree_unchecked(c))
    }

    #[inline]
    pub(crate) fn drivable_degree_unchecked(&self, c: Coord) -> u8 {
        Dir::ALL.iter().filter(|&&d| self.get(c.step(d)).is_drivable()).count() as u8
    }

    /// Drivable flags for N, E, S, W.
    #[inline]
    pub fn drivable_mask(&self, c: Coord) -> [bool; 4] {
        Dir::ALL.map(|d| self.get(c.step(d)).is_drivable())
    }

    /// Contiguous non-obstacle cells from `c` toward `dir`, not counting `c`.
    pub fn clearance(&self, c: Coord, dir: Dir, cap: usize) -> usize {
        let mut n = 0;
        let mut p = c.step(dir);
        while n < cap && self.get(p).is_floor() {
            n += 1;
            p = p.step(dir);
        }
        n
    }
}

fn check_dims(h: usize, w: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&h) && (1..=MAX_DIM).contains(&w) {
        Ok(())
    } else {
        Err(Error::InvalidDimensions { h, w })
    }
}

impl fmt::Debug for StructureMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "StructureMatrix {}x{}", self.h, self.w)?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|c| format!("{:2}", c.code())).collect();
            writeln!(f, "  {}", line.join(" "))?;
        }
        Ok(())
    }
}

/// True when the cells selected by `member` form a single 4-connected region.
/// An empty selection counts as connected.
pub fn is_four_connected(s: &StructureMatrix, member: impl Fn(Cell) -> bool) -> bool {
    let total = s.cells.iter().filter(|&&c| member(c)).count();
    let Some(start) = s.iter().find(|&(_, c)| member(c)).map(|(p, _)| p) else {
        return true;
    };
    let mut seen = vec![false; s.cells.len()];
    let mut stack = vec![start];
    seen[s.index(start)] = true;
    let mut reached = 0;
    while let Some(p) = stack.pop() {
        reached += 1;
        for d in Dir::ALL {
            let q = p.step(d);
            if s.in_bounds(q) && !seen[s.index(q)] && member(s.get(q)) {
                seen[s.index(q)] = true;
                stack.push(q);
            }
        }
    }
    reached == total
}

/// Obstacle cells that cannot reach the virtual border through other obstacle
/// cells. These are pillars (or holes) enclosed by the floor plan.
pub fn enclosed_obstacles(s: &StructureMatrix) -> Vec<Coord> {
    let mut outside = vec![false; s.cells.len()];
    let mut stack: Vec<Coord> = s
        .iter()
        .filter(|&(p, c)| {
            c == Cell::Obstacle
                && (p.row == 0 || p.col == 0 || p.row as usize == s.h - 1 || p.col as usize == s.w - 1)
        })
        .map(|(p, _)| p)
        .collect();
    for &p in &stack {
        outside[s.index(p)] = true;
    }
    while let Some(p) = stack.pop() {
        for d in Dir::ALL {
            let q = p.step(d);
            if s.in_bounds(q) && !outside[s.index(q)] && s.get(q) == Cell::Obstacle {
                outside[s.index(q)] = true;
                stack.push(q);
            }
        }
    }
    s.iter()
        .filter(|&(p, c)| c == Cell::Obstacle && !outside[s.index(p)])
        .map(|(p, _)| p)
        .collect()
}

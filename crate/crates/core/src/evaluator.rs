//! Layout metrics and the linear fitness score.
//!
//! * `N_S`: free cells with at least one drivable 4-neighbour (parking spots).
//! * `T_S`: mean lane-step distance from the nearest entrance to each spot,
//!   plus one step to pull in.
//! * `U_S`: free cells with no drivable 4-neighbour.
//!
//! The score is `k1 * N_S + k2 * T_S + k3 * U_S`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Coord, Dir, StructureMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpotType {
    /// Three or more drivable sides, or two opposite ones.
    Type1,
    /// Two perpendicular drivable sides.
    Type2,
    /// Exactly one drivable side.
    Type3,
    /// No drivable side: an unused square.
    Type4,
}

impl SpotType {
    /// Classifies a free cell from its N, E, S, W drivable flags.
    pub fn from_mask(mask: [bool; 4]) -> SpotType {
        let n = mask.iter().filter(|&&b| b).count();
        match n {
            0 => SpotType::Type4,
            1 => SpotType::Type3,
            2 if (mask[0] && mask[2]) || (mask[1] && mask[3]) => SpotType::Type1,
            2 => SpotType::Type2,
            _ => SpotType::Type1,
        }
    }

    pub fn is_spot(self) -> bool {
        self != SpotType::Type4
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalCoefficients {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl Default for EvalCoefficients {
    fn default() -> Self {
        EvalCoefficients { k1: 1.0, k2: -5.0, k3: -1.0 }
    }
}

impl EvalCoefficients {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Self {
        EvalCoefficients { k1, k2, k3 }
    }

    pub fn score(&self, n_spots: usize, avg_time: f64, unused: usize) -> f64 {
        self.k1 * n_spots as f64 + self.k2 * avg_time + self.k3 * unused as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spot {
    pub at: Coord,
    pub kind: SpotType,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n_spots: usize,
    pub avg_time: f64,
    pub unused: usize,
    pub score: f64,
    pub spots: Vec<Spot>,
}

#[inline]
fn spot_type_at(s: &StructureMatrix, c: Coord) -> Option<SpotType> {
    (s.get(c) == Cell::Free).then(|| SpotType::from_mask(s.drivable_mask(c)))
}

/// Parking spots (types 1-3) in row-major order.
pub fn count_spots(s: &StructureMatrix) -> (usize, Vec<Spot>) {
    let spots: Vec<Spot> = s
        .coords()
        .filter_map(|c| spot_type_at(s, c).filter(|k| k.is_spot()).map(|kind| Spot { at: c, kind }))
        .collect();
    (spots.len(), spots)
}

/// Number of spots among `cells` (cells outside the matrix count as nothing).
pub(crate) fn spots_among(s: &StructureMatrix, cells: &[Coord]) -> i64 {
    cells.iter().filter(|&&c| spot_type_at(s, c).is_some_and(SpotType::is_spot)).count() as i64
}

/// Change in spot count caused by setting `c` to `to`. Only `c` and its four
/// neighbours can change status.
pub fn spot_delta(s: &mut StructureMatrix, c: Coord, to: Cell) -> Result<i64> {
    let affected = [c, c.step(Dir::N), c.step(Dir::E), c.step(Dir::S), c.step(Dir::W)];
    let before = spots_among(s, &affected);
    s.set(c, to)?;
    Ok(spots_among(s, &affected) - before)
}

pub fn unused_squares(s: &StructureMatrix) -> usize {
    s.coords().filter(|&c| spot_type_at(s, c) == Some(SpotType::Type4)).count()
}

/// Lane-step distances from every cell of kind in `sources`, moving over
/// drivable cells only. `None` means unreachable.
pub fn drive_distances(s: &StructureMatrix, sources: &[Cell]) -> Vec<Option<u32>> {
    let w = s.width();
    let idx = |c: Coord| c.row as usize * w + c.col as usize;
    let mut dist = vec![None; s.height() * w];
    let mut queue = VecDeque::new();
    for (c, cell) in s.iter() {
        if sources.contains(&cell) {
            dist[idx(c)] = Some(0);
            queue.push_back(c);
        }
    }
    while let Some(p) = queue.pop_front() {
        let d = dist[idx(p)].expect("queued cells have a distance");
        for dir in Dir::ALL {
            let q = p.step(dir);
            if s.get(q).is_drivable() && dist[idx(q)].is_none() {
                dist[idx(q)] = Some(d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

/// Mean parking time using entrances as sources and `h * w` for unreachable spots.
pub fn avg_parking_time(s: &StructureMatrix) -> Result<f64> {
    avg_parking_time_from(s, &[Cell::Entrance], (s.height() * s.width()) as f64)
}

/// Mean parking time with explicit source cell kinds and unreachable penalty.
pub fn avg_parking_time_from(s: &StructureMatrix, sources: &[Cell], unreachable_penalty: f64) -> Result<f64> {
    if !s.cells().iter().any(|c| sources.contains(c)) {
        return Err(Error::NoEntrance);
    }
    let (n, spots) = count_spots(s);
    Ok(mean_time(s, &spots, &drive_distances(s, sources), unreachable_penalty, n))
}

fn mean_time(s: &StructureMatrix, spots: &[Spot], dist: &[Option<u32>], penalty: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let w = s.width();
    let total: f64 = spots
        .iter()
        .map(|spot| {
            Dir::ALL
                .iter()
                .map(|&d| spot.at.step(d))
                .filter(|&q| s.in_bounds(q))
                .filter_map(|q| dist[q.row as usize * w + q.col as usize])
                .min()
                .map(|d| (d + 1) as f64)
                .unwrap_or(penalty)
        })
        .sum();
    total / n as f64
}

pub fn evaluate(s: &StructureMatrix, k: &EvalCoefficients) -> Result<Evaluation> {
    if s.count(Cell::Entrance) == 0 {
        return Err(Error::NoEntrance);
    }
    let (n_spots, spots) = count_spots(s);
    let penalty = (s.height() * s.width()) as f64;
    let avg_time = mean_time(s, &spots, &drive_distances(s, &[Cell::Entrance]), penalty, n_spots);
    let unused = unused_squares(s);
    Ok(Evaluation { n_spots, avg_time, unused, score: k.score(n_spots, avg_time, unused), spots })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Infeasibility {
    NoEntrancePath,
    NoExitPath,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibleSpot {
    pub at: Coord,
    pub reasons: Vec<Infeasibility>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub spots_checked: usize,
    pub infeasible: Vec<InfeasibleSpot>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.infeasible.is_empty()
    }
}

/// Checks that every spot touches a drivable component containing an
/// entrance and one containing an exit.
pub fn feasibility(s: &StructureMatrix) -> FeasibilityReport {
    let from_entrance = drive_distances(s, &[Cell::Entrance]);
    let from_exit = drive_distances(s, &[Cell::Exit]);
    let w = s.width();
    let (spots_checked, spots) = count_spots(s);
    let reaches = |dist: &[Option<u32>], c: Coord| {
        Dir::ALL
            .iter()
            .map(|&d| c.step(d))
            .any(|q| s.in_bounds(q) && dist[q.row as usize * w + q.col as usize].is_some())
    };
    let infeasible = spots
        .iter()
        .filter_map(|spot| {
            let mut reasons = Vec::new();
            if !reaches(&from_entrance, spot.at) {
                reasons.push(Infeasibility::NoEntrancePath);
            }
            if !reaches(&from_exit, spot.at) {
                reasons.push(Infeasibility::NoExitPath);
            }
            (!reasons.is_empty()).then_some(InfeasibleSpot { at: spot.at, reasons })
        })
        .collect();
    FeasibilityReport { spots_checked, infeasible }
}

//! Static layer generation: contour, entrances/exits, obstacles.
//!
//! The three stages run in that order on a single seeded RNG stream, so a
//! `(config, seed)` pair always produces the same matrix. Frontier and inner
//! squares are always classified on the contour as it was before any entrance
//! was placed (codes `{-1, 0}` only); the raw eight-neighbour sums are only
//! meaningful there.

use std::fmt;

use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{enclosed_obstacles, is_four_connected, manhattan, Cell, Coord, SquareClass, StructureMatrix};
use crate::rng_from_seed;

/// Axis-aligned rectangle of whole cells, corners inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub top_left: Coord,
    pub bottom_right: Coord,
}

impl Rect {
    /// Rectangle spanned by two diagonal corner points, in any order.
    pub fn from_diagonal(a: Coord, b: Coord) -> Rect {
        Rect {
            top_left: Coord::new(a.row.min(b.row), a.col.min(b.col)),
            bottom_right: Coord::new(a.row.max(b.row), a.col.max(b.col)),
        }
    }

    pub fn contains(&self, c: Coord) -> bool {
        (self.top_left.row..=self.bottom_right.row).contains(&c.row)
            && (self.top_left.col..=self.bottom_right.col).contains(&c.col)
    }

    pub fn area(&self) -> usize {
        ((self.bottom_right.row - self.top_left.row + 1) * (self.bottom_right.col - self.top_left.col + 1)) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticGenConfig {
    pub h: usize,
    pub w: usize,
    pub n_rects: usize,
    pub n_entrances: usize,
    pub n_exits: usize,
    /// Minimum Manhattan distance between any two entrance/exit squares.
    pub sigma1: u32,
    /// Minimum Manhattan distance between any two obstacles.
    pub sigma2: u32,
    pub n_obstacles: usize,
    pub seed: u64,
    pub max_retries: usize,
}

impl Default for StaticGenConfig {
    fn default() -> Self {
        StaticGenConfig {
            h: 7,
            w: 9,
            n_rects: 3,
            n_entrances: 1,
            n_exits: 1,
            sigma1: 10,
            sigma2: 4,
            n_obstacles: 0,
            seed: 0,
            max_retries: 1000,
        }
    }
}

impl StaticGenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(1..=crate::grid::MAX_DIM).contains(&self.h) || !(1..=crate::grid::MAX_DIM).contains(&self.w) {
            return Err(Error::InvalidDimensions { h: self.h, w: self.w });
        }
        if self.n_rects < 1 {
            return bad("n_rects must be >= 1");
        }
        if self.n_entrances < 1 || self.n_exits < 1 {
            return bad("n_entrances and n_exits must be >= 1");
        }
        if self.sigma1 < 1 || self.sigma2 < 1 {
            return bad("sigma1 and sigma2 must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Contour {
    pub matrix: StructureMatrix,
    pub rects: Vec<Rect>,
    pub retries_used: usize,
}

/// Marks the union of `rects` as floor (0) and everything else as outside (-1).
pub fn rasterize(h: usize, w: usize, rects: &[Rect]) -> Result<StructureMatrix> {
    let mut s = StructureMatrix::filled(h, w, Cell::Obstacle)?;
    for r in rects {
        for row in r.top_left.row..=r.bottom_right.row {
            for col in r.top_left.col..=r.bottom_right.col {
                s.set(Coord::new(row, col), Cell::Free)?;
            }
        }
    }
    Ok(s)
}

fn random_rect<R: Rng + ?Sized>(h: usize, w: usize, rng: &mut R) -> Rect {
    let mut point = || Coord::new(rng.gen_range(0..h as i32), rng.gen_range(0..w as i32));
    let a = point();
    let b = point();
    Rect::from_diagonal(a, b)
}

/// A usable floor plan is one 4-connected region without enclosed holes.
/// Enclosed outside cells would be indistinguishable from placed pillars.
fn acceptable_contour(s: &StructureMatrix) -> bool {
    is_four_connected(s, Cell::is_floor) && enclosed_obstacles(s).is_empty()
}

/// Draws `n_rects` rectangles and redraws the whole set until their union is
/// usable, at most `max_retries` times.
pub fn generate_contour<R: Rng + ?Sized>(cfg: &StaticGenConfig, rng: &mut R) -> Result<Contour> {
    cfg.validate()?;
    for retries in 0..=cfg.max_retries {
        let rects: Vec<Rect> = (0..cfg.n_rects).map(|_| random_rect(cfg.h, cfg.w, rng)).collect();
        let matrix = rasterize(cfg.h, cfg.w, &rects)?;
        if acceptable_contour(&matrix) {
            return Ok(Contour { matrix, rects, retries_used: retries });
        }
    }
    Err(Error::GenerationFailed { retries: cfg.max_retries })
}

/// Cells where an entrance or exit may go: frontier squares whose eight
/// neighbours sum to exactly -3 (the middle of a straight wall).
pub fn entrance_candidates(contour: &StructureMatrix) -> Vec<Coord> {
    contour
        .coords()
        .filter(|&c| contour.classify_unchecked(c) == SquareClass::Frontier && contour.eight_sum_unchecked(c) == -3)
        .collect()
}

pub fn inner_squares(contour: &StructureMatrix) -> Vec<Coord> {
    contour.coords().filter(|&c| contour.classify_unchecked(c) == SquareClass::Inner).collect()
}

fn max_pairwise_distance(pool: &[Coord]) -> u32 {
    // Manhattan diameter via the rotated coordinates u = r + c, v = r - c.
    let (mut umin, mut umax, mut vmin, mut vmax) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for c in pool {
        let (u, v) = (c.row + c.col, c.row - c.col);
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    if pool.is_empty() {
        0
    } else {
        (umax - umin).max(vmax - vmin) as u32
    }
}

/// Rejection sampling of `n` cells from `pool` with pairwise distance >= `sigma`.
/// Any conflicting draw discards the whole set, so the accepted set is uniform
/// over all feasible ordered selections.
fn sample_spread<R: Rng + ?Sized>(
    pool: &[Coord],
    n: usize,
    sigma: u32,
    max_retries: usize,
    constraint: &'static str,
    rng: &mut R,
) -> Result<(Vec<Coord>, usize)> {
    if n == 0 {
        return Ok((Vec::new(), 0));
    }
    if pool.len() < n {
        return Err(Error::Infeasible { constraint: "eligible-cells", retries: 0 });
    }
    if n >= 2 && max_pairwise_distance(pool) < sigma {
        return Err(Error::Infeasible { constraint, retries: 0 });
    }
    let mut picks = Vec::with_capacity(n);
    'retry: for retries in 0..=max_retries {
        picks.clear();
        for _ in 0..n {
            let c = pool[rng.gen_range(0..pool.len())];
            if picks.iter().any(|&p| manhattan(p, c) < sigma) {
                continue 'retry;
            }
            picks.push(c);
        }
        return Ok((picks, retries));
    }
    Err(Error::Infeasible { constraint, retries: max_retries })
}

/// The matrix as it looked before entrances/exits/obstacles/lanes: floor is 0,
/// outside is -1.
pub fn underlying_contour(s: &StructureMatrix) -> StructureMatrix {
    let mut contour = s.clone();
    for (c, cell) in s.iter() {
        if cell.is_floor() {
            contour.set(c, Cell::Free).expect("in bounds");
        }
    }
    for c in enclosed_obstacles(s) {
        contour.set(c, Cell::Free).expect("in bounds");
    }
    contour
}

#[derive(Clone, Debug)]
pub struct EntrancePlacement {
    pub matrix: StructureMatrix,
    pub entrances: Vec<Coord>,
    pub exits: Vec<Coord>,
    pub retries_used: usize,
}

/// Places `n_entrances` entrances (code 2) then `n_exits` exits (code 3) on a
/// `{-1, 0}` contour.
pub fn place_entrances<R: Rng + ?Sized>(
    s: &StructureMatrix,
    cfg: &StaticGenConfig,
    rng: &mut R,
) -> Result<EntrancePlacement> {
    if let Some((c, cell)) = s.iter().find(|&(_, c)| !matches!(c, Cell::Obstacle | Cell::Free)) {
        return Err(Error::WrongCell { row: c.row, col: c.col, found: cell.code(), expected: "-1 or 0" });
    }
    let pool = entrance_candidates(s);
    let n = cfg.n_entrances + cfg.n_exits;
    let (picks, retries_used) = sample_spread(&pool, n, cfg.sigma1, cfg.max_retries, "sigma1", rng)?;
    let mut matrix = s.clone();
    let (entrances, exits) = picks.split_at(cfg.n_entrances);
    for &c in entrances {
        matrix.set(c, Cell::Entrance)?;
    }
    for &c in exits {
        matrix.set(c, Cell::Exit)?;
    }
    Ok(EntrancePlacement { matrix, entrances: entrances.to_vec(), exits: exits.to_vec(), retries_used })
}

#[derive(Clone, Debug)]
pub struct ObstaclePlacement {
    pub matrix: StructureMatrix,
    pub obstacles: Vec<Coord>,
    pub retries_used: usize,
}

/// Turns `n_obstacles` inner squares into pillars (-1). Inner squares are
/// judged on the underlying contour; only currently free cells are eligible.
pub fn place_obstacles<R: Rng + ?Sized>(
    s: &StructureMatrix,
    cfg: &StaticGenConfig,
    rng: &mut R,
) -> Result<ObstaclePlacement> {
    if cfg.n_obstacles == 0 {
        return Ok(ObstaclePlacement { matrix: s.clone(), obstacles: Vec::new(), retries_used: 0 });
    }
    let contour = underlying_contour(s);
    let pool: Vec<Coord> = inner_squares(&contour).into_iter().filter(|&c| s.get(c) == Cell::Free).collect();
    let (obstacles, retries_used) =
        sample_spread(&pool, cfg.n_obstacles, cfg.sigma2, cfg.max_retries, "sigma2", rng)?;
    let mut matrix = s.clone();
    for &c in &obstacles {
        matrix.set(c, Cell::Obstacle)?;
    }
    Ok(ObstaclePlacement { matrix, obstacles, retries_used })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    ContourDisconnected,
    EntranceCount,
    ExitCount,
    ObstacleCount,
    EntranceNotFrontier,
    EntranceCorner,
    ExitNotFrontier,
    ExitCorner,
    Sigma1,
    ObstacleNotInner,
    Sigma2,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::ContourDisconnected => "contour-disconnected",
            ViolationKind::EntranceCount => "entrance-count",
            ViolationKind::ExitCount => "exit-count",
            ViolationKind::ObstacleCount => "obstacle-count",
            ViolationKind::EntranceNotFrontier => "entrance-not-frontier",
            ViolationKind::EntranceCorner => "entrance-corner",
            ViolationKind::ExitNotFrontier => "exit-not-frontier",
            ViolationKind::ExitCorner => "exit-corner",
            ViolationKind::Sigma1 => "sigma1",
            ViolationKind::ObstacleNotInner => "obstacle-not-inner",
            ViolationKind::Sigma2 => "sigma2",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub at: Vec<Coord>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticReport {
    pub contour_cell_count: usize,
    pub entrance_coords: Vec<Coord>,
    pub exit_coords: Vec<Coord>,
    pub obstacle_coords: Vec<Coord>,
    pub retries_used: usize,
    pub violations: Vec<Violation>,
}

impl StaticReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Re-derives every placement constraint from the matrix alone.
///
/// Pillars are recognised as obstacle cells not connected to the outside
/// through other obstacle cells. Lane cells are treated as floor, so finished
/// layouts validate the same way as freshly generated ones.
pub fn validate_static(s: &StructureMatrix, cfg: &StaticGenConfig) -> StaticReport {
    let contour = underlying_contour(s);
    let entrances = s.positions_of(Cell::Entrance);
    let exits = s.positions_of(Cell::Exit);
    let obstacles = enclosed_obstacles(s);
    let mut violations = Vec::new();
    let mut flag = |kind, at: Vec<Coord>| violations.push(Violation { kind, at });

    if !is_four_connected(&contour, Cell::is_floor) {
        flag(ViolationKind::ContourDisconnected, Vec::new());
    }
    if entrances.len() != cfg.n_entrances {
        flag(ViolationKind::EntranceCount, entrances.clone());
    }
    if exits.len() != cfg.n_exits {
        flag(ViolationKind::ExitCount, exits.clone());
    }
    if obstacles.len() != cfg.n_obstacles {
        flag(ViolationKind::ObstacleCount, obstacles.clone());
    }

    let wall_checks = [
        (&entrances, ViolationKind::EntranceNotFrontier, ViolationKind::EntranceCorner),
        (&exits, ViolationKind::ExitNotFrontier, ViolationKind::ExitCorner),
    ];
    for (cells, not_frontier, corner) in wall_checks {
        for &c in cells {
            if contour.classify_unchecked(c) != SquareClass::Frontier {
                flag(not_frontier, vec![c]);
            } else if contour.eight_sum_unchecked(c) != -3 {
                flag(corner, vec![c]);
            }
        }
    }

    let gates: Vec<Coord> = entrances.iter().chain(&exits).copied().collect();
    for (i, &a) in gates.iter().enumerate() {
        for &b in &gates[i + 1..] {
            if manhattan(a, b) < cfg.sigma1 {
                flag(ViolationKind::Sigma1, vec![a, b]);
            }
        }
    }

    for &o in &obstacles {
        if contour.classify_unchecked(o) != SquareClass::Inner {
            flag(ViolationKind::ObstacleNotInner, vec![o]);
        }
    }
    for (i, &a) in obstacles.iter().enumerate() {
        for &b in &obstacles[i + 1..] {
            if manhattan(a, b) < cfg.sigma2 {
                flag(ViolationKind::Sigma2, vec![a, b]);
            }
        }
    }

    StaticReport {
        contour_cell_count: contour.count(Cell::Free),
        entrance_coords: entrances,
        exit_coords: exits,
        obstacle_coords: obstacles,
        retries_used: 0,
        violations,
    }
}

#[derive(Clone, Debug)]
pub struct StaticLayout {
    pub matrix: StructureMatrix,
    pub rects: Vec<Rect>,
    pub report: StaticReport,
}

/// Entrances/exits then obstacles on a fixed contour.
pub fn furnish_contour<R: Rng + ?Sized>(
    contour: &StructureMatrix,
    cfg: &StaticGenConfig,
    rng: &mut R,
) -> Result<(StructureMatrix, usize)> {
    let gates = place_entrances(contour, cfg, rng)?;
    let pillars = place_obstacles(&gates.matrix, cfg, rng)?;
    Ok((pillars.matrix, gates.retries_used + pillars.retries_used))
}

/// Full static pipeline seeded from `cfg.seed`.
///
/// When entrances or obstacles cannot be placed on a contour, a fresh contour
/// is drawn from the same RNG stream; at most `max_retries` contours are tried.
pub fn generate_static(cfg: &StaticGenConfig) -> Result<StaticLayout> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut retries_used = 0;
    let mut last_err = None;
    for _ in 0..=cfg.max_retries {
        let contour = generate_contour(cfg, &mut rng)?;
        retries_used += contour.retries_used;
        match furnish_contour(&contour.matrix, cfg, &mut rng) {
            Ok((matrix, placement_retries)) => {
                retries_used += placement_retries;
                let mut report = validate_static(&matrix, cfg);
                report.retries_used = retries_used;
                return Ok(StaticLayout { matrix, rects: contour.rects, report });
            }
            Err(e @ Error::Infeasible { .. }) => {
                debug!("seed {}: {e}; redrawing contour", cfg.seed);
                retries_used += 1;
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::GenerationFailed { retries: retries_used }))
}

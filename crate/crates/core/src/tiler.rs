//! Tile classification for scene export.
//!
//! Lane cells become crossroads, T-junctions or straight road pieces by their
//! number of drivable neighbours; free cells become parking tiles of type 1-3
//! or unused floor. Entrances and exits count as drivable neighbours.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::SpotType;
use crate::grid::{Cell, Coord, Dir, StructureMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileKind {
    Crossroads,
    TJunction,
    Straight,
    Park1,
    Park2,
    Park3,
    /// Unused square (parking type 4).
    Free,
    Entrance,
    Exit,
    Obstacle,
}

impl TileKind {
    pub const ALL: [TileKind; 10] = [
        TileKind::Crossroads,
        TileKind::TJunction,
        TileKind::Straight,
        TileKind::Park1,
        TileKind::Park2,
        TileKind::Park3,
        TileKind::Free,
        TileKind::Entrance,
        TileKind::Exit,
        TileKind::Obstacle,
    ];

    pub fn is_parking(self) -> bool {
        matches!(self, TileKind::Park1 | TileKind::Park2 | TileKind::Park3)
    }

    pub fn is_directional(self) -> bool {
        matches!(self, TileKind::TJunction | TileKind::Straight) || self.is_parking()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TileKind::Crossroads => "crossroads",
            TileKind::TJunction => "t_junction",
            TileKind::Straight => "straight",
            TileKind::Park1 => "park1",
            TileKind::Park2 => "park2",
            TileKind::Park3 => "park3",
            TileKind::Free => "free",
            TileKind::Entrance => "entrance",
            TileKind::Exit => "exit",
            TileKind::Obstacle => "obstacle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tile {
    pub kind: TileKind,
    pub orientation: Dir,
}

impl Tile {
    fn plain(kind: TileKind) -> Tile {
        Tile { kind, orientation: Dir::N }
    }
}

fn first_set(mask: [bool; 4]) -> Option<Dir> {
    Dir::ALL.into_iter().find(|d| mask[d.index()])
}

/// Lane tile from the N, E, S, W drivable flags.
pub fn lane_tile(mask: [bool; 4]) -> Tile {
    let n = mask.iter().filter(|&&b| b).count();
    match n {
        4 => Tile::plain(TileKind::Crossroads),
        3 => {
            let missing = Dir::ALL.into_iter().find(|d| !mask[d.index()]).expect("one side missing");
            Tile { kind: TileKind::TJunction, orientation: missing.opposite() }
        }
        2 if mask[Dir::N.index()] && mask[Dir::S.index()] => Tile::plain(TileKind::Straight),
        2 if mask[Dir::E.index()] && mask[Dir::W.index()] => Tile { kind: TileKind::Straight, orientation: Dir::E },
        // bends point at their first drivable side
        2 => Tile { kind: TileKind::Straight, orientation: first_set(mask).expect("two sides set") },
        _ => Tile::plain(TileKind::Straight),
    }
}

/// Parking tile from the N, E, S, W drivable flags.
pub fn parking_tile(mask: [bool; 4]) -> Tile {
    let kind = match SpotType::from_mask(mask) {
        SpotType::Type1 => TileKind::Park1,
        SpotType::Type2 => TileKind::Park2,
        SpotType::Type3 => TileKind::Park3,
        SpotType::Type4 => return Tile::plain(TileKind::Free),
    };
    Tile { kind, orientation: first_set(mask).expect("spot has a drivable side") }
}

pub fn classify_lane_tile(s: &StructureMatrix, c: Coord) -> Result<Tile> {
    s.check(c)?;
    match s.get(c) {
        Cell::Lane => Ok(lane_tile(s.drivable_mask(c))),
        other => Err(Error::WrongCell { row: c.row, col: c.col, found: other.code(), expected: "1 (lane)" }),
    }
}

pub fn classify_parking_tile(s: &StructureMatrix, c: Coord) -> Result<Tile> {
    s.check(c)?;
    match s.get(c) {
        Cell::Free => Ok(parking_tile(s.drivable_mask(c))),
        other => Err(Error::WrongCell { row: c.row, col: c.col, found: other.code(), expected: "0 (free)" }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileMap {
    pub h: usize,
    pub w: usize,
    /// Row-major.
    pub tiles: Vec<Tile>,
    pub source_hash: String,
}

impl TileMap {
    pub fn get(&self, c: Coord) -> Tile {
        self.tiles[c.row as usize * self.w + c.col as usize]
    }

    pub fn count(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|t| t.kind == kind).count()
    }

    pub fn parking_count(&self) -> usize {
        self.tiles.iter().filter(|t| t.kind.is_parking()).count()
    }
}

pub fn tile_at(s: &StructureMatrix, c: Coord) -> Tile {
    match s.get(c) {
        Cell::Lane => lane_tile(s.drivable_mask(c)),
        Cell::Free => parking_tile(s.drivable_mask(c)),
        Cell::Entrance => Tile::plain(TileKind::Entrance),
        Cell::Exit => Tile::plain(TileKind::Exit),
        Cell::Obstacle => Tile::plain(TileKind::Obstacle),
    }
}

pub fn tile_map(s: &StructureMatrix) -> TileMap {
    TileMap {
        h: s.height(),
        w: s.width(),
        tiles: s.coords().map(|c| tile_at(s, c)).collect(),
        source_hash: s.content_hash(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{count_spots, unused_squares};

    fn with_neighbours(center: Cell, mask: [bool; 4]) -> StructureMatrix {
        let mut s = StructureMatrix::filled(3, 3, Cell::Free).unwrap();
        let c = Coord::new(1, 1);
        s.set(c, center).unwrap();
        for d in Dir::ALL {
            if mask[d.index()] {
                s.set(c.step(d), Cell::Lane).unwrap();
            }
        }
        s
    }

    #[test]
    fn lane_examples() {
        let c = Coord::new(1, 1);
        let t = classify_lane_tile(&with_neighbours(Cell::Lane, [true; 4]), c).unwrap();
        assert_eq!(t.kind, TileKind::Crossroads);
        let t = classify_lane_tile(&with_neighbours(Cell::Lane, [true, false, true, false]), c).unwrap();
        assert_eq!(t, Tile { kind: TileKind::Straight, orientation: Dir::N });
        let t = classify_lane_tile(&with_neighbours(Cell::Lane, [true, true, true, false]), c).unwrap();
        assert_eq!(t, Tile { kind: TileKind::TJunction, orientation: Dir::E });
    }

    #[test]
    fn t_junction_orientations() {
        // missing side -> orientation is its opposite
        let cases = [
            ([false, true, true, true], Dir::S),
            ([true, false, true, true], Dir::W),
            ([true, true, false, true], Dir::N),
            ([true, true, true, false], Dir::E),
        ];
        for (mask, want) in cases {
            assert_eq!(lane_tile(mask), Tile { kind: TileKind::TJunction, orientation: want });
        }
    }

    #[test]
    fn parking_examples() {
        let c = Coord::new(1, 1);
        let t = classify_parking_tile(&with_neighbours(Cell::Free, [true, false, true, false]), c).unwrap();
        assert_eq!(t, Tile { kind: TileKind::Park1, orientation: Dir::N });
        let t = classify_parking_tile(&with_neighbours(Cell::Free, [true, true, false, false]), c).unwrap();
        assert_eq!(t, Tile { kind: TileKind::Park2, orientation: Dir::N });
        let t = classify_parking_tile(&with_neighbours(Cell::Free, [false; 4]), c).unwrap();
        assert_eq!(t.kind, TileKind::Free);
        let t = parking_tile([false, false, false, true]);
        assert_eq!(t, Tile { kind: TileKind::Park3, orientation: Dir::W });
    }

    #[test]
    fn wrong_cell_errors() {
        let s = with_neighbours(Cell::Free, [false; 4]);
        assert!(matches!(classify_lane_tile(&s, Coord::new(1, 1)), Err(Error::WrongCell { .. })));
        let s = with_neighbours(Cell::Lane, [false; 4]);
        assert!(matches!(classify_parking_tile(&s, Coord::new(1, 1)), Err(Error::WrongCell { .. })));
        assert!(classify_parking_tile(&s, Coord::new(5, 1)).is_err());
    }

    #[test]
    fn entrance_counts_as_drivable() {
        let s = StructureMatrix::from_codes(&[[2, 0, 3]]).unwrap();
        assert_eq!(tile_at(&s, Coord::new(0, 1)).kind, TileKind::Park1);
    }

    #[test]
    fn isolated_lane_is_straight() {
        assert_eq!(lane_tile([false; 4]), Tile::plain(TileKind::Straight));
        assert_eq!(lane_tile([false, true, false, false]), Tile::plain(TileKind::Straight));
    }

    #[test]
    fn all_obstacle_map() {
        let s = StructureMatrix::filled(3, 4, Cell::Obstacle).unwrap();
        let t = tile_map(&s);
        assert_eq!(t.tiles.len(), 12);
        assert_eq!(t.count(TileKind::Obstacle), 12);
    }

    #[test]
    fn counts_agree_with_evaluator() {
        let s = StructureMatrix::from_codes(&[
            [0, 0, 2, 0, 0],
            [0, 1, 1, 1, 0],
            [0, 1, 0, 1, 0],
            [0, 0, 0, 1, 3],
        ])
        .unwrap();
        let t = tile_map(&s);
        assert_eq!(t.parking_count(), count_spots(&s).0);
        assert_eq!(t.count(TileKind::Free), unused_squares(&s));
        assert_eq!(t.source_hash, s.content_hash());
    }
}

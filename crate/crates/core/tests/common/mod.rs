//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use garage_pcg::env::{Action, LaneEnv, RewardConfig};
use garage_pcg::grid::{Cell, Coord, Dir, SquareClass, StructureMatrix};
use garage_pcg::rng_from_seed;
use garage_pcg::tiler::TileKind;
use rand::Rng;

pub fn parse(rows: &[&str]) -> StructureMatrix {
    garage_pcg::io::text::parse_ascii(&rows.join("\n")).unwrap()
}

/// 7x9 full contour, entrance top, exit bottom.
pub fn garage_7x9() -> StructureMatrix {
    parse(&[
        "..E......",
        ".........",
        ".........",
        ".........",
        ".........",
        ".........",
        ".......X.",
    ])
}

/// Lanes along the outer wall; every stall row has lane on one side only.
pub fn perimeter_7x9() -> StructureMatrix {
    parse(&[
        "==E======",
        "=.......=",
        "=.......=",
        "=.......=",
        "=.......=",
        "=.......=",
        "=======X=",
    ])
}

/// Two long lanes, each serving a stall row on both sides.
pub fn serpentine_7x9() -> StructureMatrix {
    parse(&[
        "..E......",
        "=========",
        "........=",
        "........=",
        "=========",
        ".......=.",
        ".......X.",
    ])
}

pub fn random_matrix(seed: u64, h: usize, w: usize, codes: &[i8]) -> StructureMatrix {
    let mut rng = rng_from_seed(seed);
    let rows: Vec<Vec<i64>> =
        (0..h).map(|_| (0..w).map(|_| codes[rng.gen_range(0..codes.len())] as i64).collect()).collect();
    StructureMatrix::from_codes(&rows).unwrap()
}

fn code_at(s: &StructureMatrix, r: i64, c: i64) -> i64 {
    if r < 0 || c < 0 || r >= s.height() as i64 || c >= s.width() as i64 {
        -1
    } else {
        s.to_codes()[r as usize][c as usize] as i64
    }
}

/// Raw eight-neighbour code sum, reading outside cells as -1.
pub fn oracle_eight_sum(s: &StructureMatrix, r: usize, c: usize) -> i64 {
    let mut sum = 0;
    for dr in -1..=1i64 {
        for dc in -1..=1i64 {
            if dr != 0 || dc != 0 {
                sum += code_at(s, r as i64 + dr, c as i64 + dc);
            }
        }
    }
    sum
}

pub fn oracle_class(s: &StructureMatrix, r: usize, c: usize) -> SquareClass {
    if s.to_codes()[r][c] != 0 {
        return SquareClass::Neither;
    }
    match oracle_eight_sum(s, r, c) {
        x if x < 0 => SquareClass::Frontier,
        0 => SquareClass::Inner,
        _ => SquareClass::Neither,
    }
}

fn drivable(code: i64) -> bool {
    (1..=3).contains(&code)
}

/// Counts of (spots, unused) straight from the definitions.
pub fn oracle_spots_unused(s: &StructureMatrix) -> (usize, usize) {
    let (mut spots, mut unused) = (0, 0);
    for r in 0..s.height() as i64 {
        for c in 0..s.width() as i64 {
            if code_at(s, r, c) != 0 {
                continue;
            }
            let n = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                .iter()
                .filter(|&&(a, b)| drivable(code_at(s, a, b)))
                .count();
            if n > 0 {
                spots += 1;
            } else {
                unused += 1;
            }
        }
    }
    (spots, unused)
}

/// Mean parking time by repeated relaxation instead of a queue.
pub fn oracle_avg_time(s: &StructureMatrix) -> f64 {
    let (h, w) = (s.height() as i64, s.width() as i64);
    let inf = u64::MAX;
    let mut d = vec![vec![inf; w as usize]; h as usize];
    for r in 0..h {
        for c in 0..w {
            if code_at(s, r, c) == 2 {
                d[r as usize][c as usize] = 0;
            }
        }
    }
    loop {
        let mut changed = false;
        for r in 0..h {
            for c in 0..w {
                if !drivable(code_at(s, r, c)) {
                    continue;
                }
                for (a, b) in [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)] {
                    if drivable(code_at(s, a, b)) && d[a as usize][b as usize] != inf {
                        let cand = d[a as usize][b as usize] + 1;
                        if cand < d[r as usize][c as usize] {
                            d[r as usize][c as usize] = cand;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let (mut total, mut n) = (0.0, 0usize);
    for r in 0..h {
        for c in 0..w {
            if code_at(s, r, c) != 0 {
                continue;
            }
            let adj: Vec<(i64, i64)> = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                .into_iter()
                .filter(|&(a, b)| drivable(code_at(s, a, b)))
                .collect();
            if adj.is_empty() {
                continue;
            }
            n += 1;
            let best = adj.iter().map(|&(a, b)| d[a as usize][b as usize]).min().unwrap();
            total += if best == inf { (h * w) as f64 } else { (best + 1) as f64 };
        }
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

/// Best episode return over every action sequence until termination.
pub fn brute_force_best_return(garage: &StructureMatrix, cfg: &RewardConfig) -> f64 {
    fn go(env: &LaneEnv, acc: f64, best: &mut f64) {
        for a in Action::ALL {
            let mut next = env.clone();
            let out = next.step(a).unwrap();
            if out.status.is_terminal() {
                // the terminal reward is not part of the return
                if acc > *best {
                    *best = acc;
                }
            } else {
                go(&next, acc + out.reward, best);
            }
        }
    }
    let (env, _) = LaneEnv::reset(garage, cfg).unwrap();
    let mut best = f64::NEG_INFINITY;
    go(&env, 0.0, &mut best);
    best
}

pub fn full(h: usize, w: usize) -> StructureMatrix {
    StructureMatrix::filled(h, w, Cell::Free).unwrap()
}

pub fn at(r: i32, c: i32) -> Coord {
    Coord { row: r, col: c }
}

/// Hand-written table indexed by the N,E,S,W drivable bits (N = bit 0).
pub const LANE: [(TileKind, Dir); 16] = [
    (TileKind::Straight, Dir::N),   // none
    (TileKind::Straight, Dir::N),   // N
    (TileKind::Straight, Dir::N),   // E
    (TileKind::Straight, Dir::N),   // N E
    (TileKind::Straight, Dir::N),   // S
    (TileKind::Straight, Dir::N),   // N S
    (TileKind::Straight, Dir::E),   // E S
    (TileKind::TJunction, Dir::E),  // N E S
    (TileKind::Straight, Dir::N),   // W
    (TileKind::Straight, Dir::N),   // N W
    (TileKind::Straight, Dir::E),   // E W
    (TileKind::TJunction, Dir::N),  // N E W
    (TileKind::Straight, Dir::S),   // S W
    (TileKind::TJunction, Dir::W),  // N S W
    (TileKind::TJunction, Dir::S),  // E S W
    (TileKind::Crossroads, Dir::N), // all
];

pub const PARKING: [(TileKind, Dir); 16] = [
    (TileKind::Free, Dir::N),  // none
    (TileKind::Park3, Dir::N), // N
    (TileKind::Park3, Dir::E), // E
    (TileKind::Park2, Dir::N), // N E
    (TileKind::Park3, Dir::S), // S
    (TileKind::Park1, Dir::N), // N S
    (TileKind::Park2, Dir::E), // E S
    (TileKind::Park1, Dir::N), // N E S
    (TileKind::Park3, Dir::W), // W
    (TileKind::Park2, Dir::N), // N W
    (TileKind::Park1, Dir::E), // E W
    (TileKind::Park1, Dir::N), // N E W
    (TileKind::Park2, Dir::S), // S W
    (TileKind::Park1, Dir::N), // N S W
    (TileKind::Park1, Dir::E), // E S W
    (TileKind::Park1, Dir::N), // all
];


/// 3x3 matrix whose centre has drivable neighbours on the sides set in `bits`.
pub fn pattern(center: Cell, bits: usize, filler: Cell, drive: Cell) -> StructureMatrix {
    let mut s = StructureMatrix::filled(3, 3, filler).unwrap();
    let c = Coord::new(1, 1);
    s.set(c, center).unwrap();
    for (i, d) in Dir::ALL.into_iter().enumerate() {
        if bits & (1 << i) != 0 {
            s.set(c.step(d), drive).unwrap();
        }
    }
    s
}

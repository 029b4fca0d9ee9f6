//! Procedural generation of static underground-garage layouts.
//!
//! The pipeline draws a garage contour from a union of random rectangles,
//! places entrances, exits and pillars, then trains a tabular Sarsa agent that
//! paints lanes onto the floor plan. Finished layouts are scored by parking
//! spot count, average parking time and unused floor, classified into tiles,
//! and exported as text, SVG or a JSON scene document.

pub mod cli;
pub mod env;
pub mod error;
pub mod evaluator;
pub mod grid;
pub mod io;
pub mod sarsa;
pub mod static_gen;
pub mod tiler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use error::{Error, Result};
pub use grid::{Cell, Coord, StructureMatrix};

/// The RNG used everywhere a seed is accepted.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

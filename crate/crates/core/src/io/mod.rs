//! File formats and exports.

pub mod config;
pub mod run;
pub mod scene;
pub mod svg;
pub mod text;

pub use config::RunConfig;
pub use scene::{GarageSpec, SceneDoc};

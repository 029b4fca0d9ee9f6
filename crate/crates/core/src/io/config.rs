//! Run configuration, stored as TOML with one section per stage.
//!
//! ```toml
//! [static]
//! h = 7
//! w = 9
//! seed = 1
//!
//! [reward]
//! p_step = 0.05
//!
//! [sarsa]
//! episodes = 5000
//!
//! [eval]
//! k1 = 1.0
//! k2 = -5.0
//! k3 = -1.0
//!
//! [dimensions]
//! row_widths = [5.5, 5.5, 5.5, 5.5, 5.5, 5.5, 5.5]
//! ```
//!
//! Every key is optional; missing keys take their defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::RewardConfig;
use crate::error::{Error, Result};
use crate::evaluator::EvalCoefficients;
use crate::sarsa::SarsaConfig;
use crate::static_gen::StaticGenConfig;

/// Side of a grid cell in meters when no explicit widths are given. Fits one
/// 2.5 m x 5.3 m stall in either orientation and one two-way lane.
pub const DEFAULT_CELL_METERS: f64 = 5.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dimensions {
    /// Height in meters of each grid row.
    pub row_widths: Option<Vec<f64>>,
    /// Width in meters of each grid column.
    pub col_widths: Option<Vec<f64>>,
    pub default_row_width: f64,
    pub default_col_width: f64,
}

impl Default for Dimensions {
    fn default() -> Self {
        Dimensions {
            row_widths: None,
            col_widths: None,
            default_row_width: DEFAULT_CELL_METERS,
            default_col_width: DEFAULT_CELL_METERS,
        }
    }
}

impl Dimensions {
    /// Row and column widths for an `h x w` matrix.
    pub fn resolve(&self, h: usize, w: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let pick = |given: &Option<Vec<f64>>, default: f64, n: usize, field| -> Result<Vec<f64>> {
            let v = given.clone().unwrap_or_else(|| vec![default; n]);
            if v.len() != n {
                return Err(Error::DimensionMismatch { field, expected: n, found: v.len() });
            }
            if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidConfig(format!("{field} must all be positive")));
            }
            Ok(v)
        };
        Ok((
            pick(&self.row_widths, self.default_row_width, h, "row_widths")?,
            pick(&self.col_widths, self.default_col_width, w, "col_widths")?,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// One of error, warn, info, debug, trace.
    pub verbosity: String,
    /// Write a Q-table checkpoint every this many episodes; 0 disables.
    pub checkpoint_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, verbosity: "info".into(), checkpoint_every: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "static")]
    pub static_gen: StaticGenConfig,
    pub reward: RewardConfig,
    pub sarsa: SarsaConfig,
    pub eval: EvalCoefficients,
    pub dimensions: Dimensions,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.static_gen.validate()?;
        self.reward.validate()?;
        self.sarsa.validate()
    }

    /// Applies one seed to both the static generator and the learner.
    pub fn set_seed(&mut self, seed: u64) {
        self.static_gen.seed = seed;
        self.sarsa.seed = seed;
    }

    /// SHA-256 of every section that affects generated content. The output
    /// section is left out so the same run in another directory hashes equal.
    pub fn content_hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            static_gen: &'a StaticGenConfig,
            reward: &'a RewardConfig,
            sarsa: &'a SarsaConfig,
            eval: &'a EvalCoefficients,
            dimensions: &'a Dimensions,
        }
        let canonical = serde_json::to_vec(&Hashed {
            static_gen: &self.static_gen,
            reward: &self.reward,
            sarsa: &self.sarsa,
            eval: &self.eval,
            dimensions: &self.dimensions,
        })
        .expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }
}

/// Parses `k1,k2,k3`.
pub fn parse_coeffs(s: &str) -> Result<EvalCoefficients> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidConfig(format!("bad coefficients `{s}`")))?;
    match parts[..] {
        [k1, k2, k3] => Ok(EvalCoefficients::new(k1, k2, k3)),
        _ => Err(Error::InvalidConfig(format!("expected three coefficients, got `{s}`"))),
    }
}

//! JSON scene document consumed by external engines.
//!
//! Layout (keys in this order):
//!
//! * `version`: always [`SCENE_VERSION`].
//! * `garage`: `h`, `w`, `matrix` (rows of integer codes), `row_widths`,
//!   `col_widths` in meters.
//! * `tiles`: `kinds` and `orientations` as row-major grids of strings, plus
//!   `counts` per tile kind.
//! * `evaluation`: `n_spots`, `avg_time`, `unused`, `score`.
//! * `coefficients`: `k1`, `k2`, `k3`.
//! * `provenance`: `seed`, `config_hash`, `matrix_hash`, `tool_version`.
//!
//! The document carries no timestamps, so it is a pure function of its
//! inputs. `schema/scene.schema.json` in the crate root describes it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{EvalCoefficients, Evaluation};
use crate::grid::{Cell, Dir, StructureMatrix};
use crate::tiler::{TileKind, TileMap};

pub const SCENE_VERSION: &str = "garage-scene/1";

/// A structure matrix with real-world row and column sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct GarageSpec {
    pub matrix: StructureMatrix,
    pub row_widths: Vec<f64>,
    pub col_widths: Vec<f64>,
}

impl GarageSpec {
    pub fn new(matrix: StructureMatrix, row_widths: Vec<f64>, col_widths: Vec<f64>) -> Result<GarageSpec> {
        let spec = GarageSpec { matrix, row_widths, col_widths };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        let (h, w) = (self.matrix.height(), self.matrix.width());
        if self.row_widths.len() != h {
            return Err(Error::Inconsistent {
                field: "garage.row_widths",
                detail: format!("{} entries for {h} rows", self.row_widths.len()),
            });
        }
        if self.col_widths.len() != w {
            return Err(Error::Inconsistent {
                field: "garage.col_widths",
                detail: format!("{} entries for {w} columns", self.col_widths.len()),
            });
        }
        if self.row_widths.iter().chain(&self.col_widths).any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Inconsistent { field: "garage", detail: "widths must be positive".into() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneGarage {
    pub h: usize,
    pub w: usize,
    pub matrix: Vec<Vec<i8>>,
    pub row_widths: Vec<f64>,
    pub col_widths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneTiles {
    pub kinds: Vec<Vec<TileKind>>,
    pub orientations: Vec<Vec<Dir>>,
    pub counts: BTreeMap<TileKind, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneEvaluation {
    pub n_spots: usize,
    pub avg_time: f64,
    pub unused: usize,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
    pub matrix_hash: String,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    pub version: String,
    pub garage: SceneGarage,
    pub tiles: SceneTiles,
    pub evaluation: SceneEvaluation,
    pub coefficients: EvalCoefficients,
    pub provenance: Provenance,
}

/// Where a scene came from. Both fields are absent for hand-made matrices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Origin {
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
}

pub fn export_scene(
    spec: &GarageSpec,
    t: &TileMap,
    e: &Evaluation,
    coeffs: &EvalCoefficients,
    origin: &Origin,
) -> Result<SceneDoc> {
    spec.check()?;
    let m = &spec.matrix;
    let matrix_hash = m.content_hash();
    if (t.h, t.w) != (m.height(), m.width()) {
        return Err(Error::Inconsistent {
            field: "tiles",
            detail: format!("{}x{} tiles for a {}x{} matrix", t.h, t.w, m.height(), m.width()),
        });
    }
    if t.source_hash != matrix_hash {
        return Err(Error::Inconsistent { field: "tiles", detail: "tile map built from another matrix".into() });
    }
    if e.n_spots != t.parking_count() {
        return Err(Error::Inconsistent {
            field: "evaluation.n_spots",
            detail: format!("{} spots but {} parking tiles", e.n_spots, t.parking_count()),
        });
    }
    if e.unused != t.count(TileKind::Free) {
        return Err(Error::Inconsistent {
            field: "evaluation.unused",
            detail: format!("{} unused but {} free tiles", e.unused, t.count(TileKind::Free)),
        });
    }
    if e.score != coeffs.score(e.n_spots, e.avg_time, e.unused) {
        return Err(Error::Inconsistent { field: "coefficients", detail: "score does not match coefficients".into() });
    }

    let kinds = t.tiles.chunks(t.w).map(|r| r.iter().map(|x| x.kind).collect()).collect();
    let orientations = t.tiles.chunks(t.w).map(|r| r.iter().map(|x| x.orientation).collect()).collect();
    let counts = TileKind::ALL.into_iter().map(|k| (k, t.count(k))).collect();

    Ok(SceneDoc {
        version: SCENE_VERSION.to_string(),
        garage: SceneGarage {
            h: m.height(),
            w: m.width(),
            matrix: m.rows().map(|r| r.iter().map(|c| c.code()).collect()).collect(),
            row_widths: spec.row_widths.clone(),
            col_widths: spec.col_widths.clone(),
        },
        tiles: SceneTiles { kinds, orientations, counts },
        evaluation: SceneEvaluation { n_spots: e.n_spots, avg_time: e.avg_time, unused: e.unused, score: e.score },
        coefficients: *coeffs,
        provenance: Provenance {
            seed: origin.seed,
            config_hash: origin.config_hash.clone(),
            matrix_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

impl SceneDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    /// Parses and checks a document: version, grid shapes and matrix hash.
    pub fn from_json(text: &str) -> Result<SceneDoc> {
        let doc: SceneDoc = serde_json::from_str(text)?;
        if doc.version != SCENE_VERSION {
            return Err(Error::Inconsistent { field: "version", detail: format!("unsupported `{}`", doc.version) });
        }
        let spec = doc.garage_spec()?;
        if spec.matrix.content_hash() != doc.provenance.matrix_hash {
            return Err(Error::Inconsistent {
                field: "provenance.matrix_hash",
                detail: "hash does not match embedded matrix".into(),
            });
        }
        let (h, w) = (doc.garage.h, doc.garage.w);
        let shaped = |grid_rows: usize, widths: Vec<usize>| grid_rows == h && widths.iter().all(|&n| n == w);
        if !shaped(doc.tiles.kinds.len(), doc.tiles.kinds.iter().map(Vec::len).collect()) {
            return Err(Error::Inconsistent { field: "tiles.kinds", detail: format!("expected {h}x{w}") });
        }
        if !shaped(doc.tiles.orientations.len(), doc.tiles.orientations.iter().map(Vec::len).collect()) {
            return Err(Error::Inconsistent { field: "tiles.orientations", detail: format!("expected {h}x{w}") });
        }
        Ok(doc)
    }

    pub fn garage_spec(&self) -> Result<GarageSpec> {
        let g = &self.garage;
        if g.matrix.len() != g.h || g.matrix.iter().any(|r| r.len() != g.w) {
            return Err(Error::Inconsistent { field: "garage.matrix", detail: format!("expected {}x{}", g.h, g.w) });
        }
        let cells = g.matrix.iter().flatten().map(|&v| Cell::try_from(v)).collect::<Result<Vec<_>>>()?;
        GarageSpec::new(StructureMatrix::from_cells(g.h, g.w, cells)?, g.row_widths.clone(), g.col_widths.clone())
    }
}

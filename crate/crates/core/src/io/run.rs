//! Run directories.
//!
//! ```text
//! <dir>/
//!   config.toml          effective configuration
//!   garage.txt           static layout the agent trained on
//!   curve.csv            episode,return,score,epsilon
//!   steps.csv            per-step audit log (verbose runs only)
//!   archive/index.csv    rank,episode,score,hash
//!   archive/rank_NNN.txt archived matrices, best first
//!   best_eval.json       evaluation of rank 1
//!   best_scene.json      scene document of rank 1
//!   qtable.txt           final Q-table
//!   checkpoints/         periodic Q-table dumps
//!   run_info.json        wall-clock timing, excluded from comparisons
//! ```
//!
//! Everything except `run_info.json` is a deterministic function of the
//! configuration and the starting Q-table.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::env::StepRecord;
use crate::error::{Error, Result};
use crate::evaluator::evaluate;
use crate::grid::StructureMatrix;
use crate::io::config::RunConfig;
use crate::io::scene::{export_scene, GarageSpec, Origin};
use crate::io::text::write_matrix_file;
use crate::sarsa::{train_with, CurveRow, QTable, RunArtifacts, TrainObserver};
use crate::static_gen::generate_static;
use crate::tiler::tile_map;

pub const CURVE_HEADER: [&str; 4] = ["episode", "return", "score", "epsilon"];

fn curve_writer<W: Write>(out: W) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CURVE_HEADER)?;
    Ok(w)
}

/// Curve CSV for a finished run.
pub fn export_curve(run: &RunArtifacts) -> Result<String> {
    let mut w = curve_writer(Vec::new())?;
    for row in &run.curve {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_curve(path: &Path) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// One line of `steps.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub episode: usize,
    pub t: usize,
    pub row: i32,
    pub col: i32,
    pub action: String,
    pub delta_spots: i64,
    pub turnback: f64,
    pub interval: f64,
    pub wheel: f64,
    pub step: f64,
    pub reward: f64,
    pub status: String,
}

pub fn read_steps(path: &Path) -> Result<Vec<StepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Streams curve rows, optional step rows and Q-table checkpoints to disk
/// while training runs.
pub struct RunWriter {
    dir: PathBuf,
    curve: csv::Writer<BufWriter<File>>,
    steps: Option<csv::Writer<BufWriter<File>>>,
    checkpoint_every: usize,
    pending: Option<Error>,
}

impl RunWriter {
    pub fn create(dir: &Path, verbose: bool, checkpoint_every: usize) -> Result<RunWriter> {
        fs::create_dir_all(dir)?;
        let curve = curve_writer(BufWriter::new(File::create(dir.join("curve.csv"))?))?;
        let steps = if verbose {
            Some(csv::Writer::from_writer(BufWriter::new(File::create(dir.join("steps.csv"))?)))
        } else {
            None
        };
        if checkpoint_every > 0 {
            fs::create_dir_all(dir.join("checkpoints"))?;
        }
        Ok(RunWriter { dir: dir.to_path_buf(), curve, steps, checkpoint_every, pending: None })
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(e) = self.pending.take() {
            return Err(e);
        }
        self.curve.flush()?;
        if let Some(s) = self.steps.as_mut() {
            s.flush()?;
        }
        Ok(())
    }
}

impl TrainObserver for RunWriter {
    fn on_step(&mut self, episode: usize, r: &StepRecord) {
        let (Some(steps), None) = (self.steps.as_mut(), self.pending.as_ref()) else {
            return;
        };
        let row = StepRow {
            episode,
            t: r.t,
            row: r.pos.row,
            col: r.pos.col,
            action: r.action.as_str().to_string(),
            delta_spots: r.delta_spots,
            turnback: r.penalties.turnback,
            interval: r.penalties.interval,
            wheel: r.penalties.wheel,
            step: r.penalties.step,
            reward: r.reward,
            status: r.status.as_str().to_string(),
        };
        if let Err(e) = steps.serialize(row) {
            self.pending = Some(e.into());
        }
    }

    fn on_episode(&mut self, row: &CurveRow, q: &QTable) -> Result<()> {
        if let Some(e) = self.pending.take() {
            return Err(e);
        }
        self.curve.serialize(row)?;
        if self.checkpoint_every > 0 && (row.episode + 1).is_multiple_of(self.checkpoint_every) {
            let path = self.dir.join("checkpoints").join(format!("qtable_{:06}.txt", row.episode + 1));
            q.dump(BufWriter::new(File::create(path)?))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub seed: u64,
    pub episodes: usize,
    pub archived: usize,
    pub best_score: f64,
    pub best_return: f64,
    pub best_hash: String,
    pub epsilon_refreshes: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Train on this layout instead of generating one from `[static]`.
    pub garage: Option<StructureMatrix>,
    pub initial_q: Option<QTable>,
    pub verbose: bool,
}

pub fn load_qtable(path: &Path) -> Result<QTable> {
    QTable::load(BufReader::new(File::open(path)?))
}

/// Trains one run and writes its directory.
pub fn execute_run(cfg: &RunConfig, dir: &Path, opts: RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let started = Instant::now();
    let garage = match opts.garage {
        Some(g) => g,
        None => generate_static(&cfg.static_gen)?.matrix,
    };
    let (rows, cols) = cfg.dimensions.resolve(garage.height(), garage.width())?;

    fs::create_dir_all(dir.join("archive"))?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    write_matrix_file(&dir.join("garage.txt"), &garage)?;

    let mut writer = RunWriter::create(dir, opts.verbose, cfg.output.checkpoint_every)?;
    let q0 = opts.initial_q.unwrap_or_default();
    let run = train_with(&garage, &cfg.reward, &cfg.sarsa, &cfg.eval, q0, &mut writer)?;
    writer.finish()?;

    write_archive(&dir.join("archive"), &run)?;
    run.qtable.dump(BufWriter::new(File::create(dir.join("qtable.txt"))?))?;

    let best = run.best();
    let eval = evaluate(&best.matrix, &cfg.eval)?;
    fs::write(dir.join("best_eval.json"), serde_json::to_string_pretty(&eval)? + "\n")?;
    let spec = GarageSpec::new(best.matrix.clone(), rows, cols)?;
    let origin = Origin { seed: Some(cfg.sarsa.seed), config_hash: Some(cfg.content_hash()) };
    let scene = export_scene(&spec, &tile_map(&best.matrix), &eval, &cfg.eval, &origin)?;
    fs::write(dir.join("best_scene.json"), scene.to_json())?;

    let summary = RunSummary {
        dir: dir.to_path_buf(),
        seed: cfg.sarsa.seed,
        episodes: run.curve.len(),
        archived: run.archive.len(),
        best_score: best.score,
        best_return: run.best_return(),
        best_hash: best.hash.clone(),
        epsilon_refreshes: run.epsilon_refreshes,
    };
    let info = serde_json::json!({
        "elapsed_seconds": started.elapsed().as_secs_f64(),
        "summary": &summary,
    });
    fs::write(dir.join("run_info.json"), serde_json::to_string_pretty(&info)? + "\n")?;
    Ok(summary)
}

pub fn write_archive(dir: &Path, run: &RunArtifacts) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut index = csv::Writer::from_path(dir.join("index.csv"))?;
    index.write_record(["rank", "episode", "score", "hash"])?;
    for (i, e) in run.archive.iter().enumerate() {
        let rank = i + 1;
        write_matrix_file(&dir.join(format!("rank_{rank:03}.txt")), &e.matrix)?;
        index.write_record([rank.to_string(), e.episode.to_string(), e.score.to_string(), e.hash.clone()])?;
    }
    index.flush()?;
    Ok(())
}

//! The `garage-pcg` command line.
//!
//! Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.
//! `GARAGE_PCG_OUT` sets the default root for `train` output directories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info, LevelFilter};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluator::{evaluate, feasibility, EvalCoefficients};
use crate::grid::{Cell, StructureMatrix};
use crate::io::config::{parse_coeffs, RunConfig};
use crate::io::run::{execute_run, load_qtable, RunOptions, RunSummary};
use crate::io::scene::{export_scene, GarageSpec, Origin};
use crate::io::svg::render_svg;
use crate::io::text::{read_matrix_file, render_ascii, write_matrix};
use crate::static_gen::{generate_static, validate_static};
use crate::tiler::tile_map;

pub const OUT_ENV: &str = "GARAGE_PCG_OUT";

#[derive(Parser, Debug)]
#[command(name = "garage-pcg", version, about = "Procedural underground garage layouts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the static generator and the learner.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Evaluation coefficients as `k1,k2,k3`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    coeffs: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a static layout and write it as a matrix file.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the lane agent and write a run directory.
    Train {
        #[command(flatten)]
        common: Common,
        /// Train on this matrix instead of generating one.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Overrides `[sarsa] episodes`.
        #[arg(long)]
        episodes: Option<usize>,
        /// Archive size; overrides `[sarsa] archive_k`.
        #[arg(long)]
        archive_k: Option<usize>,
        /// Run directory; defaults to `$GARAGE_PCG_OUT/seed_<seed>`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Independent runs with seeds `seed..seed+runs`, trained in parallel.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Write the per-step audit log.
        #[arg(long)]
        verbose: bool,
        /// Dump the Q-table every N episodes.
        #[arg(long)]
        checkpoint_every: Option<usize>,
        /// Start from a dumped Q-table.
        #[arg(long)]
        init_qtable: Option<PathBuf>,
    },
    /// Print the evaluation of a matrix as JSON.
    Evaluate {
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a matrix as ASCII or SVG.
    Render {
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a matrix as a JSON scene document.
    Export {
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check placement constraints and spot reachability.
    Validate {
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Stage::Auto)]
        stage: Stage,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Ascii,
    Svg,
}

/// Which checks `validate` enforces. `auto` adds spot reachability only when
/// the matrix already has lanes.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Auto,
    Static,
    Layout,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.set_seed(seed);
    }
    if let Some(k) = &common.coeffs {
        cfg.eval = parse_coeffs(k)?;
    }
    if let Ok(level) = cfg.output.verbosity.parse::<LevelFilter>() {
        log::set_max_level(level);
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn spec_for(m: &StructureMatrix, cfg: &RunConfig) -> Result<GarageSpec> {
    let (rows, cols) = cfg.dimensions.resolve(m.height(), m.width())?;
    GarageSpec::new(m.clone(), rows, cols)
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Generate { common, out } => {
            let cfg = load_config(&common)?;
            let layout = generate_static(&cfg.static_gen)?;
            info!("contour after {} retries, report {:?}", layout.report.retries_used, layout.report.violations);
            emit(out.as_deref(), &write_matrix(&layout.matrix))?;
            Ok(0)
        }
        Command::Train {
            common,
            matrix,
            episodes,
            archive_k,
            out_dir,
            runs,
            verbose,
            checkpoint_every,
            init_qtable,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(n) = episodes {
                cfg.sarsa.episodes = n;
            }
            if let Some(k) = archive_k {
                cfg.sarsa.archive_k = k;
            }
            if let Some(k) = checkpoint_every {
                cfg.output.checkpoint_every = k;
            }
            if runs == 0 {
                return Err(Error::InvalidConfig("--runs must be >= 1".into()));
            }
            let garage = matrix.as_deref().map(read_matrix_file).transpose()?;
            let q0 = init_qtable.as_deref().map(load_qtable).transpose()?;
            let root = out_dir.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| {
                let base = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
                base.join(format!("seed_{}", cfg.sarsa.seed))
            });
            let base_seed = cfg.sarsa.seed;
            let jobs: Vec<(RunConfig, PathBuf)> = if runs == 1 {
                vec![(cfg, root)]
            } else {
                (0..runs)
                    .map(|i| {
                        let mut c = cfg.clone();
                        c.set_seed(base_seed + i as u64);
                        (c, root.join(format!("run_{i:03}")))
                    })
                    .collect()
            };
            let summaries: Vec<RunSummary> = jobs
                .par_iter()
                .map(|(c, dir)| {
                    let opts = RunOptions { garage: garage.clone(), initial_q: q0.clone(), verbose };
                    execute_run(c, dir, opts)
                })
                .collect::<Result<_>>()?;
            emit(None, &(serde_json::to_string_pretty(&summaries)? + "\n"))?;
            Ok(0)
        }
        Command::Evaluate { matrix, common, out } => {
            let cfg = load_config(&common)?;
            let m = read_matrix_file(&matrix)?;
            let eval = evaluate(&m, &cfg.eval)?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&eval)? + "\n"))?;
            Ok(0)
        }
        Command::Render { matrix, common, format, out } => {
            let cfg = load_config(&common)?;
            let m = read_matrix_file(&matrix)?;
            let text = match format {
                Format::Ascii => render_ascii(&m) + "\n",
                Format::Svg => {
                    let spec = spec_for(&m, &cfg)?;
                    render_svg(&tile_map(&m), &spec.row_widths, &spec.col_widths)?
                }
            };
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Export { matrix, common, out } => {
            let cfg = load_config(&common)?;
            let m = read_matrix_file(&matrix)?;
            let doc = scene_for(&m, &cfg, &common)?;
            emit(out.as_deref(), &doc)?;
            Ok(0)
        }
        Command::Validate { matrix, common, stage } => {
            let cfg = load_config(&common)?;
            let m = read_matrix_file(&matrix)?;
            let report = validate_static(&m, &cfg.static_gen);
            let check_layout = match stage {
                Stage::Static => false,
                Stage::Layout => true,
                Stage::Auto => m.count(Cell::Lane) > 0,
            };
            let feas = check_layout.then(|| feasibility(&m));
            let valid = report.is_valid() && feas.as_ref().is_none_or(|f| f.is_feasible());
            let doc = serde_json::json!({ "valid": valid, "static": report, "feasibility": feas });
            emit(None, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
            Ok(if valid { 0 } else { 1 })
        }
    }
}

fn scene_for(m: &StructureMatrix, cfg: &RunConfig, common: &Common) -> Result<String> {
    let eval = evaluate(m, &cfg.eval)?;
    let origin = Origin {
        seed: common.seed.or(common.config.is_some().then_some(cfg.sarsa.seed)),
        config_hash: common.config.is_some().then(|| cfg.content_hash()),
    };
    let coeffs: EvalCoefficients = cfg.eval;
    Ok(export_scene(&spec_for(m, cfg)?, &tile_map(m), &eval, &coeffs, &origin)?.to_json())
}

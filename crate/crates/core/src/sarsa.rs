//! Tabular Sarsa with an epsilon-greedy behaviour policy.
//!
//! Each episode resets the lane environment on the same garage, learns
//! on-policy from the transitions it actually takes, scores the resulting
//! matrix and offers it to a top-K archive. Epsilon decays geometrically and
//! is refreshed to its initial value whenever the archive's best matrix has
//! not changed for `stagnation_window` consecutive episodes.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use log::info;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{episode_return, Action, LaneEnv, RewardConfig, StateVector, StepRecord, WINDOW};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, EvalCoefficients};
use crate::grid::StructureMatrix;
use crate::rng_from_seed;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct QRow {
    values: [f64; Action::COUNT],
    written: u8,
}

/// Action values keyed by state. Missing entries read as zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QTable {
    rows: HashMap<StateVector, QRow>,
    entries: usize,
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, s: &StateVector, a: Action) -> f64 {
        self.rows.get(s).map_or(0.0, |r| r.values[a.index()])
    }

    pub fn values(&self, s: &StateVector) -> [f64; Action::COUNT] {
        self.rows.get(s).map_or([0.0; Action::COUNT], |r| r.values)
    }

    pub fn set(&mut self, s: &StateVector, a: Action, v: f64) {
        let row = self.rows.entry(*s).or_default();
        let bit = 1u8 << a.index();
        if row.written & bit == 0 {
            row.written |= bit;
            self.entries += 1;
        }
        row.values[a.index()] = v;
    }

    /// Argmax over actions; ties go to the earliest action in [`Action::ALL`].
    pub fn greedy(&self, s: &StateVector) -> Action {
        let values = self.values(s);
        let mut best = 0;
        for i in 1..Action::COUNT {
            if values[i] > values[best] {
                best = i;
            }
        }
        Action::ALL[best]
    }

    /// Number of (state, action) pairs ever written.
    pub fn entry_count(&self) -> usize {
        self.entries
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    /// Sorted text dump, one written (state, action) pair per line:
    /// `c=<4 clearances> w=<25 window codes> p=<prev> a=<action> q=<value>`.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<()> {
        let mut keys: Vec<&StateVector> = self.rows.keys().collect();
        keys.sort();
        for s in keys {
            let row = &self.rows[s];
            for a in Action::ALL {
                if row.written & (1 << a.index()) == 0 {
                    continue;
                }
                let c: Vec<String> = s.clearance.iter().map(|v| v.to_string()).collect();
                let w: Vec<String> = s.window.iter().map(|v| v.to_string()).collect();
                writeln!(out, "c={} w={} p={} a={} q={:?}", c.join(","), w.join(","), s.prev, a, row.values[a.index()])?;
            }
        }
        Ok(())
    }

    pub fn load<R: BufRead>(input: R) -> Result<QTable> {
        let mut q = QTable::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let mut fields = HashMap::new();
            for part in line.split_whitespace() {
                let (k, v) = part.split_once('=').ok_or_else(|| err("expected key=value"))?;
                fields.insert(k, v);
            }
            let field = |k: &str| fields.get(k).copied().ok_or_else(|| err(&format!("missing `{k}`")));
            let clearance: Vec<u16> = parse_list(field("c")?).map_err(|_| err("bad clearance"))?;
            let window: Vec<i8> = parse_list(field("w")?).map_err(|_| err("bad window"))?;
            let state = StateVector {
                clearance: clearance.try_into().map_err(|_| err("clearance needs 4 values"))?,
                window: window.try_into().map_err(|_| err("window needs 25 values"))?,
                prev: field("p")?.parse().map_err(|_| err("bad prev action"))?,
            };
            let action: Action = field("a")?.parse().map_err(|_| err("bad action"))?;
            let value: f64 = field("q")?.parse().map_err(|_| err("bad value"))?;
            q.set(&state, action, value);
        }
        Ok(q)
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    s.split(',').map(str::parse).collect()
}

const _: () = assert!(WINDOW * WINDOW == 25);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SarsaConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub eps0: f64,
    /// Multiplicative epsilon decay per episode.
    pub eps_decay: f64,
    pub eps_min: f64,
    pub stagnation_window: usize,
    pub episodes: usize,
    pub archive_k: usize,
    pub seed: u64,
}

impl Default for SarsaConfig {
    fn default() -> Self {
        SarsaConfig {
            alpha: 0.1,
            gamma: 0.9,
            eps0: 0.3,
            eps_decay: 0.999,
            eps_min: 0.01,
            stagnation_window: 100,
            episodes: 5000,
            archive_k: 200,
            seed: 0,
        }
    }
}

impl SarsaConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, m: &str| if ok { Ok(()) } else { Err(Error::InvalidConfig(m.to_string())) };
        check(self.alpha > 0.0 && self.alpha <= 1.0, "alpha must be in (0, 1]")?;
        check((0.0..=1.0).contains(&self.gamma), "gamma must be in [0, 1]")?;
        check((0.0..=1.0).contains(&self.eps0), "eps0 must be in [0, 1]")?;
        check(self.eps_decay > 0.0 && self.eps_decay <= 1.0, "eps_decay must be in (0, 1]")?;
        check((0.0..=1.0).contains(&self.eps_min), "eps_min must be in [0, 1]")?;
        check(self.episodes >= 1, "episodes must be >= 1")?;
        check(self.archive_k >= 1, "archive_k must be >= 1")?;
        check(self.stagnation_window >= 1, "stagnation_window must be >= 1")
    }
}

/// Greedy with probability `1 - eps`, otherwise uniform over all five actions,
/// so the greedy action is taken with probability `(1 - eps) + eps / 5`.
pub fn select_action<R: Rng + ?Sized>(q: &QTable, s: &StateVector, eps: f64, rng: &mut R) -> Action {
    if eps > 0.0 && rng.gen::<f64>() < eps {
        Action::ALL[rng.gen_range(0..Action::COUNT)]
    } else {
        q.greedy(s)
    }
}

/// One Sarsa backup. `next` is `None` when the transition ended the episode.
pub fn sarsa_update(
    q: &mut QTable,
    s: &StateVector,
    a: Action,
    r: f64,
    next: Option<(&StateVector, Action)>,
    cfg: &SarsaConfig,
) -> f64 {
    let current = q.get(s, a);
    let next_value = next.map_or(0.0, |(s2, a2)| q.get(s2, a2));
    let updated = current + cfg.alpha * (r + cfg.gamma * next_value - current);
    q.set(s, a, updated);
    updated
}

/// Epsilon after `episodes_since_refresh` episodes of decay. A best-matrix age
/// of at least `stagnation_window` forces a refresh to `eps0`.
pub fn epsilon_schedule(episodes_since_refresh: usize, best_hash_age: usize, cfg: &SarsaConfig) -> f64 {
    if best_hash_age >= cfg.stagnation_window {
        return cfg.eps0;
    }
    let exp = episodes_since_refresh.min(i32::MAX as usize) as i32;
    (cfg.eps0 * cfg.eps_decay.powi(exp)).max(cfg.eps_min)
}

/// Stateful driver around [`epsilon_schedule`].
#[derive(Clone, Debug)]
pub struct EpsilonSchedule {
    since_refresh: usize,
    age: usize,
    best: Option<String>,
    refreshes: usize,
}

impl EpsilonSchedule {
    pub fn new() -> Self {
        EpsilonSchedule { since_refresh: 0, age: 0, best: None, refreshes: 0 }
    }

    /// Epsilon for the upcoming episode; clears the counters on a refresh.
    pub fn next_epsilon(&mut self, cfg: &SarsaConfig) -> f64 {
        let eps = epsilon_schedule(self.since_refresh, self.age, cfg);
        if self.age >= cfg.stagnation_window {
            self.since_refresh = 0;
            self.age = 0;
            self.refreshes += 1;
        }
        eps
    }

    /// Records the archive's best hash after an episode.
    pub fn observe_best(&mut self, hash: &str) {
        self.since_refresh += 1;
        if self.best.as_deref() == Some(hash) {
            self.age += 1;
        } else {
            self.best = Some(hash.to_string());
            self.age = 0;
        }
    }

    pub fn best_hash_age(&self) -> usize {
        self.age
    }

    pub fn refreshes(&self) -> usize {
        self.refreshes
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub hash: String,
    pub matrix: StructureMatrix,
    pub score: f64,
    pub episode: usize,
}

/// Top-K matrices by score, unique by hash. Equal scores keep arrival order.
#[derive(Clone, Debug, Default)]
pub struct Archive {
    k: usize,
    entries: Vec<ArchiveEntry>,
    hashes: HashSet<String>,
}

impl Archive {
    pub fn new(k: usize) -> Self {
        Archive { k, entries: Vec::with_capacity(k + 1), hashes: HashSet::new() }
    }

    /// Returns true if the entry was kept.
    pub fn insert(&mut self, entry: ArchiveEntry) -> bool {
        if self.k == 0 || self.hashes.contains(&entry.hash) {
            return false;
        }
        if self.entries.len() >= self.k && self.entries.last().is_some_and(|last| entry.score <= last.score) {
            return false;
        }
        let at = self.entries.partition_point(|e| e.score >= entry.score);
        self.hashes.insert(entry.hash.clone());
        self.entries.insert(at, entry);
        if self.entries.len() > self.k {
            let evicted = self.entries.pop().expect("non-empty");
            self.hashes.remove(&evicted.hash);
        }
        true
    }

    pub fn best(&self) -> Option<&ArchiveEntry> {
        self.entries.first()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_entries(self) -> Vec<ArchiveEntry> {
        self.entries
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub episode: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub score: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub curve: Vec<CurveRow>,
    /// Sorted by score, best first.
    pub archive: Vec<ArchiveEntry>,
    pub config: SarsaConfig,
    pub seed: u64,
    pub qtable: QTable,
    pub epsilon_refreshes: usize,
}

impl RunArtifacts {
    pub fn best(&self) -> &ArchiveEntry {
        &self.archive[0]
    }

    /// Highest episode return seen during the run.
    pub fn best_return(&self) -> f64 {
        self.curve.iter().map(|r| r.ret).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Hooks into a training run. All methods default to no-ops.
pub trait TrainObserver {
    fn on_step(&mut self, _episode: usize, _record: &StepRecord) {}
    fn on_episode(&mut self, _row: &CurveRow, _q: &QTable) -> Result<()> {
        Ok(())
    }
}

impl TrainObserver for () {}

pub fn train(
    garage: &StructureMatrix,
    env_cfg: &RewardConfig,
    cfg: &SarsaConfig,
    coeffs: &EvalCoefficients,
) -> Result<RunArtifacts> {
    train_with(garage, env_cfg, cfg, coeffs, QTable::new(), &mut ())
}

/// Full training run starting from `q`, reporting to `observer`.
pub fn train_with<O: TrainObserver + ?Sized>(
    garage: &StructureMatrix,
    env_cfg: &RewardConfig,
    cfg: &SarsaConfig,
    coeffs: &EvalCoefficients,
    mut q: QTable,
    observer: &mut O,
) -> Result<RunArtifacts> {
    cfg.validate()?;
    env_cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut schedule = EpsilonSchedule::new();
    let mut archive = Archive::new(cfg.archive_k);
    let mut curve = Vec::with_capacity(cfg.episodes);

    for episode in 0..cfg.episodes {
        let eps = schedule.next_epsilon(cfg);
        let (mut env, mut state) = LaneEnv::reset(garage, env_cfg)?;
        let mut action = select_action(&q, &state, eps, &mut rng);
        loop {
            let out = env.step(action)?;
            observer.on_step(episode, &out.record);
            if out.status.is_terminal() {
                sarsa_update(&mut q, &state, action, out.reward, None, cfg);
                break;
            }
            let next_action = select_action(&q, &out.state, eps, &mut rng);
            sarsa_update(&mut q, &state, action, out.reward, Some((&out.state, next_action)), cfg);
            state = out.state;
            action = next_action;
        }

        let trace = env.into_trace()?;
        let ret = episode_return(&trace)?;
        let eval = evaluate(&trace.final_matrix, coeffs)?;
        let hash = trace.final_matrix.content_hash();
        archive.insert(ArchiveEntry { hash, matrix: trace.final_matrix, score: eval.score, episode });
        schedule.observe_best(&archive.best().expect("archive non-empty after insert").hash);

        let row = CurveRow { episode, ret, score: eval.score, epsilon: eps };
        observer.on_episode(&row, &q)?;
        curve.push(row);
        if (episode + 1) % 1000 == 0 {
            info!(
                "episode {}: return {:.3}, best score {:.3}, eps {:.4}, q entries {}",
                episode + 1,
                ret,
                archive.best().map_or(f64::NAN, |e| e.score),
                eps,
                q.entry_count()
            );
        }
    }

    Ok(RunArtifacts {
        curve,
        archive: archive.into_entries(),
        config: cfg.clone(),
        seed: cfg.seed,
        qtable: q,
        epsilon_refreshes: schedule.refreshes(),
    })
}

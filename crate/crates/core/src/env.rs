//! Lane-colouring MDP.
//!
//! An agent starts on the first entrance and walks the garage. Every free
//! square it enters becomes a lane square. It is rewarded for the net change
//! in parking spots and charged the turn-back, interval, wheeling and step
//! penalties. Taking STAY on the start cell ends the episode successfully.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::spot_delta;
use crate::grid::{Cell, Coord, Dir, StructureMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Stay,
}

impl Action {
    /// Fixed order, also used to break argmax ties.
    pub const ALL: [Action; 5] = [Action::Up, Action::Down, Action::Left, Action::Right, Action::Stay];
    pub const COUNT: usize = 5;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub fn dir(self) -> Option<Dir> {
        match self {
            Action::Up => Some(Dir::N),
            Action::Down => Some(Dir::S),
            Action::Left => Some(Dir::W),
            Action::Right => Some(Dir::E),
            Action::Stay => None,
        }
    }

    pub fn opposite(self) -> Option<Action> {
        match self {
            Action::Up => Some(Action::Down),
            Action::Down => Some(Action::Up),
            Action::Left => Some(Action::Right),
            Action::Right => Some(Action::Left),
            Action::Stay => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Up => "UP",
            Action::Down => "DOWN",
            Action::Left => "LEFT",
            Action::Right => "RIGHT",
            Action::Stay => "STAY",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Action> {
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("unknown action `{s}`") })
    }
}

pub const WINDOW: usize = 5;

/// Agent observation: clearances (N, E, S, W), the 5x5 window around the
/// agent in row-major order, and the previous action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateVector {
    pub clearance: [u16; 4],
    pub window: [i8; WINDOW * WINDOW],
    pub prev: Action,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Reward per net new parking spot.
    pub w_park: f64,
    pub p_turnback: f64,
    pub p_interval: f64,
    pub p_wheel: f64,
    pub p_step: f64,
    /// Terminal reward for failing or timing out; must be negative.
    pub r_fail: f64,
    /// Repeating an action after fewer than this many intervening actions
    /// (but at least one) costs `p_interval`.
    pub g_min: usize,
    /// A turn whose new heading has less clearance than this costs `p_wheel`.
    pub clearance_min: usize,
    /// Step cap; `None` means `4 * h * w`.
    pub t_max: Option<usize>,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            w_park: 1.0,
            p_turnback: 2.0,
            p_interval: 1.0,
            p_wheel: 1.0,
            p_step: 0.05,
            r_fail: -10.0,
            g_min: 3,
            clearance_min: 3,
            t_max: None,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r_fail.is_nan() || self.r_fail >= 0.0 {
            return Err(Error::InvalidConfig("r_fail must be negative".into()));
        }
        if self.t_max == Some(0) {
            return Err(Error::InvalidConfig("t_max must be >= 1".into()));
        }
        let penalties = [self.p_turnback, self.p_interval, self.p_wheel, self.p_step];
        if penalties.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidConfig("penalty magnitudes must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Success,
    Fail,
    Timeout,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::Running
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Success => "success",
            Status::Fail => "fail",
            Status::Timeout => "timeout",
        }
    }
}

/// Penalties charged on one step, as positive magnitudes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub turnback: f64,
    pub interval: f64,
    pub wheel: f64,
    pub step: f64,
}

impl Penalties {
    pub fn total(&self) -> f64 {
        self.turnback + self.interval + self.wheel + self.step
    }
}

/// Audit record of one step. For movement steps
/// `reward == w_park * delta_spots - penalties.total()`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub pos: Coord,
    pub action: Action,
    pub delta_spots: i64,
    pub penalties: Penalties,
    pub reward: f64,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub state: StateVector,
    pub action: Action,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub steps: Vec<TraceStep>,
    pub status: Status,
    /// Working matrix at the last unfailed state.
    pub final_matrix: StructureMatrix,
}

/// Sum of all rewards except the terminal one.
pub fn episode_return(trace: &EpisodeTrace) -> Result<f64> {
    if !trace.status.is_terminal() {
        return Err(Error::NotTerminated);
    }
    let n = trace.steps.len().saturating_sub(1);
    Ok(trace.steps[..n].iter().fold(0.0, |acc, s| acc + s.reward))
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: StateVector,
    pub reward: f64,
    pub status: Status,
    pub record: StepRecord,
}

#[derive(Clone, Debug)]
pub struct LaneEnv {
    cfg: RewardConfig,
    matrix: StructureMatrix,
    start: Coord,
    pos: Coord,
    prev: Action,
    steps: usize,
    t_max: usize,
    cap: usize,
    last_seen: [Option<usize>; Action::COUNT],
    status: Status,
    trace: Vec<TraceStep>,
}

impl LaneEnv {
    pub fn reset(garage: &StructureMatrix, cfg: &RewardConfig) -> Result<(LaneEnv, StateVector)> {
        cfg.validate()?;
        let start = garage.iter().find(|&(_, c)| c == Cell::Entrance).map(|(p, _)| p).ok_or(Error::NoEntrance)?;
        let (h, w) = (garage.height(), garage.width());
        let env = LaneEnv {
            cfg: cfg.clone(),
            matrix: garage.clone(),
            start,
            pos: start,
            prev: Action::Stay,
            steps: 0,
            t_max: cfg.t_max.unwrap_or(4 * h * w),
            cap: h.max(w),
            last_seen: [None; Action::COUNT],
            status: Status::Running,
            trace: Vec::new(),
        };
        let s = env.state();
        Ok((env, s))
    }

    pub fn position(&self) -> Coord {
        self.pos
    }

    pub fn start(&self) -> Coord {
        self.start
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn matrix(&self) -> &StructureMatrix {
        &self.matrix
    }

    pub fn observe(&self) -> Result<StateVector> {
        if self.status.is_terminal() {
            return Err(Error::Terminated);
        }
        Ok(self.state())
    }

    fn state(&self) -> StateVector {
        let clearance = Dir::ALL.map(|d| self.matrix.clearance(self.pos, d, self.cap) as u16);
        let mut window = [0i8; WINDOW * WINDOW];
        let r = (WINDOW / 2) as i32;
        for (i, slot) in window.iter_mut().enumerate() {
            let (dr, dc) = ((i / WINDOW) as i32 - r, (i % WINDOW) as i32 - r);
            *slot = self.matrix.get(self.pos.offset(dr, dc)).code();
        }
        StateVector { clearance, window, prev: self.prev }
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        if self.status.is_terminal() {
            return Err(Error::Terminated);
        }
        let observed = self.state();
        let t = self.steps;
        let mut record = StepRecord {
            t,
            pos: self.pos,
            action,
            delta_spots: 0,
            penalties: Penalties::default(),
            reward: 0.0,
            status: Status::Running,
        };

        if t >= self.t_max {
            record.status = Status::Timeout;
            record.reward = self.cfg.r_fail;
        } else if let Some(dir) = action.dir() {
            let target = self.pos.step(dir);
            let cell = self.matrix.get(target);
            if cell == Cell::Obstacle {
                record.status = Status::Fail;
                record.reward = self.cfg.r_fail;
            } else {
                if cell == Cell::Free {
                    record.delta_spots = spot_delta(&mut self.matrix, target, Cell::Lane)?;
                }
                record.penalties = self.penalties(action, dir, target, t);
                record.reward = self.cfg.w_park * record.delta_spots as f64 - record.penalties.total();
                record.pos = target;
                self.pos = target;
                self.prev = action;
                self.last_seen[action.index()] = Some(t);
            }
        } else if self.pos == self.start {
            record.status = Status::Success;
        } else {
            record.status = Status::Fail;
            record.reward = self.cfg.r_fail;
        }

        self.steps += 1;
        self.status = record.status;
        self.trace.push(TraceStep { state: observed, action, reward: record.reward });
        Ok(StepOutcome { state: self.state(), reward: record.reward, status: record.status, record })
    }

    fn penalties(&self, action: Action, dir: Dir, target: Coord, t: usize) -> Penalties {
        let cfg = &self.cfg;
        let mut p = Penalties { step: cfg.p_step, ..Penalties::default() };
        if self.prev.opposite() == Some(action) {
            p.turnback = cfg.p_turnback;
        }
        if let Some(last) = self.last_seen[action.index()] {
            let between = t - last - 1;
            if between >= 1 && between < cfg.g_min {
                p.interval = cfg.p_interval;
            }
        }
        if let Some(prev_dir) = self.prev.dir() {
            let turned = prev_dir.is_vertical() != dir.is_vertical();
            if turned && self.matrix.clearance(target, dir, self.cap) < cfg.clearance_min {
                p.wheel = cfg.p_wheel;
            }
        }
        p
    }

    /// The episode so far. Errors if the episode is still running.
    pub fn into_trace(self) -> Result<EpisodeTrace> {
        if !self.status.is_terminal() {
            return Err(Error::NotTerminated);
        }
        Ok(EpisodeTrace { steps: self.trace, status: self.status, final_matrix: self.matrix })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::count_spots;

    fn garage_7x9() -> StructureMatrix {
        let mut s = StructureMatrix::filled(7, 9, Cell::Free).unwrap();
        s.set(Coord::new(0, 3), Cell::Entrance).unwrap();
        s.set(Coord::new(6, 7), Cell::Exit).unwrap();
        s
    }

    fn quiet() -> RewardConfig {
        RewardConfig {
            p_turnback: 0.0,
            p_interval: 0.0,
            p_wheel: 0.0,
            p_step: 0.0,
            ..RewardConfig::default()
        }
    }

    #[test]
    fn reset_places_agent_on_entrance() {
        let (env, s) = LaneEnv::reset(&garage_7x9(), &RewardConfig::default()).unwrap();
        assert_eq!(env.position(), Coord::new(0, 3));
        assert_eq!(s.prev, Action::Stay);
        assert!(s.window[..10].iter().all(|&c| c == -1));
        assert_eq!(s.window[12], 2);
        // 6 floor cells below row 0
        assert_eq!(s.clearance[Dir::S.index()], 6);
        assert_eq!(s.clearance[Dir::N.index()], 0);
    }

    #[test]
    fn reset_without_entrance_fails() {
        let s = StructureMatrix::filled(3, 3, Cell::Free).unwrap();
        assert!(matches!(LaneEnv::reset(&s, &RewardConfig::default()), Err(Error::NoEntrance)));
    }

    #[test]
    fn window_has_no_border_in_open_garage() {
        let mut s = StructureMatrix::filled(11, 11, Cell::Lane).unwrap();
        s.set(Coord::new(5, 5), Cell::Entrance).unwrap();
        let (env, st) = LaneEnv::reset(&s, &RewardConfig::default()).unwrap();
        assert!(st.window.iter().all(|&c| c != -1));
        assert_eq!(env.observe().unwrap(), st);
    }

    #[test]
    fn clearance_in_center_of_5x5() {
        let mut s = StructureMatrix::filled(5, 5, Cell::Free).unwrap();
        s.set(Coord::new(2, 2), Cell::Entrance).unwrap();
        let (_, st) = LaneEnv::reset(&s, &RewardConfig::default()).unwrap();
        assert_eq!(st.clearance, [2, 2, 2, 2]);
    }

    #[test]
    fn stay_at_start_succeeds() {
        let (mut env, _) = LaneEnv::reset(&garage_7x9(), &RewardConfig::default()).unwrap();
        let out = env.step(Action::Stay).unwrap();
        assert_eq!((out.reward, out.status), (0.0, Status::Success));
        assert!(matches!(env.step(Action::Down), Err(Error::Terminated)));
        assert!(matches!(env.observe(), Err(Error::Terminated)));
        let trace = env.into_trace().unwrap();
        assert_eq!(episode_return(&trace).unwrap(), 0.0);
    }

    #[test]
    fn stay_elsewhere_fails() {
        let (mut env, _) = LaneEnv::reset(&garage_7x9(), &RewardConfig::default()).unwrap();
        env.step(Action::Down).unwrap();
        let out = env.step(Action::Stay).unwrap();
        assert_eq!((out.reward, out.status), (-10.0, Status::Fail));
    }

    #[test]
    fn moving_off_the_map_fails_without_moving() {
        let (mut env, _) = LaneEnv::reset(&garage_7x9(), &RewardConfig::default()).unwrap();
        let before = env.matrix().clone();
        let out = env.step(Action::Up).unwrap();
        assert_eq!(out.status, Status::Fail);
        assert_eq!(out.reward, -10.0);
        assert_eq!(env.position(), Coord::new(0, 3));
        assert_eq!(env.matrix(), &before);
    }

    #[test]
    fn turnback_penalty() {
        let cfg = RewardConfig { p_turnback: 2.0, ..quiet() };
        let (mut env, _) = LaneEnv::reset(&garage_7x9(), &cfg).unwrap();
        env.step(Action::Down).unwrap();
        env.step(Action::Left).unwrap();
        let out = env.step(Action::Right).unwrap();
        assert_eq!(out.record.penalties.turnback, 2.0);
        assert_eq!(out.reward, out.record.delta_spots as f64 - 2.0);
    }

    #[test]
    fn colouring_reward_matches_spot_recount() {
        // entrance at the bottom middle of a 3x3 block; colouring the centre
        // gains spots on three sides and loses the centre itself
        let s = StructureMatrix::from_codes(&[[0, 0, 0], [0, 0, 0], [0, 2, 0]]).unwrap();
        let cfg = RewardConfig { p_step: 0.05, ..quiet() };
        let (mut env, _) = LaneEnv::reset(&s, &cfg).unwrap();
        let before = count_spots(env.matrix()).0 as i64;
        let out = env.step(Action::Up).unwrap();
        let after = count_spots(env.matrix()).0 as i64;
        assert_eq!(after - before, 2);
        assert_eq!(out.record.delta_spots, 2);
        assert_eq!(out.reward, 2.0 - 0.05);
        assert_eq!(env.matrix().get(Coord::new(1, 1)), Cell::Lane);
    }

    #[test]
    fn interval_penalty_on_staircase_not_straight() {
        let cfg = RewardConfig { p_interval: 1.0, ..quiet() };
        let (mut env, _) = LaneEnv::reset(&garage_7x9(), &cfg).unwrap();
        assert_eq!(env.step(Action::Down).unwrap().record.penalties.interval, 0.0);
        assert_eq!(env.step(Action::Down).unwrap().record.penalties.interval, 0.0);
        assert_eq!(env.step(Action::Right).unwrap().record.penalties.interval, 0.0);
        // one action in between
        assert_eq!(env.step(Action::Down).unwrap().record.penalties.interval, 1.0);
        // RIGHT at t=2 and t=4
        assert_eq!(env.step(Action::Right).unwrap().record.penalties.interval, 1.0);
        env.step(Action::Down).unwrap();
        env.step(Action::Down).unwrap();
        env.step(Action::Down).unwrap();
        // RIGHT last at t=4, now t=8: three in between
        assert_eq!(env.step(Action::Right).unwrap().record.penalties.interval, 0.0);
    }

    #[test]
    fn wheel_penalty_when_turning_into_a_wall() {
        let cfg = RewardConfig { p_wheel: 1.0, clearance_min: 3, ..quiet() };
        let (mut env, _) = LaneEnv::reset(&garage_7x9(), &cfg).unwrap();
        env.step(Action::Down).unwrap(); // (1,3)
        // turning left: clearance from (1,2) westward is 2 < 3
        assert_eq!(env.step(Action::Left).unwrap().record.penalties.wheel, 1.0);
        // going down again from (1,2): clearance south of (2,2) is 4
        assert_eq!(env.step(Action::Down).unwrap().record.penalties.wheel, 0.0);
        // turning right at (2,2) -> (2,3): clearance east is 5
        assert_eq!(env.step(Action::Right).unwrap().record.penalties.wheel, 0.0);
    }

    #[test]
    fn timeout_after_t_max_steps() {
        let cfg = RewardConfig { t_max: Some(2), ..RewardConfig::default() };
        let (mut env, _) = LaneEnv::reset(&garage_7x9(), &cfg).unwrap();
        env.step(Action::Down).unwrap();
        env.step(Action::Up).unwrap();
        let out = env.step(Action::Stay).unwrap();
        assert_eq!(out.status, Status::Timeout);
        assert_eq!(out.reward, -10.0);
    }

    #[test]
    fn return_excludes_terminal_reward() {
        let st = LaneEnv::reset(&garage_7x9(), &RewardConfig::default()).unwrap().1;
        let step = |r| TraceStep { state: st, action: Action::Down, reward: r };
        let trace = EpisodeTrace {
            steps: vec![step(1.0), step(1.0), step(-10.0)],
            status: Status::Fail,
            final_matrix: garage_7x9(),
        };
        assert_eq!(episode_return(&trace).unwrap(), 2.0);
        let running = EpisodeTrace { status: Status::Running, ..trace };
        assert!(matches!(episode_return(&running), Err(Error::NotTerminated)));
    }

    #[test]
    fn static_cells_are_never_overwritten() {
        let (mut env, _) = LaneEnv::reset(&garage_7x9(), &RewardConfig::default()).unwrap();
        for a in [Action::Down, Action::Up, Action::Right, Action::Left] {
            env.step(a).unwrap();
        }
        assert_eq!(env.matrix().get(Coord::new(0, 3)), Cell::Entrance);
    }

    #[test]
    fn reward_config_validation() {
        assert!(RewardConfig { r_fail: 0.0, ..RewardConfig::default() }.validate().is_err());
        assert!(RewardConfig { t_max: Some(0), ..RewardConfig::default() }.validate().is_err());
        assert!(RewardConfig { p_step: -1.0, ..RewardConfig::default() }.validate().is_err());
    }

    #[test]
    fn action_parsing() {
        for a in Action::ALL {
            assert_eq!(a.as_str().parse::<Action>().unwrap(), a);
            assert_eq!(Action::from_index(a.index()), Some(a));
        }
        assert!("NORTH".parse::<Action>().is_err());
    }
}

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::env::{Action, Cell, Env, KinematicState, Move, State, TaskId, Trajectory, Transition};
use crate::error::{Error, Result};

const MAGIC: &str = "# storl dataset v1";
const GRID_COLUMNS: &str = "traj,t,row,col,action,next_row,next_col,reward,done,terminal";
const MAZE_COLUMNS: &str =
    "traj,t,x,y,vx,vy,fx,fy,next_x,next_y,next_vx,next_vy,goal_x,goal_y,reward,done,terminal";

/// Metadata written when rewards have been replaced by shaped rewards.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapingHeader {
    pub gamma: f64,
    pub horizon: usize,
    pub schedule_digest: String,
}

/// An offline dataset: ordered trajectories plus provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub task: TaskId,
    pub seed: u64,
    pub config_digest: String,
    pub trajectories: Vec<Trajectory>,
    pub shaping: Option<ShapingHeader>,
}

/// Summary statistics in the convention used for dataset rows: failures
/// count as `horizon` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetStats {
    pub trajectories: usize,
    pub success_rate: f64,
    pub mean_length: f64,
    pub std_length: f64,
    pub transitions: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl Dataset {
    pub fn transition_count(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    pub fn stats(&self, horizon: usize) -> DatasetStats {
        let n = self.trajectories.len();
        let successes = self.trajectories.iter().filter(|t| t.success).count();
        let lengths: Vec<f64> = self
            .trajectories
            .iter()
            .map(|t| if t.success { t.len() } else { horizon } as f64)
            .collect();
        let (mean, std) = mean_std(&lengths);
        DatasetStats {
            trajectories: n,
            success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
            mean_length: mean,
            std_length: std,
            transitions: self.transition_count(),
        }
    }

    /// Digest of the serialized dataset.
    pub fn digest(&self) -> String {
        sha256_hex(self.to_text().as_bytes())
    }

    /// Re-steps the environment with the stored actions and checks that
    /// states and base rewards are reproduced exactly. Shaped datasets are
    /// checked on states only.
    pub fn replay(&self, env: &Env) -> Result<()> {
        for (i, traj) in self.trajectories.iter().enumerate() {
            let mut state = match traj.transitions.first() {
                Some(tr) => tr.state,
                None => continue,
            };
            for (j, tr) in traj.transitions.iter().enumerate() {
                if tr.state != state {
                    return Err(Error::format(format!(
                        "trajectory {i} step {j}: stored state {} does not follow {}",
                        tr.state, state
                    )));
                }
                let out = env.step(traj.goal, tr.state, tr.action)?;
                let reward_ok = self.shaping.is_some() || out.reward == tr.reward;
                if out.next != tr.next || !reward_ok || out.done != tr.terminal {
                    return Err(Error::format(format!(
                        "trajectory {i} step {j}: replay diverged"
                    )));
                }
                state = out.next;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "# env: {}", self.task);
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# config: {}", self.config_digest);
        let _ = writeln!(out, "# trajectories: {}", self.trajectories.len());
        if let Some(sh) = &self.shaping {
            let _ = writeln!(out, "# shaping-gamma: {}", sh.gamma);
            let _ = writeln!(out, "# shaping-horizon: {}", sh.horizon);
            let _ = writeln!(out, "# schedule: {}", sh.schedule_digest);
        }
        let columns = if self.task.is_discrete() {
            GRID_COLUMNS
        } else {
            MAZE_COLUMNS
        };
        let _ = writeln!(out, "# columns: {columns}");
        for (i, traj) in self.trajectories.iter().enumerate() {
            for tr in &traj.transitions {
                write_record(&mut out, i, tr, traj.goal);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Dataset> {
        let mut lines = text.lines().enumerate().peekable();
        match lines.next() {
            Some((_, l)) if l == MAGIC => {}
            _ => return Err(Error::format("missing dataset header")),
        }
        let mut task = None;
        let mut seed = None;
        let mut config_digest = None;
        let mut count = None;
        let (mut sh_gamma, mut sh_horizon, mut sh_digest) = (None, None, None);
        while let Some((_, line)) = lines.peek() {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let (key, value) = rest
                .split_once(": ")
                .ok_or_else(|| Error::format(format!("bad header line `{line}`")))?;
            match key {
                "env" => task = Some(value.parse::<TaskId>()?),
                "seed" => seed = Some(parse_num::<u64>(value, "seed")?),
                "config" => config_digest = Some(value.to_string()),
                "trajectories" => count = Some(parse_num::<usize>(value, "trajectories")?),
                "shaping-gamma" => sh_gamma = Some(parse_num::<f64>(value, "shaping-gamma")?),
                "shaping-horizon" => {
                    sh_horizon = Some(parse_num::<usize>(value, "shaping-horizon")?)
                }
                "schedule" => sh_digest = Some(value.to_string()),
                "columns" => {}
                other => return Err(Error::format(format!("unknown header key `{other}`"))),
            }
            lines.next();
        }
        let task = task.ok_or_else(|| Error::format("header lacks env"))?;
        let count = count.ok_or_else(|| Error::format("header lacks trajectory count"))?;
        let shaping = match (sh_gamma, sh_horizon, sh_digest) {
            (Some(gamma), Some(horizon), Some(schedule_digest)) => Some(ShapingHeader {
                gamma,
                horizon,
                schedule_digest,
            }),
            (None, None, None) => None,
            _ => return Err(Error::format("incomplete shaping header")),
        };
        let mut trajectories: Vec<Trajectory> = Vec::with_capacity(count);
        for (lineno, line) in lines {
            let (traj_id, tr, goal) = parse_record(task, line)
                .map_err(|e| Error::format(format!("line {}: {e}", lineno + 1)))?;
            if traj_id == trajectories.len() {
                trajectories.push(Trajectory {
                    transitions: Vec::new(),
                    success: false,
                    goal,
                });
            } else if traj_id + 1 != trajectories.len() {
                return Err(Error::format(format!(
                    "line {}: trajectory id {traj_id} out of order",
                    lineno + 1
                )));
            }
            let traj = trajectories.last_mut().expect("pushed above");
            if tr.t != traj.transitions.len() {
                return Err(Error::InconsistentTimesteps {
                    expected: traj.transitions.len(),
                    found: tr.t,
                });
            }
            traj.success = tr.terminal;
            traj.transitions.push(tr);
        }
        if trajectories.len() != count {
            return Err(Error::format(format!(
                "header announces {count} trajectories, found {}",
                trajectories.len()
            )));
        }
        Ok(Dataset {
            task,
            seed: seed.unwrap_or(0),
            config_digest: config_digest.unwrap_or_default(),
            trajectories,
            shaping,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Dataset::from_text(&text)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse::<T>()
        .map_err(|_| Error::format(format!("bad {what} `{s}`")))
}

fn move_name(mv: Move) -> &'static str {
    match mv {
        Move::Up => "up",
        Move::Down => "down",
        Move::Left => "left",
        Move::Right => "right",
    }
}

fn parse_move(s: &str) -> Result<Move> {
    match s {
        "up" => Ok(Move::Up),
        "down" => Ok(Move::Down),
        "left" => Ok(Move::Left),
        "right" => Ok(Move::Right),
        other => Err(Error::format(format!("bad action `{other}`"))),
    }
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

fn write_record(out: &mut String, traj: usize, tr: &Transition, goal: Option<[f64; 2]>) {
    match (tr.state, tr.action, tr.next) {
        (State::Grid(s), Action::Move(mv), State::Grid(n)) => {
            let _ = writeln!(
                out,
                "{traj},{},{},{},{},{},{},{},{},{}",
                tr.t,
                s.row,
                s.col,
                move_name(mv),
                n.row,
                n.col,
                tr.reward,
                flag(tr.done),
                flag(tr.terminal)
            );
        }
        (State::Point(s), Action::Force(f), State::Point(n)) => {
            let g = goal.unwrap_or([f64::NAN, f64::NAN]);
            let _ = writeln!(
                out,
                "{traj},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                tr.t,
                s.x,
                s.y,
                s.vx,
                s.vy,
                f[0],
                f[1],
                n.x,
                n.y,
                n.vx,
                n.vy,
                g[0],
                g[1],
                tr.reward,
                flag(tr.done),
                flag(tr.terminal)
            );
        }
        _ => unreachable!("transition mixes discrete and continuous parts"),
    }
}

fn parse_flag(s: &str) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::format(format!("bad flag `{other}`"))),
    }
}

fn parse_record(task: TaskId, line: &str) -> Result<(usize, Transition, Option<[f64; 2]>)> {
    let f: Vec<&str> = line.split(',').collect();
    if task.is_discrete() {
        if f.len() != 10 {
            return Err(Error::format(format!("expected 10 fields, got {}", f.len())));
        }
        let cell = |r: &str, c: &str| -> Result<Cell> {
            Ok(Cell::new(parse_num(r, "row")?, parse_num(c, "col")?))
        };
        let tr = Transition {
            t: parse_num(f[1], "t")?,
            state: State::Grid(cell(f[2], f[3])?),
            action: Action::Move(parse_move(f[4])?),
            next: State::Grid(cell(f[5], f[6])?),
            reward: parse_num(f[7], "reward")?,
            done: parse_flag(f[8])?,
            terminal: parse_flag(f[9])?,
        };
        Ok((parse_num(f[0], "traj")?, tr, None))
    } else {
        if f.len() != 17 {
            return Err(Error::format(format!("expected 17 fields, got {}", f.len())));
        }
        let v: Vec<f64> = f[2..14]
            .iter()
            .map(|s| parse_num::<f64>(s, "value"))
            .collect::<Result<_>>()?;
        let tr = Transition {
            t: parse_num(f[1], "t")?,
            state: State::Point(KinematicState {
                x: v[0],
                y: v[1],
                vx: v[2],
                vy: v[3],
            }),
            action: Action::Force([v[4], v[5]]),
            next: State::Point(KinematicState {
                x: v[6],
                y: v[7],
                vx: v[8],
                vy: v[9],
            }),
            reward: parse_num(f[14], "reward")?,
            done: parse_flag(f[15])?,
            terminal: parse_flag(f[16])?,
        };
        Ok((parse_num(f[0], "traj")?, tr, Some([v[10], v[11]])))
    }
}

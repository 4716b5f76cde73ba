//! Deterministic goal-reaching environments: CliffWalking, FourRoom and the
//! kinematic point-mass mazes.

mod grid;
mod layout;
mod maze;
mod trajectory;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use grid::{GridOutcome, GridSpec};
pub use layout::{Cell, Layout, Move};
pub use maze::{KinematicOutcome, KinematicState, MazeSpec, MEDIUM_MAZE, U_MAZE};
pub use trajectory::{Trajectory, Transition};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskId {
    CliffWalking,
    FourRoom,
    UMaze,
    Medium,
}

impl TaskId {
    pub const ALL: [TaskId; 4] = [
        TaskId::CliffWalking,
        TaskId::FourRoom,
        TaskId::UMaze,
        TaskId::Medium,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskId::CliffWalking => "cliffwalking",
            TaskId::FourRoom => "fourroom",
            TaskId::UMaze => "umaze",
            TaskId::Medium => "medium",
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, TaskId::CliffWalking | TaskId::FourRoom)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTask(s.to_string()))
    }
}

/// Environment state, discrete or continuous.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum State {
    Grid(Cell),
    Point(KinematicState),
}

impl State {
    /// Cell the state occupies (continuous positions are floored).
    pub fn cell(&self) -> Option<Cell> {
        match self {
            State::Grid(c) => Some(*c),
            State::Point(p) => p.cell(),
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Grid(c) => write!(f, "{c}"),
            State::Point(p) => write!(f, "({}, {}, {}, {})", p.x, p.y, p.vx, p.vy),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Move(Move),
    Force([f64; 2]),
}

/// Per-episode context drawn at reset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Episode {
    pub state: State,
    /// Sampled goal point (maze tasks only).
    pub goal: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub next: State,
    pub reward: f64,
    pub done: bool,
}

/// Any of the four tasks behind one interface.
#[derive(Clone, Debug, PartialEq)]
pub enum Env {
    Grid(GridSpec),
    Maze(MazeSpec),
}

impl Env {
    pub fn for_task(task: TaskId) -> Env {
        match task {
            TaskId::CliffWalking => Env::Grid(GridSpec::cliff_walking()),
            TaskId::FourRoom => Env::Grid(GridSpec::four_room()),
            TaskId::UMaze => Env::Maze(MazeSpec::umaze()),
            TaskId::Medium => Env::Maze(MazeSpec::medium()),
        }
    }

    pub fn layout(&self) -> &Layout {
        match self {
            Env::Grid(g) => &g.layout,
            Env::Maze(m) => &m.layout,
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            Env::Grid(g) => g.horizon,
            Env::Maze(m) => m.horizon,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Env::Grid(g) => g.gamma,
            Env::Maze(m) => m.gamma,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Env::Grid(_))
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Episode {
        match self {
            Env::Grid(g) => Episode {
                state: State::Grid(g.layout.start),
                goal: None,
            },
            Env::Maze(m) => {
                let (state, goal) = m.reset(rng);
                Episode {
                    state: State::Point(state),
                    goal: Some(goal),
                }
            }
        }
    }

    pub fn step(&self, episode_goal: Option<[f64; 2]>, state: State, action: Action) -> Result<StepOutcome> {
        match (self, state, action) {
            (Env::Grid(g), State::Grid(cell), Action::Move(mv)) => {
                let out = g.step(cell, mv)?;
                Ok(StepOutcome {
                    next: State::Grid(out.next),
                    reward: out.reward,
                    done: out.done,
                })
            }
            (Env::Maze(m), State::Point(p), Action::Force(f)) => {
                let goal = episode_goal
                    .unwrap_or_else(|| MazeSpec::cell_center(m.layout.goal));
                let out = m.step(p, f, goal)?;
                Ok(StepOutcome {
                    next: State::Point(out.next),
                    reward: out.reward,
                    done: out.done,
                })
            }
            _ => Err(Error::InvalidAction(format!(
                "state/action kind mismatch: {state} / {action:?}"
            ))),
        }
    }

    /// Uniformly random action in the task's action space.
    pub fn random_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            Env::Grid(_) => Action::Move(Move::ALL[rng.random_range(0..4)]),
            Env::Maze(_) => Action::Force([rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]),
        }
    }
}

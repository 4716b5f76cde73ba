use serde::{Deserialize, Serialize};

use crate::env::{Action, State};

/// One environment step as recorded in an offline dataset.
///
/// `done` marks the last step of an episode (goal or horizon); `terminal`
/// is set only when the goal was reached, so time-limit cut-offs can still
/// bootstrap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: State,
    pub action: Action,
    pub next: State,
    pub reward: f64,
    pub t: usize,
    pub done: bool,
    pub terminal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
    pub success: bool,
    /// Episode goal point for maze tasks.
    pub goal: Option<[f64; 2]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// True when timesteps run 0, 1, 2, ... without gaps.
    pub fn is_consecutive(&self) -> bool {
        self.transitions.iter().enumerate().all(|(i, tr)| tr.t == i)
    }
}

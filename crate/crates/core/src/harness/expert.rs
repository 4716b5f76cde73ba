use rand::RngCore;

use crate::env::{Action, Cell, MazeSpec, Move, State};
use crate::error::{Error, Result};
use crate::learner::Policy;

/// Scripted maze expert: steers toward the centre of the next cell on a
/// shortest cell path to the goal cell, then toward the episode goal point.
#[derive(Clone, Debug)]
pub struct WaypointExpert {
    maze: MazeSpec,
    dist_to_goal: Vec<Option<usize>>,
    cruise_speed: f64,
    gain: f64,
}

impl WaypointExpert {
    pub fn new(maze: &MazeSpec) -> Self {
        WaypointExpert {
            dist_to_goal: maze.layout.bfs_distances(maze.layout.goal),
            maze: maze.clone(),
            cruise_speed: 1.5,
            gain: 5.0,
        }
    }

    fn next_cell(&self, cell: Cell) -> Option<Cell> {
        let layout = &self.maze.layout;
        let d = self.dist_to_goal[layout.flat_index(cell)]?;
        Move::ALL.iter().find_map(|&mv| {
            layout
                .offset(cell, mv)
                .filter(|n| d > 0 && self.dist_to_goal[layout.flat_index(*n)] == Some(d - 1))
        })
    }

    /// Force command for a position/velocity and goal point.
    pub fn force(&self, x: f64, y: f64, vx: f64, vy: f64, goal: [f64; 2]) -> [f64; 2] {
        let cell = Cell::new(y.floor() as usize, x.floor() as usize);
        let target = match self.next_cell(cell) {
            Some(next) => MazeSpec::cell_center(next),
            None => goal,
        };
        let (dx, dy) = (target[0] - x, target[1] - y);
        let dist = (dx * dx + dy * dy).sqrt();
        let speed = self.cruise_speed.min(2.0 * dist);
        let (dvx, dvy) = if dist > 1e-12 {
            (speed * dx / dist, speed * dy / dist)
        } else {
            (0.0, 0.0)
        };
        [
            (self.gain * (dvx - vx)).clamp(-1.0, 1.0),
            (self.gain * (dvy - vy)).clamp(-1.0, 1.0),
        ]
    }
}

impl Policy for WaypointExpert {
    fn act(&self, state: &State, goal: Option<[f64; 2]>, _rng: &mut dyn RngCore) -> Result<Action> {
        match state {
            State::Point(p) => {
                let goal = goal.unwrap_or_else(|| MazeSpec::cell_center(self.maze.layout.goal));
                Ok(Action::Force(self.force(p.x, p.y, p.vx, p.vy, goal)))
            }
            State::Grid(_) => Err(Error::InvalidArgument(
                "waypoint expert needs a continuous state".into(),
            )),
        }
    }
}

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::layout::{Cell, Layout};
use crate::error::{Error, Result};

pub const U_MAZE: &str = "\
1 1 1 1 1
1 r 0 0 1
1 1 1 0 1
1 g 0 0 1
1 1 1 1 1
";

pub const MEDIUM_MAZE: &str = "\
1 1 1 1 1 1 1 1
1 r 0 1 1 0 0 1
1 0 0 1 0 0 0 1
1 1 0 0 0 1 1 1
1 0 0 1 0 0 0 1
1 0 1 0 0 1 0 1
1 0 0 0 1 g 0 1
1 1 1 1 1 1 1 1
";

// Keeps a position clamped against a wall on the free side of the face.
const FACE_EPS: f64 = 1e-9;

/// Position and velocity of the point mass, in map units where cell
/// `(row, col)` spans `x ∈ [col, col+1)`, `y ∈ [row, row+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl KinematicState {
    pub fn at_rest(x: f64, y: f64) -> Self {
        KinematicState {
            x,
            y,
            vx: 0.0,
            vy: 0.0,
        }
    }

    pub fn cell(&self) -> Option<Cell> {
        if self.x < 0.0 || self.y < 0.0 || !self.x.is_finite() || !self.y.is_finite() {
            return None;
        }
        Some(Cell::new(self.y.floor() as usize, self.x.floor() as usize))
    }

    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        ((self.x - p[0]).powi(2) + (self.y - p[1]).powi(2)).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicOutcome {
    pub next: KinematicState,
    pub reward: f64,
    pub done: bool,
}

/// Kinematic point-mass maze: a double integrator confined by axis-aligned
/// unit-cell walls.
#[derive(Clone, Debug, PartialEq)]
pub struct MazeSpec {
    pub layout: Layout,
    pub horizon: usize,
    pub gamma: f64,
    pub noise_std: f64,
    pub goal_radius: f64,
    pub dt: f64,
    pub v_max: f64,
}

impl MazeSpec {
    pub fn new(layout: Layout, horizon: usize, gamma: f64) -> MazeSpec {
        MazeSpec {
            layout,
            horizon,
            gamma,
            noise_std: 0.25,
            goal_radius: 0.5,
            dt: 0.1,
            v_max: 2.0,
        }
    }

    pub fn umaze() -> MazeSpec {
        MazeSpec::new(Layout::parse(U_MAZE).expect("built-in map"), 200, 0.996)
    }

    pub fn medium() -> MazeSpec {
        MazeSpec::new(Layout::parse(MEDIUM_MAZE).expect("built-in map"), 500, 0.999)
    }

    pub fn cell_center(cell: Cell) -> [f64; 2] {
        [cell.col as f64 + 0.5, cell.row as f64 + 0.5]
    }

    fn blocked(&self, x: f64, y: f64) -> bool {
        if x < 0.0 || y < 0.0 {
            return true;
        }
        let cell = Cell::new(y.floor() as usize, x.floor() as usize);
        !self.layout.in_bounds(cell) || self.layout.is_wall(cell)
    }

    pub fn is_free(&self, p: [f64; 2]) -> bool {
        p[0].is_finite() && p[1].is_finite() && !self.blocked(p[0], p[1])
    }

    /// Samples `center + N(0, std²)` per axis, redrawing until the point
    /// lands in a non-wall cell.
    pub fn sample_near<R: Rng + ?Sized>(&self, cell: Cell, std: f64, rng: &mut R) -> [f64; 2] {
        let [cx, cy] = Self::cell_center(cell);
        if std <= 0.0 {
            return [cx, cy];
        }
        let normal = Normal::new(0.0, std).expect("positive std");
        loop {
            let p = [cx + normal.sample(rng), cy + normal.sample(rng)];
            if self.is_free(p) {
                return p;
            }
        }
    }

    /// Initial state at rest near the start cell plus the episode goal point.
    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> (KinematicState, [f64; 2]) {
        self.reset_with_std(self.noise_std, rng)
    }

    pub fn reset_with_std<R: Rng + ?Sized>(
        &self,
        std: f64,
        rng: &mut R,
    ) -> (KinematicState, [f64; 2]) {
        let [x, y] = self.sample_near(self.layout.start, std, rng);
        let goal = self.sample_near(self.layout.goal, std, rng);
        (KinematicState::at_rest(x, y), goal)
    }

    /// One integration step under `force`, clamped to `[-1, 1]` per axis.
    ///
    /// Walls are resolved one axis at a time: a move that would end inside a
    /// wall cell stops at the wall face and loses its velocity along that axis.
    pub fn step(
        &self,
        state: KinematicState,
        force: [f64; 2],
        goal: [f64; 2],
    ) -> Result<KinematicOutcome> {
        if !force.iter().all(|f| f.is_finite()) {
            return Err(Error::InvalidAction(format!("non-finite force {force:?}")));
        }
        if !self.is_free([state.x, state.y]) {
            return Err(Error::OutsideMap(format!(
                "position ({}, {}) is not in a path cell",
                state.x, state.y
            )));
        }
        let fx = force[0].clamp(-1.0, 1.0);
        let fy = force[1].clamp(-1.0, 1.0);
        let mut vx = (state.vx + fx * self.dt).clamp(-self.v_max, self.v_max);
        let mut vy = (state.vy + fy * self.dt).clamp(-self.v_max, self.v_max);

        let mut x = state.x + vx * self.dt;
        if self.blocked(x, state.y) {
            x = if vx > 0.0 {
                x.floor() - FACE_EPS
            } else {
                x.floor() + 1.0
            };
            vx = 0.0;
        }
        let mut y = state.y + vy * self.dt;
        if self.blocked(x, y) {
            y = if vy > 0.0 {
                y.floor() - FACE_EPS
            } else {
                y.floor() + 1.0
            };
            vy = 0.0;
        }
        let next = KinematicState { x, y, vx, vy };
        let done = next.distance_to(goal) < self.goal_radius;
        Ok(KinematicOutcome {
            next,
            reward: if done { 1.0 } else { 0.0 },
            done,
        })
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn zero_force_at_rest_is_fixed_point() {
        let maze = MazeSpec::umaze();
        let s = KinematicState::at_rest(1.5, 1.5);
        let out = maze.step(s, [0.0, 0.0], [1.5, 3.5]).unwrap();
        assert_eq!(out.next, s);
        assert_eq!(out.reward, 0.0);
        assert!(!out.done);
    }

    #[test]
    fn reaching_goal_radius_terminates() {
        let maze = MazeSpec::umaze();
        let goal = [1.5, 3.5];
        let s = KinematicState::at_rest(1.5 + 0.49, 3.5);
        let out = maze.step(s, [0.0, 0.0], goal).unwrap();
        assert!(out.done);
        assert_eq!(out.reward, 1.0);
        let far = KinematicState::at_rest(1.5 + 0.51, 3.5);
        assert!(!maze.step(far, [0.0, 0.0], goal).unwrap().done);
    }

    #[test]
    fn head_on_wall_zeroes_normal_velocity_only() {
        let maze = MazeSpec::umaze();
        // Moving up from the top corridor into the outer wall at row 0.
        let s = KinematicState {
            x: 2.5,
            y: 1.05,
            vx: 0.7,
            vy: -1.5,
        };
        let out = maze.step(s, [0.0, 0.0], [1.5, 3.5]).unwrap();
        assert_eq!(out.next.vy, 0.0);
        assert_eq!(out.next.vx, 0.7);
        assert_eq!(out.next.y, 1.0);
        assert!(maze.is_free([out.next.x, out.next.y]));

        // Moving right into the wall at column 4.
        let s = KinematicState {
            x: 3.95,
            y: 2.5,
            vx: 1.0,
            vy: 0.3,
        };
        let out = maze.step(s, [1.0, 0.0], [1.5, 3.5]).unwrap();
        assert_eq!(out.next.vx, 0.0);
        assert_eq!(out.next.vy, 0.3);
        assert!(out.next.x < 4.0);
        assert_eq!(out.next.cell(), Some(Cell::new(2, 3)));
    }

    #[test]
    fn non_finite_force_is_rejected() {
        let maze = MazeSpec::umaze();
        let s = KinematicState::at_rest(1.5, 1.5);
        assert!(matches!(
            maze.step(s, [f64::NAN, 0.0], [1.5, 3.5]),
            Err(Error::InvalidAction(_))
        ));
    }

    #[test]
    fn zero_noise_reset_is_cell_center() {
        let maze = MazeSpec::umaze();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (s, goal) = maze.reset_with_std(0.0, &mut rng);
        assert_eq!((s.x, s.y), (1.5, 1.5));
        assert_eq!(goal, [1.5, 3.5]);
    }

    #[test]
    fn sampled_starts_land_in_path_cells() {
        let maze = MazeSpec::umaze();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let (s, goal) = maze.reset(&mut rng);
            let cell = s.cell().unwrap();
            assert!(maze.layout.is_state(cell), "{cell}");
            assert_eq!((s.vx, s.vy), (0.0, 0.0));
            assert!(maze.is_free(goal));
        }
    }

    #[test]
    fn medium_map_matches_expected_shape() {
        let maze = MazeSpec::medium();
        assert_eq!((maze.layout.height, maze.layout.width), (8, 8));
        assert_eq!(maze.layout.start, Cell::new(1, 1));
        assert_eq!(maze.layout.goal, Cell::new(6, 5));
        assert_eq!(maze.layout.states().len(), 26);
        assert_eq!(maze.horizon, 500);
    }
}

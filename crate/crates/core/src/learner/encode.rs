use crate::env::{Action, Env, Layout, Move, State};
use crate::error::{Error, Result};

pub const ACTION_DIM_DISCRETE: usize = 4;
pub const ACTION_DIM_CONTINUOUS: usize = 2;

/// Maps states and actions of one task to network inputs.
///
/// Grid cells are one-hot over every cell of the layout, walls included, at
/// `row·width + col`. Maze observations are `(x, y, vx, vy, goal_x, goal_y)`
/// scaled to roughly `[-1, 1]` by the map extent and the speed limit.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoder {
    discrete: bool,
    height: usize,
    width: usize,
    v_max: f64,
}

impl Encoder {
    pub fn for_env(env: &Env) -> Encoder {
        let layout = env.layout();
        Encoder {
            discrete: env.is_discrete(),
            height: layout.height,
            width: layout.width,
            v_max: match env {
                Env::Maze(m) => m.v_max,
                Env::Grid(_) => 1.0,
            },
        }
    }

    pub fn for_layout(layout: &Layout, discrete: bool, v_max: f64) -> Encoder {
        Encoder {
            discrete,
            height: layout.height,
            width: layout.width,
            v_max,
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.discrete
    }

    pub fn state_dim(&self) -> usize {
        if self.discrete {
            self.height * self.width
        } else {
            6
        }
    }

    pub fn action_dim(&self) -> usize {
        if self.discrete {
            ACTION_DIM_DISCRETE
        } else {
            ACTION_DIM_CONTINUOUS
        }
    }

    fn scale(&self, v: f64, extent: usize) -> f64 {
        2.0 * v / extent as f64 - 1.0
    }

    /// Writes the state features into `out[..state_dim]`.
    pub fn state_into(&self, state: &State, goal: Option<[f64; 2]>, out: &mut [f64]) -> Result<()> {
        match (self.discrete, state) {
            (true, State::Grid(c)) => {
                if c.row >= self.height || c.col >= self.width {
                    return Err(Error::OutsideMap(format!("cell {c} outside encoder grid")));
                }
                out[..self.state_dim()].fill(0.0);
                out[c.row * self.width + c.col] = 1.0;
                Ok(())
            }
            (false, State::Point(p)) => {
                let g = goal.unwrap_or([0.0, 0.0]);
                out[0] = self.scale(p.x, self.width);
                out[1] = self.scale(p.y, self.height);
                out[2] = p.vx / self.v_max;
                out[3] = p.vy / self.v_max;
                out[4] = self.scale(g[0], self.width);
                out[5] = self.scale(g[1], self.height);
                Ok(())
            }
            _ => Err(Error::InvalidArgument(format!("state {state} does not match encoder kind"))),
        }
    }

    pub fn action_into(&self, action: &Action, out: &mut [f64]) -> Result<()> {
        match (self.discrete, action) {
            (true, Action::Move(m)) => {
                out[..ACTION_DIM_DISCRETE].fill(0.0);
                out[m.index()] = 1.0;
                Ok(())
            }
            (false, Action::Force(f)) => {
                out[0] = f[0].clamp(-1.0, 1.0);
                out[1] = f[1].clamp(-1.0, 1.0);
                Ok(())
            }
            _ => Err(Error::InvalidAction(format!("{action:?} does not match encoder kind"))),
        }
    }

    /// One-hot of progress index `k ∈ 1..=k_total`.
    pub fn subgoal_into(k: usize, k_total: usize, out: &mut [f64]) -> Result<()> {
        if k == 0 || k > k_total {
            return Err(Error::InvalidArgument(format!("progress index {k} outside 1..={k_total}")));
        }
        out[..k_total].fill(0.0);
        out[k - 1] = 1.0;
        Ok(())
    }

    pub fn state(&self, state: &State, goal: Option<[f64; 2]>) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.state_dim()];
        self.state_into(state, goal, &mut v)?;
        Ok(v)
    }

    pub fn action(&self, action: &Action) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.action_dim()];
        self.action_into(action, &mut v)?;
        Ok(v)
    }
}

pub fn move_action(index: usize) -> Action {
    Action::Move(Move::from_index(index).expect("action index below 4"))
}

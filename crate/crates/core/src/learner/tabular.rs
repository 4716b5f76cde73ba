use crate::env::{Action, Cell, GridSpec, Move, State};
use crate::error::{Error, Result};
use crate::learner::Policy;

/// Converged state values and greedy actions for a grid world, indexed by
/// flat cell index. Non-state cells hold `0.0` / `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularPlan {
    pub width: usize,
    pub values: Vec<f64>,
    pub greedy: Vec<Option<Move>>,
    pub sweeps: usize,
}

const TIE_TOL: f64 = 1e-12;

/// Bellman optimality sweeps on the sparse goal reward until the largest
/// update falls below `tol`. The goal is absorbing with value 0.
pub fn value_iteration(spec: &GridSpec, gamma: f64, tol: f64) -> TabularPlan {
    let layout = &spec.layout;
    let states = layout.states();
    let mut values = vec![0.0; layout.cell_count()];
    let backup = |values: &[f64], s: Cell, mv: Move| -> f64 {
        let out = spec.step(s, mv).expect("states are never walls");
        let cont = if out.done {
            0.0
        } else {
            values[layout.flat_index(out.next)]
        };
        out.reward + gamma * cont
    };
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut next = values.clone();
        let mut residual: f64 = 0.0;
        for &s in &states {
            if s == layout.goal {
                continue;
            }
            let best = Move::ALL
                .iter()
                .map(|&mv| backup(&values, s, mv))
                .fold(f64::NEG_INFINITY, f64::max);
            let idx = layout.flat_index(s);
            residual = residual.max((best - values[idx]).abs());
            next[idx] = best;
        }
        values = next;
        if residual < tol {
            break;
        }
    }
    let mut greedy = vec![None; layout.cell_count()];
    for &s in &states {
        if s == layout.goal {
            continue;
        }
        let q: Vec<f64> = Move::ALL.iter().map(|&mv| backup(&values, s, mv)).collect();
        let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        greedy[layout.flat_index(s)] = Move::ALL
            .iter()
            .zip(&q)
            .find(|(_, &v)| v >= best - TIE_TOL)
            .map(|(&mv, _)| mv);
    }
    TabularPlan {
        width: layout.width,
        values,
        greedy,
        sweeps,
    }
}

impl TabularPlan {
    pub fn value(&self, cell: Cell) -> f64 {
        self.values[cell.row * self.width + cell.col]
    }

    pub fn action(&self, cell: Cell) -> Option<Move> {
        self.greedy.get(cell.row * self.width + cell.col).copied().flatten()
    }
}

impl Policy for TabularPlan {
    fn act(&self, state: &State, _goal: Option<[f64; 2]>, _rng: &mut dyn rand::RngCore) -> Result<Action> {
        match state {
            State::Grid(cell) => Ok(Action::Move(self.action(*cell).unwrap_or(Move::Up))),
            State::Point(_) => Err(Error::InvalidArgument(
                "tabular plan cannot act in a continuous task".into(),
            )),
        }
    }
}

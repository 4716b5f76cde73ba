use ndarray::Array2;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{Action, Cell, Env, Move, State};
use crate::error::{Error, Result};
use crate::harness::dataset::mean_std;
use crate::harness::generate::{episode_rng, rollout};
use crate::learner::{argmax, Learner, Policy};

/// Outcome of greedy evaluation rollouts.
///
/// `mean_steps`/`std_steps` average over all episodes with failures counted
/// at the horizon; the `success_` variants average over successes only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_steps: f64,
    pub std_steps: f64,
    pub mean_success_steps: f64,
    pub std_success_steps: f64,
}

impl EvalReport {
    pub fn from_lengths(lengths: &[(bool, usize)], horizon: usize) -> Result<EvalReport> {
        if lengths.is_empty() {
            return Err(Error::EmptyReport("no episodes were run".into()));
        }
        let all: Vec<f64> = lengths
            .iter()
            .map(|&(ok, n)| if ok { n } else { horizon } as f64)
            .collect();
        let succ: Vec<f64> = lengths.iter().filter(|e| e.0).map(|e| e.1 as f64).collect();
        let (mean, std) = mean_std(&all);
        let (ms, ss) = if succ.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            mean_std(&succ)
        };
        Ok(EvalReport {
            episodes: lengths.len(),
            successes: succ.len(),
            success_rate: succ.len() as f64 / lengths.len() as f64,
            mean_steps: mean,
            std_steps: std,
            mean_success_steps: ms,
            std_success_steps: ss,
        })
    }

    pub fn csv_header() -> &'static str {
        "episodes,successes,success_rate,mean_steps,std_steps,mean_success_steps,std_success_steps"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.episodes,
            self.successes,
            self.success_rate,
            self.mean_steps,
            self.std_steps,
            self.mean_success_steps,
            self.std_success_steps
        )
    }
}

/// Runs `episodes` rollouts of `policy`, episode `i` on RNG stream `i` of
/// `seed`.
pub fn evaluate(policy: &dyn Policy, env: &Env, episodes: usize, seed: u64) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(Error::EmptyReport("zero evaluation episodes requested".into()));
    }
    let lengths = (0..episodes as u64)
        .into_par_iter()
        .map(|i| {
            let traj = rollout(env, policy, 1.0, &mut episode_rng(seed, i))?;
            Ok((traj.success, traj.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_lengths(&lengths, env.horizon())
}

/// Greedy moves of a learned grid policy tabulated over every cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionTable {
    width: usize,
    actions: Vec<Option<Move>>,
}

impl ActionTable {
    /// One batched forward pass over all states of the layout.
    pub fn from_learner(learner: &Learner, env: &Env) -> Result<ActionTable> {
        if !env.is_discrete() {
            return Err(Error::InvalidArgument("action tables need a grid task".into()));
        }
        let layout = env.layout();
        let cells = layout.states();
        let states: Vec<State> = cells.iter().map(|c| State::Grid(*c)).collect();
        let logits = policy_logits(learner, &states)?;
        let mut actions = vec![None; layout.cell_count()];
        for (cell, row) in cells.iter().zip(logits.rows()) {
            let idx = argmax(row.as_slice().expect("row"));
            actions[layout.flat_index(*cell)] = Some(Move::from_index(idx)?);
        }
        Ok(ActionTable {
            width: layout.width,
            actions,
        })
    }

    pub fn action(&self, cell: Cell) -> Option<Move> {
        self.actions
            .get(cell.row * self.width + cell.col)
            .copied()
            .flatten()
    }
}

fn policy_logits(learner: &Learner, states: &[State]) -> Result<Array2<f64>> {
    match learner {
        Learner::Iql(l) => l.policy_outputs(states, None),
        Learner::Gcbc(l) => {
            let mut x = Array2::zeros((states.len(), l.input_dim()));
            let ds = l.encoder.state_dim();
            for (i, s) in states.iter().enumerate() {
                let row = x.row_mut(i).into_slice().expect("row");
                l.encoder.state_into(s, None, &mut row[..ds])?;
                let k = l.schedule.progress_index(s)?;
                crate::learner::Encoder::subgoal_into(k, l.schedule.k(), &mut row[ds..])?;
            }
            l.policy.forward(x.view())
        }
    }
}

impl Policy for ActionTable {
    fn act(&self, state: &State, _goal: Option<[f64; 2]>, _rng: &mut dyn RngCore) -> Result<Action> {
        let cell = state
            .cell()
            .ok_or_else(|| Error::InvalidArgument(format!("{state} is not a grid state")))?;
        self.action(cell)
            .map(Action::Move)
            .ok_or_else(|| Error::InvalidState {
                row: cell.row,
                col: cell.col,
            })
    }
}

/// Greedy evaluation of a learner; grid policies are tabulated first.
pub fn evaluate_learner(learner: &Learner, env: &Env, episodes: usize, seed: u64) -> Result<EvalReport> {
    if env.is_discrete() {
        evaluate(&ActionTable::from_learner(learner, env)?, env, episodes, seed)
    } else {
        evaluate(learner, env, episodes, seed)
    }
}

use rayon::prelude::*;

use crate::env::{Trajectory, Transition};
use crate::error::{Error, Result};
use crate::harness::{Dataset, ShapingHeader};
use crate::planner::SubgoalSchedule;
use crate::shaping::potential::{shaped_reward, ShapingParams};
use crate::shaping::theorems::ProgressStep;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapedTransition {
    pub base: Transition,
    pub k: usize,
    pub k_next: usize,
    pub shaped_reward: f64,
}

impl ShapedTransition {
    pub fn progress(&self) -> ProgressStep {
        ProgressStep {
            t: self.base.t,
            k: self.k,
            k_next: self.k_next,
            reward: self.base.reward,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapedTrajectory {
    pub transitions: Vec<ShapedTransition>,
    pub success: bool,
    pub goal: Option<[f64; 2]>,
}

/// Source dataset with every transition annotated by its progress indices
/// and shaped reward.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapedDataset {
    pub source: Dataset,
    pub trajectories: Vec<ShapedTrajectory>,
    pub params: ShapingParams,
    pub schedule_digest: String,
    pub source_digest: String,
}

impl ShapedDataset {
    /// The dataset with rewards replaced by `r'` and a shaping header, ready
    /// for training or serialization.
    pub fn to_dataset(&self) -> Dataset {
        let trajectories = self
            .trajectories
            .iter()
            .map(|st| Trajectory {
                transitions: st
                    .transitions
                    .iter()
                    .map(|s| Transition {
                        reward: s.shaped_reward,
                        ..s.base
                    })
                    .collect(),
                success: st.success,
                goal: st.goal,
            })
            .collect();
        Dataset {
            task: self.source.task,
            seed: self.source.seed,
            config_digest: self.source.config_digest.clone(),
            trajectories,
            shaping: Some(ShapingHeader {
                gamma: self.params.gamma,
                horizon: self.params.horizon,
                schedule_digest: self.schedule_digest.clone(),
            }),
        }
    }
}

fn shape_trajectory(
    index: usize,
    traj: &Trajectory,
    schedule: &SubgoalSchedule,
    params: &ShapingParams,
) -> Result<ShapedTrajectory> {
    let unmappable = |j: usize, state: String| Error::Unmappable {
        trajectory: index,
        index: j,
        state,
    };
    let k_goal = schedule.k();
    let transitions = traj
        .transitions
        .iter()
        .enumerate()
        .map(|(j, tr)| {
            let k = schedule
                .progress_index(&tr.state)
                .map_err(|_| unmappable(j, tr.state.to_string()))?;
            // The post-goal state always carries the final index.
            let k_next = if tr.terminal {
                k_goal
            } else {
                schedule
                    .progress_index(&tr.next)
                    .map_err(|_| unmappable(j, tr.next.to_string()))?
            };
            Ok(ShapedTransition {
                base: *tr,
                k,
                k_next,
                shaped_reward: shaped_reward(tr.reward, tr.t, k, k_next, params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapedTrajectory {
        transitions,
        success: traj.success,
        goal: traj.goal,
    })
}

/// Annotates every transition with `k_t = h(s_t)`, `k_{t+1} = h(s_{t+1})`
/// and the shaped reward. The source dataset is left untouched.
pub fn augment_dataset(
    dataset: &Dataset,
    schedule: &SubgoalSchedule,
    params: &ShapingParams,
) -> Result<ShapedDataset> {
    if dataset.shaping.is_some() {
        return Err(Error::Precondition("dataset is already shaped".into()));
    }
    let trajectories = dataset
        .trajectories
        .par_iter()
        .enumerate()
        .map(|(i, traj)| shape_trajectory(i, traj, schedule, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapedDataset {
        source: dataset.clone(),
        trajectories,
        params: *params,
        schedule_digest: schedule.digest(),
        source_digest: dataset.digest(),
    })
}

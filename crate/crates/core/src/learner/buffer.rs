use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::Transition;
use crate::error::{Error, Result};
use crate::harness::Dataset;
use crate::planner::SubgoalSchedule;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub tr: Transition,
    pub goal: Option<[f64; 2]>,
    /// Progress index of `tr.state`; 0 when no schedule was attached.
    pub k: usize,
}

/// Flattened transitions of a dataset, sampled uniformly for minibatches.
#[derive(Clone, Debug, PartialEq)]
pub struct Buffer {
    pub samples: Vec<Sample>,
    pub k_total: usize,
}

impl Buffer {
    pub fn from_dataset(dataset: &Dataset) -> Result<Buffer> {
        let samples: Vec<Sample> = dataset
            .trajectories
            .iter()
            .flat_map(|traj| {
                traj.transitions.iter().map(move |tr| Sample {
                    tr: *tr,
                    goal: traj.goal,
                    k: 0,
                })
            })
            .collect();
        if samples.is_empty() {
            return Err(Error::EmptyBatch);
        }
        Ok(Buffer { samples, k_total: 0 })
    }

    /// Attaches `k = h(s)` to every sample.
    pub fn with_schedule(dataset: &Dataset, schedule: &SubgoalSchedule) -> Result<Buffer> {
        let mut buf = Buffer::from_dataset(dataset)?;
        let mut flat = 0;
        for (i, traj) in dataset.trajectories.iter().enumerate() {
            for (j, tr) in traj.transitions.iter().enumerate() {
                buf.samples[flat].k = schedule.progress_index(&tr.state).map_err(|_| Error::Unmappable {
                    trajectory: i,
                    index: j,
                    state: tr.state.to_string(),
                })?;
                flat += 1;
            }
        }
        buf.k_total = schedule.k();
        Ok(buf)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Minibatch indices for gradient step `step`; a pure function of
    /// `(seed, step)` so training can resume from a checkpoint.
    pub fn batch_indices(&self, batch: usize, seed: u64, step: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(step);
        (0..batch).map(|_| rng.random_range(0..self.samples.len())).collect()
    }
}

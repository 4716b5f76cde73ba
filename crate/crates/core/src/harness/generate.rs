use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::env::{Env, TaskId, Trajectory, Transition};
use crate::error::Result;
use crate::harness::dataset::Dataset;
use crate::learner::Policy;

/// Independent RNG stream for episode `index` under `seed`.
pub fn episode_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs one episode to the goal or the horizon. At each step the expert acts
/// with probability `expert_prob`; otherwise a uniformly random action is
/// taken.
pub fn rollout(
    env: &Env,
    expert: &dyn Policy,
    expert_prob: f64,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    let episode = env.reset(rng);
    let horizon = env.horizon();
    let mut state = episode.state;
    let mut transitions = Vec::new();
    let mut success = false;
    for t in 0..horizon {
        let action = if rng.random::<f64>() < expert_prob {
            expert.act(&state, episode.goal, rng)?
        } else {
            env.random_action(rng)
        };
        let out = env.step(episode.goal, state, action)?;
        let done = out.done || t + 1 == horizon;
        transitions.push(Transition {
            state,
            action,
            next: out.next,
            reward: out.reward,
            t,
            done,
            terminal: out.done,
        });
        state = out.next;
        if out.done {
            success = true;
        }
        if done {
            break;
        }
    }
    Ok(Trajectory {
        transitions,
        success,
        goal: episode.goal,
    })
}

/// Generates `n` behaviour-policy trajectories. Episodes use independent RNG
/// streams and are collected in index order, so the result does not depend
/// on thread scheduling.
pub fn generate_dataset(
    task: TaskId,
    env: &Env,
    expert: &dyn Policy,
    expert_prob: f64,
    n: usize,
    seed: u64,
    config_digest: String,
) -> Result<Dataset> {
    let trajectories = (0..n as u64)
        .into_par_iter()
        .map(|i| rollout(env, expert, expert_prob, &mut episode_rng(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        task,
        seed,
        config_digest,
        trajectories,
        shaping: None,
    })
}

//! Executable forms of the shaping guarantees: closed-form differences,
//! trajectory returns and the successful-trajectory checker they rely on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shaping::potential::{potential, shaped_reward, shaping_term, ShapingParams};

/// One transition reduced to what the return algebra needs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressStep {
    pub t: usize,
    pub k: usize,
    pub k_next: usize,
    /// Base (unshaped) reward.
    pub reward: f64,
}

/// Where the final progress index `K` is first reached in a successful
/// trajectory of `H` transitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexConvention {
    /// `k_{H-1} = K`: the last pre-goal state already carries `K`.
    LastState,
    /// Only the post-goal state `s_H` carries `K`.
    TerminalState,
}

/// Reward gap between a positive-progress successor (`k_c`) and a
/// non-progress successor (`k_n`) from the same state at time `t`, both with
/// zero base reward: `γ·((t+1)/T)·(1/k_n − 1/k_c)`.
pub fn check_theorem1(
    t: usize,
    k_t: usize,
    k_c: usize,
    k_n: usize,
    params: &ShapingParams,
) -> Result<f64> {
    if !(k_n <= k_t && k_t < k_c) || k_n == 0 {
        return Err(Error::Precondition(format!(
            "need 1 <= k_n <= k_t < k_c, got k_n={k_n} k_t={k_t} k_c={k_c}"
        )));
    }
    if t + 1 > params.horizon {
        return Err(Error::Precondition(format!("t={t} beyond horizon")));
    }
    let scale = params.gamma * (t as f64 + 1.0) / params.horizon as f64;
    Ok(scale * (1.0 / k_n as f64 - 1.0 / k_c as f64))
}

/// Shaping term `γ·Φ(t+1, k_{t+1}) − Φ(t, k_t)` of a transition; negative
/// for non-progress steps when `params.strict_penalty()`.
pub fn check_theorem2(t: usize, k_t: usize, k_next: usize, params: &ShapingParams) -> Result<f64> {
    shaping_term(t, k_t, k_next, params)
}

fn check_consecutive(steps: &[ProgressStep]) -> Result<()> {
    for (i, s) in steps.iter().enumerate() {
        if s.t != i {
            return Err(Error::InconsistentTimesteps {
                expected: i,
                found: s.t,
            });
        }
    }
    Ok(())
}

/// `Σ γ^t r_t` (or `r'_t` when `shaped`).
pub fn trajectory_return(steps: &[ProgressStep], params: &ShapingParams, shaped: bool) -> Result<f64> {
    check_consecutive(steps)?;
    let mut total = 0.0;
    let mut discount = 1.0;
    for s in steps {
        let r = if shaped {
            shaped_reward(s.reward, s.t, s.k, s.k_next, params)?
        } else {
            s.reward
        };
        total += discount * r;
        discount *= params.gamma;
    }
    Ok(total)
}

/// Telescoped shaped return: `Σ γ^t r_t + γ^{H}Φ(H, k_H) − Φ(0, k_0)`.
pub fn telescoped_return(steps: &[ProgressStep], params: &ShapingParams) -> Result<f64> {
    let base = trajectory_return(steps, params, false)?;
    let (Some(first), Some(last)) = (steps.first(), steps.last()) else {
        return Ok(0.0);
    };
    let h = steps.len();
    let end = params.gamma.powi(h as i32) * potential(h, last.k_next, params.horizon)?;
    Ok(base + end - potential(0, first.k, params.horizon)?)
}

/// Checks that `steps` is a successful trajectory over `k_total` ordered
/// subgoals: consecutive timesteps, starts at index 1, only ever advances by
/// one index at a time, ends at `K`, and earns the sparse reward exactly on
/// its last step.
pub fn check_successful(steps: &[ProgressStep], k_total: usize) -> Result<IndexConvention> {
    check_consecutive(steps)?;
    let (first, last) = match (steps.first(), steps.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Precondition("empty trajectory is not successful".into())),
    };
    if first.k != 1 {
        return Err(Error::Precondition(format!("k_0 = {} != 1", first.k)));
    }
    for (i, s) in steps.iter().enumerate() {
        if s.k_next != s.k && s.k_next != s.k + 1 {
            return Err(Error::Precondition(format!(
                "step {i}: index moves {} -> {}",
                s.k, s.k_next
            )));
        }
        if let Some(n) = steps.get(i + 1) {
            if n.k != s.k_next {
                return Err(Error::Precondition(format!("step {i}: index chain broken")));
            }
        }
        let expected = if i + 1 == steps.len() { 1.0 } else { 0.0 };
        if s.reward != expected {
            return Err(Error::Precondition(format!(
                "step {i}: reward {} where a successful trajectory has {expected}",
                s.reward
            )));
        }
    }
    if last.k_next != k_total {
        return Err(Error::Precondition(format!(
            "final index {} != K = {k_total}",
            last.k_next
        )));
    }
    Ok(if last.k == k_total {
        IndexConvention::LastState
    } else {
        IndexConvention::TerminalState
    })
}

/// Shaped returns of a shorter and a longer successful trajectory.
pub fn check_theorem3(
    short: &[ProgressStep],
    long: &[ProgressStep],
    k_total: usize,
    params: &ShapingParams,
) -> Result<(f64, f64)> {
    check_successful(short, k_total)?;
    check_successful(long, k_total)?;
    if short.len() >= long.len() {
        return Err(Error::Precondition(format!(
            "short trajectory ({}) must be strictly shorter than long ({})",
            short.len(),
            long.len()
        )));
    }
    Ok((
        trajectory_return(short, params, true)?,
        trajectory_return(long, params, true)?,
    ))
}

//! Randomized sweeps over the shaping guarantees.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shaping::potential::{shaped_reward, ShapingParams};
use crate::shaping::theorems::{
    check_successful, check_theorem1, check_theorem2, check_theorem3, telescoped_return,
    trajectory_return, ProgressStep,
};

const MAX_K: usize = 8;
const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Random tuples for the single-transition checks and the equal-length
    /// trajectory pairs.
    pub samples: usize,
    /// Short/long trajectory pairs.
    pub pairs: usize,
    /// Random (not necessarily successful) trajectories for the telescoping
    /// identity.
    pub trajectories: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            samples: 100_000,
            pairs: 1_000,
            trajectories: 1_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest deviation observed where the check compares two numbers.
    pub max_error: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

/// Successful synthetic trajectory of `len` transitions over `k_total`
/// subgoals: the index advances once at each of `k_total − 1` distinct
/// random transitions and the last transition earns the sparse reward.
pub fn synthetic_successful<R: Rng + ?Sized>(len: usize, k_total: usize, rng: &mut R) -> Result<Vec<ProgressStep>> {
    if k_total == 0 || len == 0 || len < k_total - 1 {
        return Err(Error::InvalidArgument(format!(
            "cannot cross {} boundaries in {len} steps",
            k_total.saturating_sub(1)
        )));
    }
    let mut cross = vec![false; len];
    for i in sample(rng, len, k_total - 1) {
        cross[i] = true;
    }
    let mut k = 1;
    Ok((0..len)
        .map(|t| {
            let k_next = if cross[t] { k + 1 } else { k };
            let s = ProgressStep {
                t,
                k,
                k_next,
                reward: if t + 1 == len { 1.0 } else { 0.0 },
            };
            k = k_next;
            s
        })
        .collect())
}

/// Arbitrary trajectory: random indices (progress and regress) and random
/// base rewards.
pub fn synthetic_arbitrary<R: Rng + ?Sized>(len: usize, k_total: usize, rng: &mut R) -> Vec<ProgressStep> {
    let mut k = rng.random_range(1..=k_total);
    (0..len)
        .map(|t| {
            let k_next = rng.random_range(1..=k_total);
            let s = ProgressStep {
                t,
                k,
                k_next,
                reward: rng.random_range(-1.0..1.0),
            };
            k = k_next;
            s
        })
        .collect()
}

fn tally(name: &str) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        cases: 0,
        failures: 0,
        max_error: 0.0,
    }
}

pub fn sweep_theorem1(params: &ShapingParams, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut r = tally("theorem1");
    for _ in 0..samples {
        let k_total = rng.random_range(2..=MAX_K);
        let t = rng.random_range(0..params.horizon);
        let k_t = rng.random_range(1..k_total);
        let k_c = rng.random_range(k_t + 1..=k_total);
        let k_n = rng.random_range(1..=k_t);
        let d = check_theorem1(t, k_t, k_c, k_n, params)?;
        let two = shaped_reward(0.0, t, k_t, k_c, params)? - shaped_reward(0.0, t, k_t, k_n, params)?;
        let err = (d - two).abs();
        r.max_error = r.max_error.max(err);
        r.cases += 1;
        if !(d > 0.0) || err > 1e-12 {
            r.failures += 1;
        }
    }
    Ok(r)
}

pub fn sweep_theorem2(params: &ShapingParams, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut r = tally("theorem2");
    for _ in 0..samples {
        let k_t = rng.random_range(1..=MAX_K);
        let k_next = rng.random_range(1..=k_t);
        let t = rng.random_range(0..params.horizon);
        let d = check_theorem2(t, k_t, k_next, params)?;
        r.cases += 1;
        if !(d < 0.0) {
            r.failures += 1;
        }
    }
    Ok(r)
}

pub fn sweep_lemma1(params: &ShapingParams, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut r = tally("lemma1");
    for _ in 0..samples {
        let k_total = rng.random_range(1..=MAX_K);
        let len = rng.random_range(k_total.max(2) - 1..=params.horizon);
        let a = synthetic_successful(len, k_total, rng)?;
        let b = synthetic_successful(len, k_total, rng)?;
        check_successful(&a, k_total)?;
        check_successful(&b, k_total)?;
        let err = (trajectory_return(&a, params, true)? - trajectory_return(&b, params, true)?).abs();
        r.max_error = r.max_error.max(err);
        r.cases += 1;
        if err > TOL {
            r.failures += 1;
        }
    }
    Ok(r)
}

pub fn sweep_theorem3(params: &ShapingParams, pairs: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut r = tally("theorem3");
    for _ in 0..pairs {
        let k_total = rng.random_range(1..=MAX_K);
        let lo = k_total.max(2) - 1;
        let long_len = rng.random_range(lo + 1..=params.horizon);
        let short_len = rng.random_range(lo..long_len);
        let short = synthetic_successful(short_len, k_total, rng)?;
        let long = synthetic_successful(long_len, k_total, rng)?;
        let (rs, rl) = check_theorem3(&short, &long, k_total, params)?;
        r.cases += 1;
        if !(rs > rl) {
            r.failures += 1;
        }
    }
    Ok(r)
}

pub fn sweep_telescoping(params: &ShapingParams, trajectories: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut r = tally("telescoping");
    for _ in 0..trajectories {
        let k_total = rng.random_range(1..=MAX_K);
        let len = rng.random_range(1..=params.horizon);
        let steps = synthetic_arbitrary(len, k_total, rng);
        let err = (trajectory_return(&steps, params, true)? - telescoped_return(&steps, params)?).abs();
        r.max_error = r.max_error.max(err);
        r.cases += 1;
        if err > TOL {
            r.failures += 1;
        }
    }
    Ok(r)
}

/// All five checks, each on its own RNG stream of `config.seed`.
pub fn run_sweeps(params: &ShapingParams, config: &SweepConfig) -> Result<Vec<CheckResult>> {
    let rng = |stream: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(config.seed);
        r.set_stream(stream);
        r
    };
    Ok(vec![
        sweep_theorem1(params, config.samples, &mut rng(1))?,
        sweep_theorem2(params, config.samples, &mut rng(2))?,
        sweep_lemma1(params, config.samples, &mut rng(3))?,
        sweep_theorem3(params, config.pairs, &mut rng(4))?,
        sweep_telescoping(params, config.trajectories, &mut rng(5))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps_pass() {
        let p = ShapingParams::new(0.999, 100).unwrap();
        let cfg = SweepConfig {
            samples: 2_000,
            pairs: 200,
            trajectories: 200,
            seed: 3,
        };
        for r in run_sweeps(&p, &cfg).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn boundary_gamma_breaks_theorem2() {
        let p = ShapingParams::new(0.99, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = sweep_theorem2(&p, 20_000, &mut rng).unwrap();
        assert!(r.failures > 0);
    }
}

use ndarray::Array2;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::{Action, Move};
use crate::error::{Error, Result};
use crate::learner::losses::log_softmax;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActMode {
    #[default]
    Greedy,
    Sample,
}

/// First index of the maximum; earlier actions win ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Turns one row of policy-head output into an action: logits over the four
/// moves, or the mean of a fixed-variance Gaussian over the force.
pub fn action_from_output(
    out: &[f64],
    discrete: bool,
    mode: ActMode,
    std: f64,
    rng: &mut dyn RngCore,
) -> Result<Action> {
    if discrete {
        let idx = match mode {
            ActMode::Greedy => argmax(out),
            ActMode::Sample => {
                let row = Array2::from_shape_vec((1, out.len()), out.to_vec())
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                let probs = log_softmax(row.view()).mapv(f64::exp);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = out.len() - 1;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                pick
            }
        };
        Ok(Action::Move(Move::from_index(idx)?))
    } else {
        let mut f = [out[0], out[1]];
        if mode == ActMode::Sample {
            let noise = Normal::new(0.0, std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            for v in &mut f {
                *v += noise.sample(rng);
            }
        }
        Ok(Action::Force([f[0].clamp(-1.0, 1.0), f[1].clamp(-1.0, 1.0)]))
    }
}

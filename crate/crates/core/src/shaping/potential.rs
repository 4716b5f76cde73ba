use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discount and horizon used by the shaped reward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapingParams {
    pub gamma: f64,
    pub horizon: usize,
}

impl ShapingParams {
    pub fn new(gamma: f64, horizon: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma {gamma} not in (0,1)")));
        }
        if horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        Ok(ShapingParams { gamma, horizon })
    }

    /// `(T-1)/T`, the discount above which non-progress steps are strictly
    /// penalised.
    pub fn gamma_threshold(&self) -> f64 {
        (self.horizon as f64 - 1.0) / self.horizon as f64
    }

    /// True when `γ > (T-1)/T`.
    pub fn strict_penalty(&self) -> bool {
        self.gamma > self.gamma_threshold()
    }

    /// Set when `γ ≤ (T-1)/T`: at `t = T-1` a non-progress step can then
    /// earn a zero (or positive) shaping term.
    pub fn boundary_warning(&self) -> bool {
        !self.strict_penalty()
    }
}

/// `Φ(t, k) = -(t/T)·(1/k)`.
pub fn potential(t: usize, k: usize, horizon: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("progress index must be >= 1".into()));
    }
    if horizon == 0 || t > horizon {
        return Err(Error::InvalidArgument(format!(
            "timestep {t} outside [0, {horizon}]"
        )));
    }
    Ok(-(t as f64 / horizon as f64) / k as f64)
}

/// `r' = r + γ·Φ(t+1, k_{t+1}) − Φ(t, k_t)`.
pub fn shaped_reward(
    reward: f64,
    t: usize,
    k_t: usize,
    k_next: usize,
    params: &ShapingParams,
) -> Result<f64> {
    Ok(reward + shaping_term(t, k_t, k_next, params)?)
}

/// `γ·Φ(t+1, k_{t+1}) − Φ(t, k_t)`.
pub fn shaping_term(t: usize, k_t: usize, k_next: usize, params: &ShapingParams) -> Result<f64> {
    let next = potential(t + 1, k_next, params.horizon)?;
    let cur = potential(t, k_t, params.horizon)?;
    Ok(params.gamma * next - cur)
}

/// A transition makes positive progress iff the index strictly increases.
pub fn is_positive_progress(k_t: usize, k_next: usize) -> bool {
    k_t < k_next
}

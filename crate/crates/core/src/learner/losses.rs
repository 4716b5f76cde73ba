//! Batch-mean losses and their gradients with respect to the network output.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

fn check_batch(n: usize, others: &[usize]) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    for &m in others {
        if m != n {
            return Err(Error::ShapeMismatch { expected: n, got: m });
        }
    }
    Ok(())
}

/// `mean |τ − 1{u<0}|·u²` with `u = target − pred`.
pub fn expectile(pred: &[f64], target: &[f64], tau: f64) -> Result<(f64, Vec<f64>)> {
    check_batch(pred.len(), &[target.len()])?;
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let u = t - p;
            let w = if u < 0.0 { 1.0 - tau } else { tau };
            loss += w * u * u;
            -2.0 * w * u / n
        })
        .collect();
    Ok((loss / n, grad))
}

/// `mean (pred − target)²`.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_batch(pred.len(), &[target.len()])?;
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d / n
        })
        .collect();
    Ok((loss / n, grad))
}

/// Row-wise log-softmax.
pub fn log_softmax(logits: ArrayView2<f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        row.mapv_inplace(|v| v - lse);
    }
    out
}

/// `mean −w_i·log softmax(logits_i)[a_i]`.
pub fn weighted_cross_entropy(
    logits: ArrayView2<f64>,
    actions: &[usize],
    weights: &[f64],
) -> Result<(f64, Array2<f64>)> {
    check_batch(logits.nrows(), &[actions.len(), weights.len()])?;
    let n = logits.nrows() as f64;
    let logp = log_softmax(logits);
    let mut grad = logp.mapv(f64::exp);
    let mut loss = 0.0;
    for (i, (&a, &w)) in actions.iter().zip(weights).enumerate() {
        if a >= logits.ncols() {
            return Err(Error::InvalidArgument(format!("action index {a} out of range")));
        }
        loss -= w * logp[[i, a]];
        grad[[i, a]] -= 1.0;
        grad.row_mut(i).mapv_inplace(|g| g * w / n);
    }
    Ok((loss / n, grad))
}

/// `mean w_i·½‖μ_i − a_i‖²`: the negative log-likelihood of a unit-variance
/// Gaussian up to a constant.
pub fn weighted_gaussian(
    mean: ArrayView2<f64>,
    actions: ArrayView2<f64>,
    weights: &[f64],
) -> Result<(f64, Array2<f64>)> {
    check_batch(mean.nrows(), &[actions.nrows(), weights.len()])?;
    if mean.ncols() != actions.ncols() {
        return Err(Error::ShapeMismatch {
            expected: mean.ncols(),
            got: actions.ncols(),
        });
    }
    let n = mean.nrows() as f64;
    let mut grad = &mean - &actions;
    let mut loss = 0.0;
    for (mut row, &w) in grad.rows_mut().into_iter().zip(weights) {
        loss += 0.5 * w * row.iter().map(|d| d * d).sum::<f64>();
        row.mapv_inplace(|d| d * w / n);
    }
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn expectile_half_is_half_mse() {
        let p = [0.3, -1.0, 2.0];
        let t = [1.0, 0.5, -0.25];
        let (le, ge) = expectile(&p, &t, 0.5).unwrap();
        let (lm, gm) = mse(&p, &t).unwrap();
        assert!((le - 0.5 * lm).abs() < 1e-15);
        for (a, b) in ge.iter().zip(&gm) {
            assert!((a - 0.5 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_entropy_single_example() {
        let logits = array![[1.0, 2.0, 0.5, -1.0]];
        let (l, _) = weighted_cross_entropy(logits.view(), &[1], &[1.0]).unwrap();
        let z: f64 = logits.iter().map(|v: &f64| v.exp()).sum();
        assert!((l - (-(2.0f64.exp() / z).ln())).abs() < 1e-12);
    }

    #[test]
    fn confident_policy_has_near_zero_loss() {
        let logits = array![[40.0, 0.0, 0.0, 0.0]];
        let (l, g) = weighted_cross_entropy(logits.view(), &[0], &[1.0]).unwrap();
        assert!(l < 1e-15);
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn empty_batch_rejected() {
        assert!(matches!(mse(&[], &[]), Err(Error::EmptyBatch)));
    }
}

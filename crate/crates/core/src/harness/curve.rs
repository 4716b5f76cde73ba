use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation of a learner partway through training.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub success: f64,
    pub mean_steps: f64,
}

/// Trailing moving average over the last `window` training iterations:
/// each point averages every point whose iteration lies in
/// `(iteration − window, iteration]`. Early points average what exists.
pub fn smooth_curve(points: &[CurvePoint], window: usize) -> Result<Vec<CurvePoint>> {
    if points.is_empty() {
        return Err(Error::EmptySeries);
    }
    if window == 0 {
        return Err(Error::InvalidArgument("smoothing window must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(points.len());
    let mut start = 0;
    for (i, p) in points.iter().enumerate() {
        while points[start].iteration + window <= p.iteration {
            start += 1;
        }
        let span = &points[start..=i];
        let n = span.len() as f64;
        out.push(CurvePoint {
            iteration: p.iteration,
            success: span.iter().map(|q| q.success).sum::<f64>() / n,
            mean_steps: span.iter().map(|q| q.mean_steps).sum::<f64>() / n,
        });
    }
    Ok(out)
}

/// Iteration from which the success rate stays at or above `threshold` for
/// the rest of the (already smoothed) curve; `None` if it never settles.
pub fn iterations_to_convergence(curve: &[CurvePoint], threshold: f64) -> Option<usize> {
    let mut first = None;
    for p in curve.iter().rev() {
        if p.success >= threshold {
            first = Some(p.iteration);
        } else {
            break;
        }
    }
    first
}

pub fn curve_csv(raw: &[CurvePoint], smoothed: &[CurvePoint]) -> String {
    let mut out = String::from("iteration,success,mean_steps,smoothed_success,smoothed_steps\n");
    for (r, s) in raw.iter().zip(smoothed) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration, r.success, r.mean_steps, s.success, s.mean_steps
        );
    }
    out
}

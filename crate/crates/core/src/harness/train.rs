use crate::env::Env;
use crate::error::Result;
use crate::harness::curve::CurvePoint;
use crate::harness::eval::{evaluate_learner, EvalReport};
use crate::learner::{Buffer, Learner};

/// Evaluation settings used while training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalSchedule {
    /// Evaluate every this many iterations; 0 evaluates only at the end.
    pub every: usize,
    pub episodes: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub curve: Vec<CurvePoint>,
    pub report: EvalReport,
    pub final_loss: f64,
}

/// Runs `iterations` training steps, evaluating at iteration 0, every
/// `eval.every` iterations and once more at the end.
pub fn train_with_curve(
    learner: &mut Learner,
    buffer: &Buffer,
    env: &Env,
    iterations: usize,
    eval: EvalSchedule,
) -> Result<TrainOutcome> {
    let mut curve = Vec::new();
    let record = |learner: &Learner, it: usize, curve: &mut Vec<CurvePoint>| -> Result<EvalReport> {
        let r = evaluate_learner(learner, env, eval.episodes, eval.seed)?;
        curve.push(CurvePoint {
            iteration: it,
            success: r.success_rate,
            mean_steps: r.mean_steps,
        });
        Ok(r)
    };
    if eval.every > 0 {
        record(learner, 0, &mut curve)?;
    }
    let mut final_loss = f64::NAN;
    let mut last = None;
    for it in 1..=iterations {
        final_loss = learner.train_step(buffer)?;
        if eval.every > 0 && it % eval.every == 0 {
            last = Some((it, record(learner, it, &mut curve)?));
        }
    }
    let report = match last {
        Some((it, r)) if it == iterations => r,
        _ => record(learner, iterations, &mut curve)?,
    };
    Ok(TrainOutcome {
        curve,
        report,
        final_loss,
    })
}

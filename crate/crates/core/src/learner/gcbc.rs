use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{Action, State};
use crate::error::{Error, Result};
use crate::learner::buffer::Buffer;
use crate::learner::encode::Encoder;
use crate::learner::iql::IqlHyper;
use crate::learner::losses::{weighted_cross_entropy, weighted_gaussian};
use crate::learner::net::{Activation, Adam, Mlp};
use crate::learner::policy::{action_from_output, ActMode};
use crate::learner::Policy;
use crate::planner::SubgoalSchedule;

/// Behavioral cloning conditioned on the current subgoal: the policy sees
/// the state together with a one-hot of `h(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GcbcLearner {
    pub hyper: IqlHyper,
    pub encoder: Encoder,
    pub schedule: SubgoalSchedule,
    pub policy: Mlp,
    pub opt_policy: Adam,
    pub step: u64,
    pub seed: u64,
}

impl GcbcLearner {
    pub fn new(encoder: Encoder, schedule: SubgoalSchedule, hyper: IqlHyper, seed: u64) -> Result<Self> {
        hyper.validate()?;
        if schedule.k() == 0 {
            return Err(Error::NoSubtasks);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = hyper.hidden;
        let input = encoder.state_dim() + schedule.k();
        let policy = Mlp::init(&[input, h, h, encoder.action_dim()], Activation::Relu, &mut rng)?;
        Ok(GcbcLearner {
            hyper,
            opt_policy: Adam::new(policy.params.len(), hyper.lr),
            encoder,
            schedule,
            policy,
            step: 0,
            seed,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.state_dim() + self.schedule.k()
    }

    fn input_into(&self, state: &State, goal: Option<[f64; 2]>, k: usize, row: &mut [f64]) -> Result<()> {
        let ds = self.encoder.state_dim();
        self.encoder.state_into(state, goal, &mut row[..ds])?;
        Encoder::subgoal_into(k, self.schedule.k(), &mut row[ds..])
    }

    /// One supervised step on the action log-likelihood.
    pub fn update(&mut self, buffer: &Buffer, indices: &[usize]) -> Result<f64> {
        if indices.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if buffer.k_total != self.schedule.k() {
            return Err(Error::Precondition(format!(
                "buffer carries {} subgoals, learner expects {}",
                buffer.k_total,
                self.schedule.k()
            )));
        }
        let (n, da) = (indices.len(), self.encoder.action_dim());
        let mut x = Array2::zeros((n, self.input_dim()));
        let mut actions = vec![0usize; n];
        let mut forces = Array2::zeros((n, da));
        for (row, &i) in indices.iter().enumerate() {
            let smp = buffer.samples.get(i).ok_or(Error::EmptyBatch)?;
            self.input_into(&smp.tr.state, smp.goal, smp.k, x.row_mut(row).into_slice().expect("row"))?;
            match smp.tr.action {
                Action::Move(m) => actions[row] = m.index(),
                Action::Force(_) => {
                    let r = forces.row_mut(row).into_slice().expect("row");
                    self.encoder.action_into(&smp.tr.action, r)?;
                }
            }
        }
        let weights = vec![1.0; n];
        let cache = self.policy.forward_cached(x.view())?;
        let (loss, g) = if self.encoder.is_discrete() {
            weighted_cross_entropy(cache.output().view(), &actions, &weights)?
        } else {
            weighted_gaussian(cache.output().view(), forces.view(), &weights)?
        };
        let grads = self.policy.backward(&cache, g.view())?;
        self.opt_policy.step(&mut self.policy.params, &grads)?;
        self.step += 1;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!("non-finite loss at step {}", self.step)));
        }
        Ok(loss)
    }

    pub fn train_step(&mut self, buffer: &Buffer) -> Result<f64> {
        let idx = buffer.batch_indices(self.hyper.batch_size, self.seed, self.step);
        self.update(buffer, &idx)
    }

    pub fn act_with(
        &self,
        state: &State,
        goal: Option<[f64; 2]>,
        mode: ActMode,
        rng: &mut dyn RngCore,
    ) -> Result<Action> {
        let k = self.schedule.progress_index(state)?;
        let mut x = vec![0.0; self.input_dim()];
        self.input_into(state, goal, k, &mut x)?;
        let out = self.policy.forward(Array2::from_shape_vec((1, x.len()), x).expect("row").view())?;
        action_from_output(out.row(0).as_slice().expect("row"), self.encoder.is_discrete(), mode, self.hyper.policy_std, rng)
    }

    pub fn is_finite(&self) -> bool {
        self.policy.is_finite()
    }
}

impl Policy for GcbcLearner {
    fn act(&self, state: &State, goal: Option<[f64; 2]>, rng: &mut dyn RngCore) -> Result<Action> {
        self.act_with(state, goal, ActMode::Greedy, rng)
    }
}

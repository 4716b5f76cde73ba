use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, State};
use crate::error::{Error, Result};
use crate::learner::buffer::Buffer;
use crate::learner::encode::Encoder;
use crate::learner::losses::{expectile, mse, weighted_cross_entropy, weighted_gaussian};
use crate::learner::net::{Activation, Adam, Mlp};
use crate::learner::policy::{action_from_output, ActMode};
use crate::learner::Policy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// IQL on the shaped dataset.
    Storl,
    /// IQL on the base sparse reward.
    Iql,
    Gcbc,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Storl, Method::Iql, Method::Gcbc];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Storl => "storl",
            Method::Iql => "iql",
            Method::Gcbc => "gcbc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IqlHyper {
    pub expectile: f64,
    pub beta: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub target_rate: f64,
    pub steps: usize,
    pub weight_clip: f64,
    pub hidden: usize,
    /// Standard deviation of the Gaussian policy used when sampling forces.
    pub policy_std: f64,
}

impl Default for IqlHyper {
    fn default() -> Self {
        IqlHyper {
            expectile: 0.9,
            beta: 3.0,
            lr: 3e-4,
            batch_size: 256,
            target_rate: 0.005,
            steps: 1000,
            weight_clip: 100.0,
            hidden: 128,
            policy_std: 0.1,
        }
    }
}

impl IqlHyper {
    pub fn validate(&self) -> Result<()> {
        let ok = self.expectile > 0.5
            && self.expectile < 1.0
            && self.beta > 0.0
            && self.lr > 0.0
            && self.batch_size > 0
            && self.target_rate > 0.0
            && self.target_rate <= 1.0
            && self.weight_clip > 0.0
            && self.hidden > 0
            && self.policy_std > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid learner hyperparameters {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IqlLosses {
    pub value: f64,
    pub q: f64,
    pub policy: f64,
}

/// Networks and optimiser state of one IQL run.
#[derive(Clone, Debug, PartialEq)]
pub struct IqlLearner {
    pub method: Method,
    pub hyper: IqlHyper,
    pub gamma: f64,
    pub encoder: Encoder,
    pub value: Mlp,
    pub q1: Mlp,
    pub q2: Mlp,
    pub q1_target: Mlp,
    pub q2_target: Mlp,
    pub policy: Mlp,
    pub opt_value: Adam,
    pub opt_q1: Adam,
    pub opt_q2: Adam,
    pub opt_policy: Adam,
    pub step: u64,
    pub seed: u64,
}

/// Matrices for one minibatch.
struct Batch {
    s: Array2<f64>,
    sa: Array2<f64>,
    next: Array2<f64>,
    actions: Vec<usize>,
    forces: Array2<f64>,
    rewards: Vec<f64>,
    terminal: Vec<bool>,
}

fn col(a: &Array2<f64>) -> Vec<f64> {
    a.column(0).to_vec()
}

fn column_matrix(v: Vec<f64>) -> Array2<f64> {
    let n = v.len();
    Array2::from_shape_vec((n, 1), v).expect("column shape")
}

impl IqlLearner {
    pub fn new(method: Method, encoder: Encoder, gamma: f64, hyper: IqlHyper, seed: u64) -> Result<Self> {
        hyper.validate()?;
        if method == Method::Gcbc {
            return Err(Error::Config("gcbc is not an IQL method".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ds, da, h) = (encoder.state_dim(), encoder.action_dim(), hyper.hidden);
        let value = Mlp::init(&[ds, h, h, 1], Activation::Relu, &mut rng)?;
        let q1 = Mlp::init(&[ds + da, h, h, 1], Activation::Relu, &mut rng)?;
        let q2 = Mlp::init(&[ds + da, h, h, 1], Activation::Relu, &mut rng)?;
        let policy = Mlp::init(&[ds, h, h, da], Activation::Relu, &mut rng)?;
        Ok(IqlLearner {
            method,
            hyper,
            gamma,
            opt_value: Adam::new(value.params.len(), hyper.lr),
            opt_q1: Adam::new(q1.params.len(), hyper.lr),
            opt_q2: Adam::new(q2.params.len(), hyper.lr),
            opt_policy: Adam::new(policy.params.len(), hyper.lr),
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            encoder,
            value,
            q1,
            q2,
            policy,
            step: 0,
            seed,
        })
    }

    fn batch(&self, buffer: &Buffer, indices: &[usize]) -> Result<Batch> {
        if indices.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let (n, ds, da) = (indices.len(), self.encoder.state_dim(), self.encoder.action_dim());
        let mut b = Batch {
            s: Array2::zeros((n, ds)),
            sa: Array2::zeros((n, ds + da)),
            next: Array2::zeros((n, ds)),
            actions: vec![0; n],
            forces: Array2::zeros((n, if self.encoder.is_discrete() { 0 } else { da })),
            rewards: vec![0.0; n],
            terminal: vec![false; n],
        };
        for (row, &i) in indices.iter().enumerate() {
            let smp = buffer.samples.get(i).ok_or(Error::EmptyBatch)?;
            let tr = &smp.tr;
            let s_row = b.s.row_mut(row).into_slice().expect("contiguous row");
            self.encoder.state_into(&tr.state, smp.goal, s_row)?;
            let sa_row = b.sa.row_mut(row).into_slice().expect("contiguous row");
            self.encoder.state_into(&tr.state, smp.goal, &mut sa_row[..ds])?;
            self.encoder.action_into(&tr.action, &mut sa_row[ds..])?;
            let n_row = b.next.row_mut(row).into_slice().expect("contiguous row");
            self.encoder.state_into(&tr.next, smp.goal, n_row)?;
            match tr.action {
                Action::Move(m) => b.actions[row] = m.index(),
                Action::Force(_) => {
                    b.forces.row_mut(row).assign(&ndarray::ArrayView1::from(&sa_row[ds..]));
                }
            }
            b.rewards[row] = tr.reward;
            b.terminal[row] = tr.terminal;
        }
        Ok(b)
    }

    /// One gradient step on each loss: value (expectile against the target
    /// twin-Q minimum), then policy (advantage-weighted with the updated
    /// value), then both Q nets (TD targets from the updated value), then the
    /// target blend. Bootstrapping is cut only at goal-reaching transitions.
    pub fn update(&mut self, buffer: &Buffer, indices: &[usize]) -> Result<IqlLosses> {
        let b = self.batch(buffer, indices)?;
        let h = self.hyper;

        let t1 = self.q1_target.forward(b.sa.view())?;
        let t2 = self.q2_target.forward(b.sa.view())?;
        let q_min: Vec<f64> = t1.iter().zip(t2.iter()).map(|(a, c)| a.min(*c)).collect();

        let v_cache = self.value.forward_cached(b.s.view())?;
        let (value_loss, gv) = expectile(&col(v_cache.output()), &q_min, h.expectile)?;
        let grads = self.value.backward(&v_cache, column_matrix(gv).view())?;
        self.opt_value.step(&mut self.value.params, &grads)?;

        let v_new = col(&self.value.forward(b.s.view())?);
        let weights: Vec<f64> = q_min
            .iter()
            .zip(&v_new)
            .map(|(q, v)| (h.beta * (q - v)).exp().min(h.weight_clip))
            .collect();
        let p_cache = self.policy.forward_cached(b.s.view())?;
        let (policy_loss, gp) = if self.encoder.is_discrete() {
            weighted_cross_entropy(p_cache.output().view(), &b.actions, &weights)?
        } else {
            weighted_gaussian(p_cache.output().view(), b.forces.view(), &weights)?
        };
        let grads = self.policy.backward(&p_cache, gp.view())?;
        self.opt_policy.step(&mut self.policy.params, &grads)?;

        let v_next = col(&self.value.forward(b.next.view())?);
        let targets: Vec<f64> = (0..indices.len())
            .map(|i| {
                let cont = if b.terminal[i] { 0.0 } else { 1.0 };
                b.rewards[i] + self.gamma * cont * v_next[i]
            })
            .collect();
        let mut q_loss = 0.0;
        for (net, opt) in [(&mut self.q1, &mut self.opt_q1), (&mut self.q2, &mut self.opt_q2)] {
            let cache = net.forward_cached(b.sa.view())?;
            let (l, gq) = mse(&col(cache.output()), &targets)?;
            let grads = net.backward(&cache, column_matrix(gq).view())?;
            opt.step(&mut net.params, &grads)?;
            q_loss += 0.5 * l;
        }

        self.q1_target.blend_from(&self.q1, h.target_rate)?;
        self.q2_target.blend_from(&self.q2, h.target_rate)?;
        self.step += 1;

        let losses = IqlLosses {
            value: value_loss,
            q: q_loss,
            policy: policy_loss,
        };
        if !(losses.value.is_finite() && losses.q.is_finite() && losses.policy.is_finite()) {
            return Err(Error::Divergence(format!(
                "non-finite loss at step {}: {losses:?}",
                self.step
            )));
        }
        Ok(losses)
    }

    /// Update on the minibatch determined by `(seed, step)`.
    pub fn train_step(&mut self, buffer: &Buffer) -> Result<IqlLosses> {
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
        let x = self.encoder.state(state, goal)?;
        let out = self.policy.forward(Array2::from_shape_vec((1, x.len()), x).expect("row").view())?;
        action_from_output(out.row(0).as_slice().expect("row"), self.encoder.is_discrete(), mode, self.hyper.policy_std, rng)
    }

    /// `V(s)` for a batch of states.
    pub fn values(&self, states: &[State], goal: Option<[f64; 2]>) -> Result<Vec<f64>> {
        let x = self.encode_states(states, goal)?;
        Ok(col(&self.value.forward(x.view())?))
    }

    /// Greedy policy logits (or force means) for a batch of states.
    pub fn policy_outputs(&self, states: &[State], goal: Option<[f64; 2]>) -> Result<Array2<f64>> {
        let x = self.encode_states(states, goal)?;
        self.policy.forward(x.view())
    }

    /// `min(Q1, Q2)(s, a)` for every state and each of the given actions.
    pub fn q_values(&self, states: &[State], actions: &[Action]) -> Result<Array2<f64>> {
        let (ds, da) = (self.encoder.state_dim(), self.encoder.action_dim());
        let mut x = Array2::zeros((states.len() * actions.len(), ds + da));
        for (i, s) in states.iter().enumerate() {
            for (j, a) in actions.iter().enumerate() {
                let row = x.row_mut(i * actions.len() + j).into_slice().expect("row");
                self.encoder.state_into(s, None, &mut row[..ds])?;
                self.encoder.action_into(a, &mut row[ds..])?;
            }
        }
        let q1 = self.q1.forward(x.view())?;
        let q2 = self.q2.forward(x.view())?;
        let q: Vec<f64> = q1.iter().zip(q2.iter()).map(|(a, b)| a.min(*b)).collect();
        Ok(Array2::from_shape_vec((states.len(), actions.len()), q).expect("q shape"))
    }

    fn encode_states(&self, states: &[State], goal: Option<[f64; 2]>) -> Result<Array2<f64>> {
        let ds = self.encoder.state_dim();
        let mut x = Array2::zeros((states.len(), ds));
        for (i, s) in states.iter().enumerate() {
            self.encoder.state_into(s, goal, x.row_mut(i).into_slice().expect("row"))?;
        }
        Ok(x)
    }

    pub fn is_finite(&self) -> bool {
        [&self.value, &self.q1, &self.q2, &self.q1_target, &self.q2_target, &self.policy]
            .iter()
            .all(|n| n.is_finite())
    }
}

impl Policy for IqlLearner {
    fn act(&self, state: &State, goal: Option<[f64; 2]>, rng: &mut dyn RngCore) -> Result<Action> {
        self.act_with(state, goal, ActMode::Greedy, rng)
    }
}

//! Function approximators and learners: a small dense network with manual
//! gradients, Adam, IQL, goal-conditioned behavioral cloning and tabular
//! value iteration.

mod buffer;
mod checkpoint;
mod encode;
mod gcbc;
mod iql;
pub mod losses;
mod net;
mod policy;
mod tabular;

pub use buffer::{Buffer, Sample};
pub use checkpoint::Learner;
pub use encode::{move_action, Encoder};
pub use gcbc::GcbcLearner;
pub use iql::{IqlHyper, IqlLearner, IqlLosses, Method};
pub use net::{Activation, Adam, Cache, Mlp};
pub use policy::{action_from_output, argmax, ActMode};
pub use tabular::{value_iteration, TabularPlan};

use rand::RngCore;

use crate::env::{Action, State};
use crate::error::Result;

/// Anything that maps a state to an action.
pub trait Policy: Sync {
    /// `goal` is the episode goal point for maze tasks.
    fn act(&self, state: &State, goal: Option<[f64; 2]>, rng: &mut dyn RngCore) -> Result<Action>;
}

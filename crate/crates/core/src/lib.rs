//! Offline goal-conditioned reinforcement learning with subgoal temporal-order
//! reward shaping.
//!
//! The pipeline: an LLM (or a bundled fixture) decomposes a task into an
//! ordered list of subgoals and assigns every map cell a progress index;
//! the offline dataset's sparse rewards are replaced by a time-indexed
//! potential-based shaped reward; an offline learner (IQL) is trained on the
//! result.

pub mod cli;
pub mod env;
pub mod error;
pub mod harness;
pub mod learner;
pub mod planner;
pub mod shaping;

pub use error::{Error, Result};

//! Subgoal planning: prompt construction, LLM or fixture responses, parsing
//! and validation into a total cell → progress-index map.

mod client;
pub mod fixtures;
mod parse;
mod prompt;
mod schedule;

pub use client::{fetch_plan, EndpointConfig, PlannerMode, PlannerResponse};
pub use parse::{parse_response, render_response};
pub use prompt::{build_prompt, build_prompt_for, default_map, PromptRequest};
pub use schedule::{validate_schedule, Provenance, Subgoal, SubgoalSchedule, ValidationReport};

use crate::env::{Env, TaskId};
use crate::error::{Error, Result};

/// Parses and validates the bundled response for `task`.
pub fn fixture_schedule(task: TaskId) -> Result<SubgoalSchedule> {
    let raw = parse_response(task, fixtures::response(task))?;
    let env = Env::for_task(task);
    let report = validate_schedule(&raw, env.layout());
    match report.schedule {
        Some(ref s) if report.accepted() => Ok(s.clone()),
        _ => Err(Error::Precondition(format!("fixture rejected: {}", report.summary()))),
    }
}

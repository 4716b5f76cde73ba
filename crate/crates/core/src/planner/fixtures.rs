//! Bundled planner responses, one per task plus two imperfect Medium
//! decompositions that send the agent into a dead end.

use crate::env::TaskId;

pub const CLIFF_WALKING: &str = include_str!("../../fixtures/cliffwalking.txt");
pub const UMAZE: &str = include_str!("../../fixtures/umaze.txt");
pub const FOUR_ROOM: &str = include_str!("../../fixtures/fourroom.txt");
pub const MEDIUM: &str = include_str!("../../fixtures/medium.txt");
pub const MEDIUM_ALT1: &str = include_str!("../../fixtures/medium_alt1.txt");
pub const MEDIUM_ALT2: &str = include_str!("../../fixtures/medium_alt2.txt");

/// Default response for a task.
pub fn response(task: TaskId) -> &'static str {
    match task {
        TaskId::CliffWalking => CLIFF_WALKING,
        TaskId::FourRoom => FOUR_ROOM,
        TaskId::UMaze => UMAZE,
        TaskId::Medium => MEDIUM,
    }
}

/// Every bundled response with its task and a short label.
pub fn all() -> [(TaskId, &'static str, &'static str); 6] {
    [
        (TaskId::CliffWalking, "cliffwalking", CLIFF_WALKING),
        (TaskId::UMaze, "umaze", UMAZE),
        (TaskId::FourRoom, "fourroom", FOUR_ROOM),
        (TaskId::Medium, "medium", MEDIUM),
        (TaskId::Medium, "medium-alt1", MEDIUM_ALT1),
        (TaskId::Medium, "medium-alt2", MEDIUM_ALT2),
    ]
}

use crate::env::{Layout, TaskId, MEDIUM_MAZE, U_MAZE};
use crate::error::Result;

const RESPONSE_FORMAT: &str = "\
Your response should be like:
{ SubTask 1: ‘Move to place’, containing states: “(1, 1), (1, 2),……”
,……,
‘SubTask N: ‘Move to goal’, containing states:”……”
}";

const HINTS: &str = "\
(Hint: the subtask sequence should cover all states in the maze map EXCEPT the walls)
(Hint: Each state can only be assigned to one sub-task)";

const LEGEND: &str =
    "Where ‘r’ is the Start State, ‘g’ is the Goal State, ‘1’ are walls and ‘0’ are paths where the agent can move.";

const FOUR_ROOM_MAP: &str = "\
r 0 0 0 0 1 0 0 0 0 0
0 0 0 0 0 1 0 0 0 0 0
0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 0 1 0 0 0 0 0
0 0 0 0 0 1 0 0 0 0 0
1 1 0 1 1 1 1 1 0 1 1
0 0 0 0 0 1 0 0 0 0 0
0 0 0 0 0 1 0 0 0 0 0
0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 0 1 0 0 0 0 0
0 0 0 0 0 1 0 0 0 0 g
";

/// The three parts of a planner prompt: task instruction, environment
/// description and the expected response skeleton (with hints).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptRequest {
    pub task: TaskId,
    pub instruction: String,
    pub map_block: String,
    pub response_format: String,
}

impl PromptRequest {
    pub fn text(&self) -> String {
        format!(
            "{}\n\n{}\n\n{}\n\n{}\n",
            self.instruction, self.map_block, self.response_format, HINTS
        )
    }
}

/// Default map matrix for a task, in the `{0,1,r,g}` alphabet.
pub fn default_map(task: TaskId) -> Option<&'static str> {
    match task {
        TaskId::CliffWalking => None,
        TaskId::FourRoom => Some(FOUR_ROOM_MAP),
        TaskId::UMaze => Some(U_MAZE),
        TaskId::Medium => Some(MEDIUM_MAZE),
    }
}

fn matrix_block(name: &str, map: &str) -> Result<String> {
    let layout = Layout::parse(map)?;
    Ok(format!("{name} =\n{}\n{LEGEND}", layout.render().trim_end()))
}

/// Builds the subgoal-decomposition prompt for `task`. `map` overrides the
/// task's default matrix; CliffWalking is described in words and ignores it.
pub fn build_prompt(task: TaskId, map: Option<&str>) -> Result<PromptRequest> {
    let map = map.or(default_map(task));
    let (instruction, map_block) = match task {
        TaskId::CliffWalking => (
            "You need to establish an ordered sub-task sequence for a CliffWalking Task, crossing a gridworld from Start State to Goal State while avoiding falling off a cliff. The map of maze is listed below:".to_string(),
            "The environment is a the 4x12 grid world.\n\
             The game starts with the player at location [3, 0].\n\
             The goal located at [3, 11].\n\
             A cliff runs along [3, 1..10]."
                .to_string(),
        ),
        TaskId::FourRoom => (
            "You need to establish an ordered sub-task sequence for a FourRoom Task to navigate from Start State to Goal State. The map of FourRoom is listed below:".to_string(),
            matrix_block("FOUR_ROOM", map.unwrap_or(FOUR_ROOM_MAP))?,
        ),
        TaskId::UMaze => (
            "You need to establish an ordered sub-task sequence for a Maze Navigation Task from Start State to Goal State. The map of maze is listed below:".to_string(),
            matrix_block("U_MAZE", map.unwrap_or(U_MAZE))?,
        ),
        TaskId::Medium => (
            "You need to establish an ordered sub-task sequence for a Maze Navigation Task from Start State to Goal State. The map of maze is listed below:".to_string(),
            matrix_block("MEDIUM_MAZE", map.unwrap_or(MEDIUM_MAZE))?,
        ),
    };
    Ok(PromptRequest {
        task,
        instruction,
        map_block,
        response_format: RESPONSE_FORMAT.to_string(),
    })
}

/// Parses a task id and builds its prompt.
pub fn build_prompt_for(task_id: &str, map: Option<&str>) -> Result<PromptRequest> {
    build_prompt(task_id.parse()?, map)
}

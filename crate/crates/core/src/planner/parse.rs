use crate::env::{Cell, TaskId};
use crate::error::{Error, Result};
use crate::planner::schedule::{Provenance, Subgoal, SubgoalSchedule};

const HEADER: &str = "SubTask";

fn closing_quote(open: char) -> Option<char> {
    match open {
        '\'' => Some('\''),
        '"' => Some('"'),
        '‘' => Some('’'),
        '“' => Some('”'),
        '’' => Some('’'),
        '”' => Some('”'),
        _ => None,
    }
}

/// Splits `SubTask n: 'name', rest` into `(name, rest)`.
fn split_header(segment: &str) -> (String, &str) {
    let after_num = segment
        .trim_start()
        .trim_start_matches(|c: char| c.is_ascii_digit())
        .trim_start();
    let body = after_num.strip_prefix(':').unwrap_or(after_num).trim_start();
    let mut chars = body.char_indices();
    if let Some((_, open)) = chars.next() {
        if let Some(close) = closing_quote(open) {
            let start = open.len_utf8();
            if let Some(end) = body[start..].find(close) {
                let name = body[start..start + end].trim().to_string();
                return (name, &body[start + end + close.len_utf8()..]);
            }
        }
    }
    match body.find(',') {
        Some(i) => (body[..i].trim().to_string(), &body[i + 1..]),
        None => (body.trim().to_string(), ""),
    }
}

fn parse_pair(token: &str) -> Option<Cell> {
    let inner = token.strip_prefix('(')?.strip_suffix(')')?;
    let (r, c) = inner.split_once(',')?;
    Some(Cell::new(r.trim().parse().ok()?, c.trim().parse().ok()?))
}

/// Collects every `(row, col)` pair in `text`.
fn scan_cells(text: &str, line: usize, out: &mut Vec<Cell>) -> Result<()> {
    let mut rest = text;
    while let Some(open) = rest.find('(') {
        let tail = &rest[open..];
        let close = tail.find(')').ok_or_else(|| Error::MalformedCoordinate {
            line,
            token: tail.trim_end().to_string(),
        })?;
        let token = &tail[..=close];
        let cell = parse_pair(token).ok_or_else(|| Error::MalformedCoordinate {
            line,
            token: token.to_string(),
        })?;
        out.push(cell);
        rest = &tail[close + 1..];
    }
    Ok(())
}

/// Extracts `SubTask n: '<name>', containing states: (r,c), ...` entries
/// from a planner response, in listing order.
///
/// Lines whose first non-blank character is `#` are comments. Coordinates
/// are taken literally; range shorthand is not expanded. A cell listed twice
/// within one subtask is kept once.
pub fn parse_response(task: TaskId, text: &str) -> Result<SubgoalSchedule> {
    let mut subgoals: Vec<Subgoal> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut pieces = line.split(HEADER);
        let before = pieces.next().unwrap_or("");
        if let Some(current) = subgoals.last_mut() {
            scan_cells(before, lineno, &mut current.cells)?;
        }
        for segment in pieces {
            let (name, rest) = split_header(segment);
            let mut sg = Subgoal {
                name,
                cells: Vec::new(),
            };
            scan_cells(rest, lineno, &mut sg.cells)?;
            subgoals.push(sg);
        }
    }
    if subgoals.is_empty() {
        return Err(Error::NoSubtasks);
    }
    for sg in &mut subgoals {
        let mut seen = std::collections::BTreeSet::new();
        sg.cells.retain(|c| seen.insert(*c));
    }
    Ok(SubgoalSchedule::new(task, subgoals, Provenance::Fixture))
}

/// Writes a schedule back in the response shape accepted by
/// [`parse_response`].
pub fn render_response(schedule: &SubgoalSchedule) -> String {
    let mut out = String::from("{\n");
    for (i, sg) in schedule.subgoals.iter().enumerate() {
        let cells: Vec<String> = sg.cells.iter().map(|c| format!("({}, {})", c.row, c.col)).collect();
        let sep = if i + 1 == schedule.subgoals.len() { "" } else { "," };
        out.push_str(&format!(
            "SubTask {}: '{}', containing states: \"{}\"{sep}\n",
            i + 1,
            sg.name,
            cells.join(", ")
        ));
    }
    out.push_str("}\n");
    out
}

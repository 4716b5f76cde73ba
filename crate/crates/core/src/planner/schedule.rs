use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{Cell, Layout, State, TaskId};
use crate::error::{Error, Result};
use crate::harness::sha256_hex;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgoal {
    pub name: String,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Fixture,
    Llm { model: String, timestamp: u64 },
}

/// Ordered subgoals plus the map `h` from cells to 1-based progress indices.
///
/// `h` is built from the subgoal cell lists; a cell listed under several
/// subgoals maps to the earliest one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgoalSchedule {
    pub task: TaskId,
    pub subgoals: Vec<Subgoal>,
    pub provenance: Provenance,
    index: BTreeMap<Cell, usize>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    version: u32,
    task: TaskId,
    k: usize,
    provenance: Provenance,
    subgoals: Vec<SubgoalRecord>,
}

#[derive(Serialize, Deserialize)]
struct SubgoalRecord {
    name: String,
    cells: Vec<[usize; 2]>,
}

impl SubgoalSchedule {
    pub fn new(task: TaskId, subgoals: Vec<Subgoal>, provenance: Provenance) -> Self {
        let mut index = BTreeMap::new();
        for (i, sg) in subgoals.iter().enumerate() {
            for &c in &sg.cells {
                index.entry(c).or_insert(i + 1);
            }
        }
        SubgoalSchedule {
            task,
            subgoals,
            provenance,
            index,
        }
    }

    /// Number of subgoals `K`.
    pub fn k(&self) -> usize {
        self.subgoals.len()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn index_of(&self, cell: Cell) -> Option<usize> {
        self.index.get(&cell).copied()
    }

    /// Progress index of a state. Continuous positions are floored to their
    /// unit cell; velocities are ignored.
    pub fn progress_index(&self, state: &State) -> Result<usize> {
        let cell = state
            .cell()
            .ok_or_else(|| Error::OutsideMap(format!("state {state} has no cell")))?;
        self.index_of(cell)
            .ok_or_else(|| Error::OutsideMap(format!("cell {cell} has no progress index")))
    }

    pub fn to_text(&self) -> String {
        let file = ScheduleFile {
            version: 1,
            task: self.task,
            k: self.k(),
            provenance: self.provenance.clone(),
            subgoals: self
                .subgoals
                .iter()
                .map(|sg| SubgoalRecord {
                    name: sg.name.clone(),
                    cells: sg.cells.iter().map(|c| [c.row, c.col]).collect(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("schedule serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let file: ScheduleFile =
            toml::from_str(text).map_err(|e| Error::format(format!("schedule: {e}")))?;
        if file.version != 1 {
            return Err(Error::format(format!(
                "unsupported schedule version {}",
                file.version
            )));
        }
        if file.k != file.subgoals.len() {
            return Err(Error::format(format!(
                "schedule declares K={} but lists {} subgoals",
                file.k,
                file.subgoals.len()
            )));
        }
        let subgoals = file
            .subgoals
            .into_iter()
            .map(|r| Subgoal {
                name: r.name,
                cells: r.cells.into_iter().map(|[r, c]| Cell::new(r, c)).collect(),
            })
            .collect();
        Ok(SubgoalSchedule::new(file.task, subgoals, file.provenance))
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.to_text().as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Outcome of checking a schedule against a map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// State cells no subgoal lists; repaired by inheritance.
    pub uncovered: Vec<Cell>,
    /// Cells listed under more than one subgoal, with every 1-based index
    /// that claimed them; the earliest wins.
    pub duplicates: Vec<(Cell, Vec<usize>)>,
    /// Listed cells that are walls, hazards or off the map; dropped.
    pub invalid_cells: Vec<Cell>,
    pub start_index: Option<usize>,
    pub goal_index: Option<usize>,
    /// Repaired schedule, present iff `h(start) = 1` and `h(goal) = K`.
    pub schedule: Option<SubgoalSchedule>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.schedule.is_some()
    }

    pub fn summary(&self) -> String {
        let cells = |v: &[Cell]| v.iter().map(Cell::to_string).collect::<Vec<_>>().join(" ");
        let dups: Vec<String> = self
            .duplicates
            .iter()
            .map(|(c, ks)| format!("{c} in {ks:?}"))
            .collect();
        format!(
            "accepted={} uncovered=[{}] duplicates=[{}] invalid=[{}] h(start)={:?} h(goal)={:?}",
            self.accepted(),
            cells(&self.uncovered),
            dups.join(", "),
            cells(&self.invalid_cells),
            self.start_index,
            self.goal_index
        )
    }
}

/// Checks coverage, uniqueness and the start/goal index conditions, and
/// repairs what can be repaired.
///
/// Wall and hazard cells are dropped; a duplicated cell stays with its
/// earliest subgoal; an uncovered cell inherits the index of the nearest
/// covered cell by Manhattan distance, preferring the smaller index on ties.
/// The schedule is accepted iff, after repair, the start maps to 1 and the
/// goal maps to `K`.
pub fn validate_schedule(schedule: &SubgoalSchedule, layout: &Layout) -> ValidationReport {
    let k = schedule.k();
    let mut claims: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
    let mut invalid = Vec::new();
    for (i, sg) in schedule.subgoals.iter().enumerate() {
        for &c in &sg.cells {
            if layout.is_state(c) {
                let ks = claims.entry(c).or_default();
                if !ks.contains(&(i + 1)) {
                    ks.push(i + 1);
                }
            } else if !invalid.contains(&c) {
                invalid.push(c);
            }
        }
    }
    let duplicates: Vec<(Cell, Vec<usize>)> = claims
        .iter()
        .filter(|(_, ks)| ks.len() > 1)
        .map(|(c, ks)| (*c, ks.clone()))
        .collect();

    let covered: BTreeMap<Cell, usize> = claims.iter().map(|(c, ks)| (*c, ks[0])).collect();
    let uncovered: Vec<Cell> = layout
        .states()
        .into_iter()
        .filter(|c| !covered.contains_key(c))
        .collect();

    let mut assignment = covered.clone();
    if !covered.is_empty() {
        for &c in &uncovered {
            let inherited = covered
                .iter()
                .map(|(cc, kk)| (cc.manhattan(c), *kk))
                .min()
                .map(|(_, kk)| kk)
                .expect("non-empty");
            assignment.insert(c, inherited);
        }
    }

    // Rebuild the cell lists: keep listing order for first claims, then
    // append inherited cells in row-major order.
    let mut subgoals: Vec<Subgoal> = schedule
        .subgoals
        .iter()
        .map(|sg| Subgoal {
            name: sg.name.clone(),
            cells: Vec::new(),
        })
        .collect();
    for (i, sg) in schedule.subgoals.iter().enumerate() {
        for &c in &sg.cells {
            if covered.get(&c) == Some(&(i + 1)) && !subgoals[i].cells.contains(&c) {
                subgoals[i].cells.push(c);
            }
        }
    }
    for &c in &uncovered {
        if let Some(&kk) = assignment.get(&c) {
            subgoals[kk - 1].cells.push(c);
        }
    }

    let start_index = assignment.get(&layout.start).copied();
    let goal_index = assignment.get(&layout.goal).copied();
    let ok = k >= 1 && start_index == Some(1) && goal_index == Some(k);
    ValidationReport {
        uncovered,
        duplicates,
        invalid_cells: invalid,
        start_index,
        goal_index,
        schedule: ok.then(|| {
            SubgoalSchedule::new(schedule.task, subgoals, schedule.provenance.clone())
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GridSpec, KinematicState, MazeSpec};
    use crate::planner::{fixtures, parse_response};

    fn cliff() -> SubgoalSchedule {
        parse_response(TaskId::CliffWalking, fixtures::CLIFF_WALKING).unwrap()
    }

    #[test]
    fn cliff_fixture_duplicate_resolves_to_earlier_subtask() {
        let spec = GridSpec::cliff_walking();
        let report = validate_schedule(&cliff(), &spec.layout);
        assert!(report.accepted(), "{}", report.summary());
        assert_eq!(report.duplicates, vec![(Cell::new(2, 0), vec![1, 2])]);
        assert!(report.uncovered.is_empty());
        let s = report.schedule.unwrap();
        assert_eq!(s.index_of(Cell::new(2, 0)), Some(1));
        assert!(!s.subgoals[1].cells.contains(&Cell::new(2, 0)));
    }

    #[test]
    fn cliff_progress_indices() {
        let s = validate_schedule(&cliff(), &GridSpec::cliff_walking().layout)
            .schedule
            .unwrap();
        let h = |r, c| s.progress_index(&State::Grid(Cell::new(r, c))).unwrap();
        assert_eq!(h(3, 0), 1);
        assert_eq!(h(3, 11), 4);
        assert_eq!(h(2, 11), 3);
        assert!(s.progress_index(&State::Grid(Cell::new(3, 5))).is_err());
    }

    #[test]
    fn missing_cell_inherits_nearest_index() {
        let mut s = cliff();
        s.subgoals[1].cells.retain(|c| *c != Cell::new(0, 0));
        let s = SubgoalSchedule::new(s.task, s.subgoals, s.provenance);
        let report = validate_schedule(&s, &GridSpec::cliff_walking().layout);
        assert_eq!(report.uncovered, vec![Cell::new(0, 0)]);
        let repaired = report.schedule.unwrap();
        // Neighbours (0,1) and (1,0) are both in subtask 2.
        assert_eq!(repaired.index_of(Cell::new(0, 0)), Some(2));
    }

    #[test]
    fn inheritance_ties_prefer_smaller_index() {
        let layout = Layout::parse("r 0 0\n0 0 g").unwrap();
        let s = SubgoalSchedule::new(
            TaskId::UMaze,
            vec![
                Subgoal { name: "a".into(), cells: vec![Cell::new(0, 0)] },
                Subgoal { name: "b".into(), cells: vec![Cell::new(1, 1)] },
                Subgoal { name: "c".into(), cells: vec![Cell::new(1, 2)] },
            ],
            Provenance::Fixture,
        );
        let report = validate_schedule(&s, &layout);
        let r = report.schedule.unwrap();
        // (0,1) is one step from both (0,0)[1] and (1,1)[2].
        assert_eq!(r.index_of(Cell::new(0, 1)), Some(1));
        // (0,2) is one step from (1,2)[3] and two from the others.
        assert_eq!(r.index_of(Cell::new(0, 2)), Some(3));
    }

    #[test]
    fn goal_not_last_is_rejected() {
        let mut s = cliff();
        s.subgoals.swap(2, 3);
        let s = SubgoalSchedule::new(s.task, s.subgoals, s.provenance);
        let report = validate_schedule(&s, &GridSpec::cliff_walking().layout);
        assert!(!report.accepted());
        assert_eq!(report.goal_index, Some(3));
    }

    #[test]
    fn wall_cells_are_dropped() {
        let mut s = parse_response(TaskId::UMaze, fixtures::UMAZE).unwrap();
        s.subgoals[0].cells.push(Cell::new(0, 0));
        let s = SubgoalSchedule::new(s.task, s.subgoals, s.provenance);
        let report = validate_schedule(&s, &MazeSpec::umaze().layout);
        assert_eq!(report.invalid_cells, vec![Cell::new(0, 0)]);
        let r = report.schedule.unwrap();
        assert_eq!(r.index_of(Cell::new(0, 0)), None);
    }

    #[test]
    fn continuous_states_are_floored() {
        let s = validate_schedule(
            &parse_response(TaskId::UMaze, fixtures::UMAZE).unwrap(),
            &MazeSpec::umaze().layout,
        )
        .schedule
        .unwrap();
        let st = State::Point(KinematicState { x: 3.2, y: 2.9, vx: 1.0, vy: -1.0 });
        assert_eq!(s.progress_index(&st).unwrap(), 2);
        let outside = State::Point(KinematicState::at_rest(-0.5, 1.0));
        assert!(s.progress_index(&outside).is_err());
    }

    #[test]
    fn schedule_file_round_trips_bit_exact() {
        let s = cliff().with_provenance(Provenance::Llm {
            model: "some-model".into(),
            timestamp: 1_700_000_000,
        });
        let text = s.to_text();
        let back = SubgoalSchedule::from_text(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_text(), text);
    }
}

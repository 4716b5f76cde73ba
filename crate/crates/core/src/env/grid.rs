use std::collections::BTreeSet;

use crate::env::layout::{Cell, Layout, Move};
use crate::error::{Error, Result};

/// Static description of a discrete goal-reaching grid world.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub layout: Layout,
    pub horizon: usize,
    pub gamma: f64,
}

/// Result of one grid move.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOutcome {
    pub next: Cell,
    pub reward: f64,
    pub done: bool,
}

impl GridSpec {
    /// 4×12 CliffWalking: start (3,0), goal (3,11), cliff along (3,1..=10).
    pub fn cliff_walking() -> GridSpec {
        let hazards: BTreeSet<Cell> = (1..=10).map(|c| Cell::new(3, c)).collect();
        GridSpec {
            layout: Layout {
                height: 4,
                width: 12,
                walls: BTreeSet::new(),
                hazards,
                start: Cell::new(3, 0),
                goal: Cell::new(3, 11),
            },
            horizon: 100,
            gamma: 0.99,
        }
    }

    /// 11×11 FourRoom: walls along row 5 and column 5 with doorways at
    /// (5,2), (5,8), (2,5) and (8,5).
    pub fn four_room() -> GridSpec {
        let gaps = [Cell::new(5, 2), Cell::new(5, 8), Cell::new(2, 5), Cell::new(8, 5)];
        let walls: BTreeSet<Cell> = (0..11)
            .flat_map(|i| [Cell::new(5, i), Cell::new(i, 5)])
            .filter(|c| !gaps.contains(c))
            .collect();
        GridSpec {
            layout: Layout {
                height: 11,
                width: 11,
                walls,
                hazards: BTreeSet::new(),
                start: Cell::new(0, 0),
                goal: Cell::new(10, 10),
            },
            horizon: 100,
            gamma: 0.99,
        }
    }

    pub fn from_layout(layout: Layout, horizon: usize, gamma: f64) -> Result<GridSpec> {
        for cell in [layout.start, layout.goal] {
            if !layout.is_state(cell) {
                return Err(Error::InvalidArgument(format!(
                    "start/goal {cell} must be a free cell"
                )));
            }
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma {gamma} not in (0,1)")));
        }
        Ok(GridSpec {
            layout,
            horizon,
            gamma,
        })
    }

    /// Deterministic transition with sparse goal reward.
    ///
    /// Blocked moves (walls, grid edge) leave the agent in place. Entering a
    /// hazard sends it back to the start with zero reward.
    pub fn step(&self, state: Cell, mv: Move) -> Result<GridOutcome> {
        let layout = &self.layout;
        if !layout.in_bounds(state) {
            return Err(Error::OutsideMap(format!("{state} outside grid")));
        }
        if layout.is_wall(state) {
            return Err(Error::InvalidState {
                row: state.row,
                col: state.col,
            });
        }
        let next = match layout.offset(state, mv) {
            Some(n) if !layout.is_wall(n) => n,
            _ => state,
        };
        let next = if layout.hazards.contains(&next) {
            layout.start
        } else {
            next
        };
        let done = next == layout.goal;
        Ok(GridOutcome {
            next,
            reward: if done { 1.0 } else { 0.0 },
            done,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cliff_step_resets_to_start() {
        let spec = GridSpec::cliff_walking();
        let out = spec.step(Cell::new(3, 0), Move::Right).unwrap();
        assert_eq!(out.next, Cell::new(3, 0));
        assert_eq!(out.reward, 0.0);
        assert!(!out.done);
    }

    #[test]
    fn goal_step_pays_one() {
        let spec = GridSpec::cliff_walking();
        let out = spec.step(Cell::new(2, 11), Move::Down).unwrap();
        assert_eq!(out.next, Cell::new(3, 11));
        assert_eq!(out.reward, 1.0);
        assert!(out.done);
    }

    #[test]
    fn blocked_moves_are_self_transitions() {
        let spec = GridSpec::four_room();
        let out = spec.step(Cell::new(0, 4), Move::Right).unwrap();
        assert_eq!(out.next, Cell::new(0, 4));
        assert_eq!(out.reward, 0.0);
        let edge = spec.step(Cell::new(0, 0), Move::Up).unwrap();
        assert_eq!(edge.next, Cell::new(0, 0));
    }

    #[test]
    fn wall_state_is_rejected() {
        let spec = GridSpec::four_room();
        assert!(matches!(
            spec.step(Cell::new(0, 5), Move::Left),
            Err(Error::InvalidState { row: 0, col: 5 })
        ));
    }

    #[test]
    fn four_room_has_104_connected_states() {
        let spec = GridSpec::four_room();
        let states = spec.layout.states();
        assert_eq!(states.len(), 104);
        let dist = spec.layout.bfs_distances(spec.layout.start);
        assert!(states
            .iter()
            .all(|c| dist[spec.layout.flat_index(*c)].is_some()));
    }

    #[test]
    fn reward_is_one_exactly_at_goal() {
        for spec in [GridSpec::cliff_walking(), GridSpec::four_room()] {
            for s in spec.layout.states() {
                if s == spec.layout.goal {
                    continue;
                }
                for mv in Move::ALL {
                    let out = spec.step(s, mv).unwrap();
                    assert_eq!(out.reward == 1.0, out.next == spec.layout.goal);
                    assert!(out.reward == 0.0 || out.reward == 1.0);
                    assert_eq!(out, spec.step(s, mv).unwrap());
                }
            }
        }
    }
}

use std::fmt::Write as _;

use crate::env::{Action, GridSpec, Move, State};
use crate::error::Result;
use crate::learner::{argmax, IqlLearner};

#[derive(Clone, Debug, PartialEq)]
pub enum MapCell {
    Wall,
    Hazard,
    Goal,
    Free { value: f64, arrow: Move, start: bool },
}

/// Per-cell `V(s)` and `argmax_a Q(s, a)` of a learned grid agent.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueMap {
    pub height: usize,
    pub width: usize,
    pub cells: Vec<MapCell>,
}

impl ValueMap {
    pub fn get(&self, row: usize, col: usize) -> &MapCell {
        &self.cells[row * self.width + col]
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        match self.get(row, col) {
            MapCell::Free { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// Comma-delimited grid: `W` wall, `H` hazard, `G` goal, otherwise
    /// `value arrow`, prefixed by `S ` at the start cell.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.height {
            let row: Vec<String> = (0..self.width)
                .map(|c| match self.get(r, c) {
                    MapCell::Wall => "W".to_string(),
                    MapCell::Hazard => "H".to_string(),
                    MapCell::Goal => "G".to_string(),
                    MapCell::Free { value, arrow, start } => {
                        format!("{}{value:.6} {}", if *start { "S " } else { "" }, arrow.arrow())
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

pub fn export_value_map(learner: &IqlLearner, spec: &GridSpec) -> Result<ValueMap> {
    let layout = &spec.layout;
    let cells = layout.states();
    let states: Vec<State> = cells.iter().map(|c| State::Grid(*c)).collect();
    let values = learner.values(&states, None)?;
    let actions: Vec<Action> = Move::ALL.iter().map(|m| Action::Move(*m)).collect();
    let q = learner.q_values(&states, &actions)?;
    let mut map = ValueMap {
        height: layout.height,
        width: layout.width,
        cells: (0..layout.cell_count())
            .map(|i| {
                let cell = crate::env::Cell::new(i / layout.width, i % layout.width);
                if layout.is_wall(cell) {
                    MapCell::Wall
                } else {
                    MapCell::Hazard
                }
            })
            .collect(),
    };
    for (i, cell) in cells.iter().enumerate() {
        let idx = layout.flat_index(*cell);
        map.cells[idx] = if *cell == layout.goal {
            MapCell::Goal
        } else {
            MapCell::Free {
                value: values[i],
                arrow: Move::ALL[argmax(q.row(i).as_slice().expect("row"))],
                start: *cell == layout.start,
            }
        };
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Env, TaskId};
    use crate::learner::{Encoder, IqlHyper, Method};

    #[test]
    fn zero_net_gives_zero_map() {
        let env = Env::for_task(TaskId::FourRoom);
        let Env::Grid(spec) = &env else { unreachable!() };
        let hyper = IqlHyper {
            hidden: 8,
            ..IqlHyper::default()
        };
        let mut l = IqlLearner::new(Method::Iql, Encoder::for_env(&env), 0.99, hyper, 0).unwrap();
        for net in [&mut l.value, &mut l.q1, &mut l.q2] {
            net.params.iter_mut().for_each(|p| *p = 0.0);
        }
        let map = export_value_map(&l, spec).unwrap();
        assert_eq!(*map.get(0, 5), MapCell::Wall);
        assert_eq!(*map.get(10, 10), MapCell::Goal);
        for r in 0..11 {
            for c in 0..11 {
                if let Some(v) = map.value(r, c) {
                    assert_eq!(v, 0.0);
                }
            }
        }
        let text = map.to_text();
        assert_eq!(text.lines().count(), 11);
        assert!(text.starts_with("S 0.000000 ^,"));
        assert_eq!(text.lines().next().unwrap().split(',').nth(5), Some("W"));
    }
}

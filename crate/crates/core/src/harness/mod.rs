//! Dataset generation, evaluation rollouts, learning curves and value-map
//! exports.

mod curve;
mod dataset;
mod eval;
mod expert;
mod generate;
mod train;
mod value_map;

pub use curve::{curve_csv, iterations_to_convergence, smooth_curve, CurvePoint};
pub use dataset::{sha256_hex, Dataset, DatasetStats, ShapingHeader};
pub use eval::{evaluate, evaluate_learner, ActionTable, EvalReport};
pub use expert::WaypointExpert;
pub use generate::{episode_rng, generate_dataset, rollout};
pub use train::{train_with_curve, EvalSchedule, TrainOutcome};
pub use value_map::{export_value_map, MapCell, ValueMap};

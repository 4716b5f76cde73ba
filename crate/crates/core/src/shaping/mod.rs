//! Temporal-order potential, shaped rewards, dataset augmentation and
//! numerical checks of the shaping guarantees.

mod augment;
mod potential;
mod sweep;
mod theorems;

pub use augment::{augment_dataset, ShapedDataset, ShapedTrajectory, ShapedTransition};
pub use potential::{is_positive_progress, potential, shaped_reward, shaping_term, ShapingParams};
pub use theorems::{
    check_successful, check_theorem1, check_theorem2, check_theorem3, telescoped_return,
    trajectory_return, IndexConvention, ProgressStep,
};
pub use sweep::{
    run_sweeps, sweep_lemma1, sweep_telescoping, sweep_theorem1, sweep_theorem2, sweep_theorem3,
    synthetic_arbitrary, synthetic_successful, CheckResult, SweepConfig,
};

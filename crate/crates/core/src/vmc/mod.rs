//! Variational Monte Carlo: local energies, estimators, ADAM and the
//! training loop.

mod adam;
mod estimate;
mod local;
mod train;

pub use adam::{AdamConstants, OptimizerState};
pub use estimate::{estimate_energy, estimate_gradient, estimate_gradient_weighted, smoothed_final_energy, FINAL_WINDOW};
pub use local::{default_group, local_energy, LocalEnergy, Evaluation};
pub use train::{lr_at, train, train_from, train_with_observer, Control, StepRecord, TrainConfig, TrainOutcome, Trainer, DECAY_INTERVAL};

//! Losses, backpropagation, optimizers and the training loop.

mod backprop;
mod gradcheck;
mod grid;
mod loss;
mod optim;
mod trainer;

pub use backprop::{backprop, loss_value, GradientSet, RecursionGrad};
pub use gradcheck::{
    grad_check, grad_check_with_fault, max_relative_deviation, numeric_gradient, GradCheckReport, RELATIVE_FLOOR,
};
pub use grid::{grid_search, rank, GridResult, GridRow};
pub use loss::{loss_mse, loss_ortho_penalty, loss_qtv, LossKind, LossSpec};
pub use optim::{sgd_step, stiefel_step, AdamState, Optimizer};
pub use trainer::{
    checkpoint_manifest_path, load_checkpoint, mean_loss, parse_indices, parse_pairs, resume, save_checkpoint, train,
    EpochRecord, History, TrainConfig, TrainOutcome,
};

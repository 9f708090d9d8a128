//! Default training setups for each table.

use crate::lab::TableId;
use crate::model::{ModelShape, DEFAULT_RECURSIONS};
use crate::train::{LossSpec, Optimizer, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub table: TableId,
    /// Seed for generating the training table.
    pub dataset_seed: u64,
    pub shape: ModelShape,
    pub spec: LossSpec,
    pub cfg: TrainConfig,
}

/// Architecture, loss and optimizer settings used to train the model for `table`.
///
/// All recipes use Adam and long first-layer filters: the default 33-tap
/// filters cannot see a full period of the slower test signals.
pub fn recipe(table: TableId) -> Recipe {
    let blocks = table.label_count();
    // (k1, k2, epochs, lr halving)
    let (k1, k2, epochs, lr_halving) = match table {
        TableId::T2 => (257, 257, 40, true),
        // A narrow second filter lets the subtracted average carry noise.
        TableId::T6 => (257, 9, 150, false),
        TableId::T8 | TableId::T10 => (257, 257, 150, false),
        TableId::T12 => (257, 33, 300, false),
    };
    let spec = match table {
        TableId::T12 => LossSpec::ortho_penalty(0.1, vec![(0, 1)]),
        _ => LossSpec::mse(),
    };
    let cfg = TrainConfig {
        lr: 1e-3,
        lr_ortho: 1e-3,
        epochs,
        batch: 16,
        seed: 2024,
        lr_halving,
        patience: if lr_halving { 20 } else { epochs },
        optimizer: Optimizer::Adam,
        ..TrainConfig::default()
    };
    Recipe {
        table,
        dataset_seed: 7,
        shape: ModelShape::uniform(blocks, DEFAULT_RECURSIONS, k1, k2),
        spec,
        cfg,
    }
}

//! Exhaustive architecture search.

use super::loss::LossSpec;
use super::trainer::{train, TrainConfig};
use crate::error::{invalid, Result};
use crate::model::ModelShape;
use crate::signal::SampleSet;

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub shape: ModelShape,
    pub train_loss: f64,
    /// Validation loss, or the training loss when the set has no validation records.
    pub val_loss: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Index into `rows` of the winner.
    pub best: usize,
    /// One row per candidate, in candidate order.
    pub rows: Vec<GridRow>,
}

impl GridResult {
    pub fn best_shape(&self) -> &ModelShape {
        &self.rows[self.best].shape
    }
}

/// Trains every candidate with `cfg` and ranks by validation loss; ties go
/// to the smaller largest filter, then to the earlier candidate.
pub fn grid_search(set: &SampleSet, grid: &[ModelShape], spec: &LossSpec, cfg: &TrainConfig) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(invalid("architecture grid is empty"));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for shape in grid {
        let out = train(set, shape, spec, cfg)?;
        let rec = out
            .history
            .records
            .iter()
            .find(|r| r.epoch == out.best_epoch)
            .expect("best epoch is recorded");
        rows.push(GridRow {
            shape: shape.clone(),
            train_loss: rec.train_loss,
            val_loss: rec.val_loss.unwrap_or(rec.train_loss),
            best_epoch: out.best_epoch,
        });
    }
    let best = rank(&rows)[0];
    Ok(GridResult { best, rows })
}

/// Row indices from best to worst.
pub fn rank(rows: &[GridRow]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (&rows[a], &rows[b]);
        ra.val_loss
            .total_cmp(&rb.val_loss)
            .then(ra.shape.max_k().cmp(&rb.shape.max_k()))
            .then(a.cmp(&b))
    });
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, loss: f64) -> GridRow {
        GridRow {
            shape: ModelShape::uniform(1, 1, k, k),
            train_loss: loss,
            val_loss: loss,
            best_epoch: 0,
        }
    }

    #[test]
    fn ties_prefer_smaller_filters() {
        let rows = vec![row(33, 1.0), row(17, 1.0), row(5, 2.0)];
        assert_eq!(rank(&rows), vec![1, 0, 2]);
    }

    #[test]
    fn empty_grid_rejected() {
        let set = SampleSet::unsplit(vec![]);
        assert!(grid_search(&set, &[], &LossSpec::mse(), &TrainConfig::default()).is_err());
    }
}

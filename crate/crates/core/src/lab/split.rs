use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::signal::{SampleSet, Split};

/// Train share of every generated dataset.
pub const TRAIN_RATIO: f64 = 0.7;

/// Tags `round_half_up(ratio * n)` records as train, chosen by a seeded
/// shuffle; the rest become validation. Record order is left untouched.
pub fn split_train_val(mut set: SampleSet, ratio: f64, seed: u64) -> Result<SampleSet> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(invalid(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let n = set.records.len();
    if n < 2 {
        return Err(invalid(format!("need at least 2 records to split, got {n}")));
    }
    let n_train = ((ratio * n as f64) + 0.5).floor() as usize;
    let n_train = n_train.clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut split = vec![Split::Validation; n];
    for &i in &order[..n_train] {
        split[i] = Split::Train;
    }
    set.split = split;
    Ok(set)
}

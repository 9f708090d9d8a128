use std::thread;

use super::cascade::{cascade_forward_unchecked, check_model, CascadeOutput};
use super::params::ModelParams;
use crate::error::{invalid, Result};

/// Evaluates the cascade on every signal using `lanes` worker threads that
/// share `params` read-only. Results come back in input order.
pub fn predict_batch(signals: &[Vec<f64>], params: &ModelParams, lanes: usize) -> Result<Vec<CascadeOutput>> {
    if lanes == 0 {
        return Err(invalid("need at least one worker lane"));
    }
    for s in signals {
        check_model(s.len(), params)?;
    }
    if lanes == 1 || signals.len() <= 1 {
        return Ok(signals
            .iter()
            .map(|s| cascade_forward_unchecked(s, params))
            .collect());
    }
    let lanes = lanes.min(signals.len());
    let chunk = signals.len().div_ceil(lanes);
    let parts: Vec<Vec<CascadeOutput>> = thread::scope(|scope| {
        let handles: Vec<_> = signals
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|s| cascade_forward_unchecked(s, params))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("prediction lane panicked"))
            .collect()
    });
    Ok(parts.into_iter().flatten().collect())
}

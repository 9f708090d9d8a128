//! Classical local-average baselines: iterative filtering and the mean of
//! cubic-spline envelopes.

mod envelope;
mod extrema;
mod iterative_filtering;
mod spline;

pub use envelope::csa_average;
pub use extrema::{count_extrema, find_extrema};
pub use iterative_filtering::{
    if_decompose, if_extract_imf, if_filter_length, if_local_average, triangular_window, IfConfig,
};
pub use spline::NaturalSpline;

use crate::signal::Signal;

/// IMFs in extraction order plus what is left over.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub imfs: Vec<Signal>,
    pub residue: Signal,
}

impl DecompositionResult {
    /// `sum(imfs) + residue`, summed in extraction order.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut acc = self.residue.samples().to_vec();
        for imf in &self.imfs {
            for (a, v) in acc.iter_mut().zip(imf.samples()) {
                *a += v;
            }
        }
        acc
    }
}

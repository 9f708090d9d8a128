use super::conv::conv_same;
use super::params::BlockParams;
use super::softmax::softmax;
use crate::error::{invalid, Result};

/// Intermediates of one recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionTrace {
    /// `X^(i)`, the recursion input.
    pub input: Vec<f64>,
    /// `tanh(conv(X^(i), w1))`.
    pub c1: Vec<f64>,
    /// `conv(c1, softmax(w2_raw))`, the local-average correction.
    pub c2: Vec<f64>,
    /// `softmax(w2_raw)`.
    pub w2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockTrace {
    pub steps: Vec<RecursionTrace>,
}

pub(crate) fn check_block(n: usize, p: &BlockParams) -> Result<()> {
    if p.recursions.is_empty() {
        return Err(invalid("block has no recursions"));
    }
    for r in &p.recursions {
        if r.w1.len() > n || r.w2_raw.len() > n {
            return Err(invalid(format!(
                "filter lengths ({}, {}) exceed signal length {n}",
                r.w1.len(),
                r.w2_raw.len()
            )));
        }
    }
    Ok(())
}

pub(crate) fn block_forward_unchecked(x: &[f64], p: &BlockParams) -> (Vec<f64>, BlockTrace) {
    let mut cur = x.to_vec();
    let mut steps = Vec::with_capacity(p.recursions.len());
    for r in &p.recursions {
        let mut c1 = conv_same(&cur, r.w1.taps());
        for v in &mut c1 {
            *v = v.tanh();
        }
        let w2 = softmax(r.w2_raw.taps());
        let c2 = conv_same(&c1, &w2);
        let next: Vec<f64> = cur.iter().zip(&c2).map(|(a, b)| a - b).collect();
        steps.push(RecursionTrace {
            input: std::mem::replace(&mut cur, next),
            c1,
            c2,
            w2,
        });
    }
    (cur, BlockTrace { steps })
}

/// Runs one block on `x`. Returns the IMF `X^(S)` and the trace; `x - imf`
/// is the block's local average.
pub fn block_forward(x: &[f64], p: &BlockParams) -> Result<(Vec<f64>, BlockTrace)> {
    check_block(x.len(), p)?;
    Ok(block_forward_unchecked(x, p))
}

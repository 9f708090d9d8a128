use nalgebra::DVector;

use super::block::{block_forward_unchecked, check_block, BlockTrace};
use super::params::ModelParams;
use crate::error::{invalid, Error, Result};

/// Everything a cascade evaluation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutput {
    /// Block outputs before any ortho transform.
    pub imfs: Vec<Vec<f64>>,
    /// Model outputs: `imfs` with the ortho transform applied to paired components.
    pub outputs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
    /// `X_{m-1}`, the input of each block.
    pub block_inputs: Vec<Vec<f64>>,
    pub traces: Vec<BlockTrace>,
}

pub(crate) fn check_model(n: usize, p: &ModelParams) -> Result<()> {
    if p.blocks.is_empty() {
        return Err(invalid("model has no blocks"));
    }
    for b in &p.blocks {
        check_block(n, b)?;
    }
    if let Some(o) = &p.ortho {
        if o.matrix.nrows() != n || o.matrix.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "ortho matrix is {}x{}, signal length is {n}",
                o.matrix.nrows(),
                o.matrix.ncols()
            )));
        }
        let m = p.blocks.len();
        if o.pairs.iter().any(|&(i, j)| i >= m || j >= m || i == j) {
            return Err(invalid(format!("ortho pairs {:?} invalid for {m} blocks", o.pairs)));
        }
    }
    Ok(())
}

pub(crate) fn cascade_forward_unchecked(x: &[f64], p: &ModelParams) -> CascadeOutput {
    let mut remainder = x.to_vec();
    let mut imfs = Vec::with_capacity(p.blocks.len());
    let mut block_inputs = Vec::with_capacity(p.blocks.len());
    let mut traces = Vec::with_capacity(p.blocks.len());
    for b in &p.blocks {
        let (imf, trace) = block_forward_unchecked(&remainder, b);
        let next: Vec<f64> = remainder.iter().zip(&imf).map(|(a, c)| a - c).collect();
        block_inputs.push(std::mem::replace(&mut remainder, next));
        imfs.push(imf);
        traces.push(trace);
    }
    let mut outputs = imfs.clone();
    if let Some(o) = &p.ortho {
        for m in o.members() {
            let v = &o.matrix * DVector::from_column_slice(&imfs[m]);
            outputs[m] = v.as_slice().to_vec();
        }
    }
    CascadeOutput {
        imfs,
        outputs,
        residue: remainder,
        block_inputs,
        traces,
    }
}

/// Applies the blocks in sequence: `imf_m = F_m(X_{m-1})`, `X_m = X_{m-1} - imf_m`.
pub fn cascade_forward(x: &[f64], p: &ModelParams) -> Result<CascadeOutput> {
    check_model(x.len(), p)?;
    Ok(cascade_forward_unchecked(x, p))
}

//! The recurrent residual convolutional block and the block cascade.

mod batch;
mod block;
mod cascade;
mod conv;
mod params;
mod softmax;
mod weights;

pub use batch::predict_batch;
pub use block::{block_forward, BlockTrace, RecursionTrace};
pub use cascade::{cascade_forward, CascadeOutput};
pub use conv::conv1d_same;
pub use params::{
    BlockParams, BlockShape, ConvFilter, ModelParams, ModelShape, OrthoLayer, Recursion, DEFAULT_K,
    DEFAULT_RECURSIONS,
};
pub use softmax::softmax;
pub use weights::{decode_weights, encode_weights, export_filters_csv, load_weights, save_weights};

pub(crate) use cascade::{cascade_forward_unchecked, check_model};
pub(crate) use conv::{conv_grad_input, conv_grad_weights};
pub(crate) use softmax::softmax_backward;

use crate::baselines::DecompositionResult;
use crate::error::Result;
use crate::signal::Signal;

/// Decomposes `x` with a trained cascade. The IMFs are the model outputs
/// (ortho-transformed where configured); the residue is `X_M`.
pub fn decompose(x: &Signal, params: &ModelParams) -> Result<DecompositionResult> {
    let out = cascade_forward(x.samples(), params)?;
    Ok(DecompositionResult {
        imfs: out
            .outputs
            .into_iter()
            .map(|v| x.with_samples(v))
            .collect::<Result<_>>()?,
        residue: x.with_samples(out.residue)?,
    })
}

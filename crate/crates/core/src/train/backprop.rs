//! Reverse accumulation through the cascade.

use nalgebra::DMatrix;

use super::loss::{evaluate, LossSpec};
use crate::error::{Error, Result};
use crate::model::{
    cascade_forward_unchecked, check_model, conv_grad_input, conv_grad_weights, softmax_backward, BlockTrace,
    ModelParams,
};

/// Gradients of one recursion's filters.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionGrad {
    pub w1: Vec<f64>,
    pub w2_raw: Vec<f64>,
}

/// Gradient of a loss with respect to every parameter of a [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub blocks: Vec<Vec<RecursionGrad>>,
    pub ortho: Option<DMatrix<f64>>,
}

impl GradientSet {
    pub fn zeros_like(p: &ModelParams) -> Self {
        GradientSet {
            blocks: p
                .blocks
                .iter()
                .map(|b| {
                    b.recursions
                        .iter()
                        .map(|r| RecursionGrad {
                            w1: vec![0.0; r.w1.len()],
                            w2_raw: vec![0.0; r.w2_raw.len()],
                        })
                        .collect()
                })
                .collect(),
            ortho: p.ortho.as_ref().map(|o| DMatrix::zeros(o.matrix.nrows(), o.matrix.ncols())),
        }
    }

    /// True when every array has the shape of the matching parameter.
    pub fn is_congruent(&self, p: &ModelParams) -> bool {
        self.blocks.len() == p.blocks.len()
            && self.blocks.iter().zip(&p.blocks).all(|(g, b)| {
                g.len() == b.recursions.len()
                    && g
                        .iter()
                        .zip(&b.recursions)
                        .all(|(gr, r)| gr.w1.len() == r.w1.len() && gr.w2_raw.len() == r.w2_raw.len())
            })
            && match (&self.ortho, &p.ortho) {
                (None, None) => true,
                (Some(g), Some(o)) => g.shape() == o.matrix.shape(),
                _ => false,
            }
    }

    /// Same layout as [`ModelParams::flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for b in &self.blocks {
            for r in b {
                v.extend_from_slice(&r.w1);
                v.extend_from_slice(&r.w2_raw);
            }
        }
        if let Some(g) = &self.ortho {
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    v.push(g[(i, j)]);
                }
            }
        }
        v
    }

    /// Inverse of [`GradientSet::flat`] for the layout of `p`.
    pub fn from_flat(p: &ModelParams, v: &[f64]) -> Result<Self> {
        let mut g = GradientSet::zeros_like(p);
        if v.len() != p.flat_len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} gradient entries, got {}",
                p.flat_len(),
                v.len()
            )));
        }
        let mut it = v.iter().copied();
        for b in &mut g.blocks {
            for r in b {
                for x in r.w1.iter_mut().chain(r.w2_raw.iter_mut()) {
                    *x = it.next().unwrap_or_default();
                }
            }
        }
        if let Some(m) = &mut g.ortho {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    m[(i, j)] = it.next().unwrap_or_default();
                }
            }
        }
        Ok(g)
    }

    /// `self += a * other`. Shapes must agree.
    pub fn add_scaled(&mut self, a: f64, other: &GradientSet) {
        for (bs, bo) in self.blocks.iter_mut().zip(&other.blocks) {
            for (rs, ro) in bs.iter_mut().zip(bo) {
                for (x, y) in rs.w1.iter_mut().zip(&ro.w1) {
                    *x += a * y;
                }
                for (x, y) in rs.w2_raw.iter_mut().zip(&ro.w2_raw) {
                    *x += a * y;
                }
            }
        }
        if let (Some(s), Some(o)) = (&mut self.ortho, &other.ortho) {
            *s += o * a;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for b in &mut self.blocks {
            for r in b {
                r.w1.iter_mut().chain(r.w2_raw.iter_mut()).for_each(|x| *x *= a);
            }
        }
        if let Some(m) = &mut self.ortho {
            *m *= a;
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.flat().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Pulls `g_imf` (gradient w.r.t. the block output) back through one block.
/// Adds filter gradients into `grads` and returns the gradient w.r.t. the block input.
fn block_backward(trace: &BlockTrace, p: &crate::model::BlockParams, g_imf: &[f64], grads: &mut [RecursionGrad]) -> Vec<f64> {
    let mut g = g_imf.to_vec();
    for ((step, r), gr) in trace.steps.iter().zip(&p.recursions).zip(grads.iter_mut()).rev() {
        // X' = X - C2
        let g_c2: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut g_c1 = vec![0.0; g.len()];
        conv_grad_input(&g_c2, &step.w2, &mut g_c1);
        let mut g_w2 = vec![0.0; step.w2.len()];
        conv_grad_weights(&step.c1, &g_c2, step.w2.len(), &mut g_w2);
        for (acc, v) in gr.w2_raw.iter_mut().zip(softmax_backward(&step.w2, &g_w2)) {
            *acc += v;
        }
        let g_pre: Vec<f64> = g_c1.iter().zip(&step.c1).map(|(gc, c)| gc * (1.0 - c * c)).collect();
        conv_grad_weights(&step.input, &g_pre, r.w1.len(), &mut gr.w1);
        conv_grad_input(&g_pre, r.w1.taps(), &mut g);
    }
    g
}

/// Loss of one record, forward pass only.
pub fn loss_value(x: &[f64], label: &[Vec<f64>], p: &ModelParams, spec: &LossSpec) -> Result<f64> {
    check_model(x.len(), p)?;
    let out = cascade_forward_unchecked(x, p);
    Ok(evaluate(spec, &out.imfs, label, p.ortho.as_ref().map(|o| &o.matrix))?.value)
}

/// Loss of one record and its gradient with respect to every parameter.
pub fn backprop(x: &[f64], label: &[Vec<f64>], p: &ModelParams, spec: &LossSpec) -> Result<(f64, GradientSet)> {
    check_model(x.len(), p)?;
    spec.validate(p.blocks.len(), Some(p))?;
    let out = cascade_forward_unchecked(x, p);
    let eval = evaluate(spec, &out.imfs, label, p.ortho.as_ref().map(|o| &o.matrix))?;
    let mut grads = GradientSet::zeros_like(p);
    grads.ortho = eval.d_ortho;

    // X_m = X_{m-1} - imf_m; the residue X_M does not enter the loss.
    let mut g_rem = vec![0.0; x.len()];
    for m in (0..p.blocks.len()).rev() {
        let g_imf: Vec<f64> = eval.d_imfs[m].iter().zip(&g_rem).map(|(a, b)| a - b).collect();
        let g_in = block_backward(&out.traces[m], &p.blocks[m], &g_imf, &mut grads.blocks[m]);
        for (r, v) in g_rem.iter_mut().zip(g_in) {
            *r += v;
        }
    }
    Ok((eval.value, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelShape;

    #[test]
    fn zero_first_layer_perfect_fit() {
        let p = ModelParams::zeros(&ModelShape::uniform(1, 2, 5, 3)).unwrap();
        let x: Vec<f64> = (0..32).map(|i| (i as f64 * 0.3).sin()).collect();
        let (loss, g) = backprop(&x, &[x.clone()], &p, &LossSpec::mse()).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.blocks[0].iter().all(|r| r.w2_raw.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn flat_round_trip() {
        let p = ModelParams::init(&ModelShape::uniform(2, 2, 5, 3), 1)
            .unwrap()
            .with_identity_ortho(8, vec![(0, 1)])
            .unwrap();
        let v: Vec<f64> = (0..p.flat_len()).map(|i| i as f64).collect();
        let g = GradientSet::from_flat(&p, &v).unwrap();
        assert!(g.is_congruent(&p));
        assert_eq!(g.flat(), v);
        assert!(GradientSet::from_flat(&p, &v[1..]).is_err());
    }

    #[test]
    fn loss_value_matches_backprop() {
        let p = ModelParams::init(&ModelShape::uniform(2, 2, 5, 3), 3).unwrap();
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).cos() + 0.01 * i as f64).collect();
        let label = vec![x.iter().map(|v| 0.5 * v).collect::<Vec<_>>(), vec![0.1; 40]];
        let spec = LossSpec::mse_qtv(0.2, vec![1]);
        let a = loss_value(&x, &label, &p, &spec).unwrap();
        let (b, _) = backprop(&x, &label, &p, &spec).unwrap();
        assert_eq!(a, b);
    }
}

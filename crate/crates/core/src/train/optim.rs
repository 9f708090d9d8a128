//! Parameter updates.

use nalgebra::DMatrix;

use super::backprop::GradientSet;
use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-12;

/// `p - lr * g` on every filter tap. The ortho matrix is left alone.
pub fn sgd_step(p: &ModelParams, g: &GradientSet, lr: f64) -> Result<ModelParams> {
    if !g.is_congruent(p) {
        return Err(Error::ShapeMismatch("gradient does not match parameters".into()));
    }
    if !lr.is_finite() || lr < 0.0 {
        return Err(invalid(format!("learning rate {lr} must be finite and non-negative")));
    }
    let mut out = p.clone();
    let mut idx = 0;
    for (b, gb) in out.blocks.iter_mut().zip(&g.blocks) {
        for (r, gr) in b.recursions.iter_mut().zip(gb) {
            for (layer, grad) in [(r.w1.taps_mut(), &gr.w1), (r.w2_raw.taps_mut(), &gr.w2_raw)] {
                for (t, d) in layer.iter_mut().zip(grad) {
                    if !d.is_finite() {
                        return Err(Error::NonFiniteGradient(p.coordinate_name(idx)));
                    }
                    *t -= lr * d;
                    idx += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Which update rule the trainer applies to the filter taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    /// Constant-step gradient descent.
    #[default]
    Gd,
    /// Per-coordinate adaptive steps with first and second moment estimates.
    Adam,
}

impl std::fmt::Display for Optimizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Optimizer::Gd => "gd",
            Optimizer::Adam => "adam",
        })
    }
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gd" | "sgd" => Ok(Optimizer::Gd),
            "adam" => Ok(Optimizer::Adam),
            _ => Err(Error::Parse(format!("unknown optimizer {s:?}"))),
        }
    }
}

/// Moment estimates for [`Optimizer::Adam`], over the filter taps only.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamState {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(p: &ModelParams) -> Self {
        let n = p.filter_tap_count();
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// One update of the filter taps; the ortho matrix is left alone.
    pub fn step(&mut self, p: &ModelParams, g: &GradientSet, lr: f64) -> Result<ModelParams> {
        if !g.is_congruent(p) || self.m.len() != p.filter_tap_count() {
            return Err(Error::ShapeMismatch("gradient does not match parameters".into()));
        }
        let flat = g.flat();
        let taps = &flat[..self.m.len()];
        if let Some(i) = taps.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient(p.coordinate_name(i)));
        }
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let mut theta = p.flat();
        for (i, &gi) in taps.iter().enumerate() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * gi;
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * gi * gi;
            theta[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
        let mut out = p.clone();
        out.set_flat(&theta)?;
        Ok(out)
    }
}

/// Gradient step on `w` followed by projection onto the orthogonal group:
/// `U V^T` from the SVD of `w - lr1 * g`.
pub fn stiefel_step(w: &DMatrix<f64>, g: &DMatrix<f64>, lr1: f64) -> Result<DMatrix<f64>> {
    if !w.is_square() || w.shape() != g.shape() {
        return Err(Error::ShapeMismatch(format!(
            "ortho matrix {:?} and gradient {:?} must be equal and square",
            w.shape(),
            g.shape()
        )));
    }
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteGradient(format!("ortho[{}, {}]", i % g.nrows(), i / g.nrows())));
    }
    let a = w - g * lr1;
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOL * smax) {
        return Err(Error::RankDeficient(if smax > 0.0 { smin / smax } else { 0.0 }));
    }
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    Ok(u * vt)
}

//! Training objectives.
//!
//! * `Mse`: `||Y_hat - Y||_F^2`.
//! * `MseQtv`: adds `eta * sum_{m in omega1} sum_t (Y_hat[t+1,m] - Y_hat[t,m])^2`.
//! * `OrthoConstrained`: components named in `omega2` are compared after the
//!   shared orthogonal transform, `||W Y_hat_i - Y_i||^2`, once per pair.
//! * `OrthoPenalty`: MSE plus `gamma * sum |<c_i, c_j>| / (||c_i|| ||c_j||)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Mse,
    MseQtv,
    OrthoConstrained,
    OrthoPenalty,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [
        LossKind::Mse,
        LossKind::MseQtv,
        LossKind::OrthoConstrained,
        LossKind::OrthoPenalty,
    ];
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Mse => "mse",
            LossKind::MseQtv => "mse_qtv",
            LossKind::OrthoConstrained => "ortho_constrained",
            LossKind::OrthoPenalty => "ortho_penalty",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "mse_qtv" | "qtv" => Ok(LossKind::MseQtv),
            "ortho_constrained" | "constrained" => Ok(LossKind::OrthoConstrained),
            "ortho_penalty" | "penalty" => Ok(LossKind::OrthoPenalty),
            _ => Err(Error::Parse(format!("unknown loss kind {s:?}"))),
        }
    }
}

/// Which objective to train and its weights. Component indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
    pub eta: f64,
    pub gamma: f64,
    pub omega1: Vec<usize>,
    pub omega2: Vec<(usize, usize)>,
}

impl LossSpec {
    pub fn mse() -> Self {
        LossSpec {
            kind: LossKind::Mse,
            eta: 0.0,
            gamma: 0.0,
            omega1: vec![],
            omega2: vec![],
        }
    }

    pub fn mse_qtv(eta: f64, omega1: Vec<usize>) -> Self {
        LossSpec {
            kind: LossKind::MseQtv,
            eta,
            omega1,
            ..LossSpec::mse()
        }
    }

    pub fn ortho_constrained(omega2: Vec<(usize, usize)>) -> Self {
        LossSpec {
            kind: LossKind::OrthoConstrained,
            omega2,
            ..LossSpec::mse()
        }
    }

    pub fn ortho_penalty(gamma: f64, omega2: Vec<(usize, usize)>) -> Self {
        LossSpec {
            kind: LossKind::OrthoPenalty,
            gamma,
            omega2,
            ..LossSpec::mse()
        }
    }

    /// Checks the spec against a component count and a parameter set.
    pub fn validate(&self, m: usize, params: Option<&ModelParams>) -> Result<()> {
        if !(self.eta >= 0.0 && self.gamma >= 0.0) {
            return Err(invalid("eta and gamma must be non-negative"));
        }
        if self.eta != 0.0 && self.kind != LossKind::MseQtv {
            return Err(invalid("eta is only used by the mse_qtv loss"));
        }
        if self.gamma != 0.0 && self.kind != LossKind::OrthoPenalty {
            return Err(invalid("gamma is only used by the ortho_penalty loss"));
        }
        if let Some(&bad) = self.omega1.iter().find(|&&i| i >= m) {
            return Err(invalid(format!("omega1 index {} out of range", bad + 1)));
        }
        let mut seen = Vec::new();
        for &(i, j) in &self.omega2 {
            if i >= m || j >= m || i == j {
                return Err(invalid(format!("invalid omega2 pair ({}, {})", i + 1, j + 1)));
            }
            let key = (i.min(j), i.max(j));
            if seen.contains(&key) {
                return Err(invalid(format!("duplicate omega2 pair ({}, {})", i + 1, j + 1)));
            }
            seen.push(key);
        }
        let needs_pairs = matches!(self.kind, LossKind::OrthoConstrained | LossKind::OrthoPenalty);
        if needs_pairs && self.omega2.is_empty() {
            return Err(invalid(format!("{} needs at least one omega2 pair", self.kind)));
        }
        if let Some(p) = params {
            let has_ortho = p.ortho.is_some();
            if has_ortho != (self.kind == LossKind::OrthoConstrained) {
                return Err(invalid(
                    "an ortho matrix is present exactly when the loss is ortho_constrained",
                ));
            }
            if let Some(o) = &p.ortho {
                if o.pairs != self.omega2 {
                    return Err(invalid("ortho layer pairs differ from omega2"));
                }
            }
            if p.blocks.len() != m {
                return Err(Error::ShapeMismatch(format!(
                    "model has {} blocks, labels have {m} components",
                    p.blocks.len()
                )));
            }
        }
        Ok(())
    }
}

fn check_stack(pred: &[Vec<f64>], label: &[Vec<f64>]) -> Result<()> {
    if pred.len() != label.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predicted components, {} labels",
            pred.len(),
            label.len()
        )));
    }
    for (m, (p, l)) in pred.iter().zip(label).enumerate() {
        if p.len() != l.len() {
            return Err(Error::ShapeMismatch(format!(
                "component {}: {} vs {} samples",
                m + 1,
                p.len(),
                l.len()
            )));
        }
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Frobenius norm of `pred - label`.
pub fn loss_mse(pred: &[Vec<f64>], label: &[Vec<f64>]) -> Result<f64> {
    check_stack(pred, label)?;
    Ok(pred.iter().zip(label).map(|(p, l)| sq_dist(p, l)).sum())
}

/// Sum of squared first differences of the components in `omega1`.
pub fn loss_qtv(pred: &[Vec<f64>], omega1: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &m in omega1 {
        let c = pred
            .get(m)
            .ok_or_else(|| invalid(format!("omega1 index {} out of range", m + 1)))?;
        total += c.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>();
    }
    Ok(total)
}

/// `gamma * sum_{(i,j)} |<c_i, c_j>| / (||c_i|| ||c_j||)`.
pub fn loss_ortho_penalty(pred: &[Vec<f64>], omega2: &[(usize, usize)], gamma: f64) -> Result<f64> {
    let mut total = 0.0;
    for &(i, j) in omega2 {
        let (ci, cj) = match (pred.get(i), pred.get(j)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(invalid(format!("omega2 pair ({}, {}) out of range", i + 1, j + 1))),
        };
        let (ni, nj) = (dot(ci, ci).sqrt(), dot(cj, cj).sqrt());
        if ni == 0.0 {
            return Err(Error::ZeroNorm(i + 1));
        }
        if nj == 0.0 {
            return Err(Error::ZeroNorm(j + 1));
        }
        total += dot(ci, cj).abs() / (ni * nj);
    }
    Ok(gamma * total)
}

/// Loss value with its gradients w.r.t. the raw block outputs and, for the
/// constrained objective, the ortho matrix.
pub(crate) struct LossEval {
    pub value: f64,
    pub d_imfs: Vec<Vec<f64>>,
    pub d_ortho: Option<DMatrix<f64>>,
}

/// Evaluates `spec` on raw block outputs `imfs` (the ortho transform, if
/// any, is applied here).
pub(crate) fn evaluate(
    spec: &LossSpec,
    imfs: &[Vec<f64>],
    label: &[Vec<f64>],
    ortho: Option<&DMatrix<f64>>,
) -> Result<LossEval> {
    check_stack(imfs, label)?;
    let m = imfs.len();
    let mut d_imfs: Vec<Vec<f64>> = imfs.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut value = 0.0;
    let mut d_ortho = None;

    match spec.kind {
        LossKind::OrthoConstrained => {
            let w = ortho.ok_or_else(|| invalid("ortho_constrained loss needs an ortho matrix"))?;
            let n = imfs[0].len();
            if w.nrows() != n || w.ncols() != n {
                return Err(Error::ShapeMismatch("ortho matrix does not match signal length".into()));
            }
            let mut in_pairs = vec![false; m];
            for &(i, j) in &spec.omega2 {
                in_pairs[i] = true;
                in_pairs[j] = true;
            }
            for c in (0..m).filter(|&c| !in_pairs[c]) {
                value += sq_dist(&imfs[c], &label[c]);
                for (g, (p, l)) in d_imfs[c].iter_mut().zip(imfs[c].iter().zip(&label[c])) {
                    *g = 2.0 * (p - l);
                }
            }
            let mut gw = DMatrix::zeros(n, n);
            for &(i, j) in &spec.omega2 {
                for c in [i, j] {
                    let y = DVector::from_column_slice(&imfs[c]);
                    let r = w * &y - DVector::from_column_slice(&label[c]);
                    value += r.norm_squared();
                    let back = w.tr_mul(&r) * 2.0;
                    for (g, b) in d_imfs[c].iter_mut().zip(back.iter()) {
                        *g += b;
                    }
                    gw.ger(2.0, &r, &y, 1.0);
                }
            }
            d_ortho = Some(gw);
        }
        _ => {
            for c in 0..m {
                value += sq_dist(&imfs[c], &label[c]);
                for (g, (p, l)) in d_imfs[c].iter_mut().zip(imfs[c].iter().zip(&label[c])) {
                    *g = 2.0 * (p - l);
                }
            }
        }
    }

    if spec.kind == LossKind::MseQtv && spec.eta != 0.0 {
        value += spec.eta * loss_qtv(imfs, &spec.omega1)?;
        for &c in &spec.omega1 {
            let y = &imfs[c];
            let g = &mut d_imfs[c];
            for t in 0..y.len().saturating_sub(1) {
                let d = 2.0 * spec.eta * (y[t + 1] - y[t]);
                g[t + 1] += d;
                g[t] -= d;
            }
        }
    }

    if spec.kind == LossKind::OrthoPenalty && spec.gamma != 0.0 {
        value += loss_ortho_penalty(imfs, &spec.omega2, spec.gamma)?;
        for &(i, j) in &spec.omega2 {
            let (ci, cj) = (&imfs[i], &imfs[j]);
            let u = dot(ci, cj);
            let (a, b) = (dot(ci, ci).sqrt(), dot(cj, cj).sqrt());
            let s = spec.gamma * u.signum();
            let (ab, a3b, ab3) = (a * b, a * a * a * b, a * b * b * b);
            for t in 0..ci.len() {
                d_imfs[i][t] += s * (cj[t] / ab - u * ci[t] / a3b);
                d_imfs[j][t] += s * (ci[t] / ab - u * cj[t] / ab3);
            }
        }
    }

    Ok(LossEval {
        value,
        d_imfs,
        d_ortho,
    })
}

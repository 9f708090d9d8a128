use crate::error::{Error, Result};
use crate::signal::Signal;

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::ShapeMismatch(format!("signals have {} and {} samples", a.len(), b.len())));
    }
    Ok(())
}

pub(crate) fn mae_slice(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

pub(crate) fn rmse_slice(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let ms = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64;
    Ok(ms.sqrt())
}

pub(crate) fn rho_slice(a: &[f64], b: &[f64]) -> Result<f64> {
    check(a, b)?;
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 {
        return Err(Error::ZeroNorm(1));
    }
    if nb == 0.0 {
        return Err(Error::ZeroNorm(2));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot.abs() / (na * nb)).min(1.0))
}

/// Mean absolute error.
pub fn mae(pred: &Signal, truth: &Signal) -> Result<f64> {
    mae_slice(pred.samples(), truth.samples())
}

/// Root mean squared error.
pub fn rmse(pred: &Signal, truth: &Signal) -> Result<f64> {
    rmse_slice(pred.samples(), truth.samples())
}

/// Absolute cosine similarity `|<a, b>| / (||a|| ||b||)`.
pub fn rho(c1: &Signal, c2: &Signal) -> Result<f64> {
    rho_slice(c1.samples(), c2.samples())
}

//! Central-difference gradient oracle.

use super::backprop::{backprop, loss_value};
use super::loss::LossSpec;
use crate::error::{invalid, Result};
use crate::model::ModelParams;

/// Entries whose magnitude is below this fraction of the largest gradient
/// entry are compared on an absolute scale instead of a relative one.
pub const RELATIVE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_deviation: f64,
    /// Flat index of the worst coordinate.
    pub worst: usize,
    pub worst_name: String,
}

impl GradCheckReport {
    pub fn passed(&self, threshold: f64) -> bool {
        self.max_deviation < threshold
    }
}

/// Central differences of the loss with step `eps * max(|theta|, 1)`.
pub fn numeric_gradient(
    p: &ModelParams,
    x: &[f64],
    label: &[Vec<f64>],
    spec: &LossSpec,
    eps: f64,
) -> Result<Vec<f64>> {
    let theta = p.flat();
    let mut probe = p.clone();
    let mut out = Vec::with_capacity(theta.len());
    let mut work = theta.clone();
    for i in 0..theta.len() {
        let h = eps * theta[i].abs().max(1.0);
        work[i] = theta[i] + h;
        probe.set_flat(&work)?;
        let up = loss_value(x, label, &probe, spec)?;
        work[i] = theta[i] - h;
        probe.set_flat(&work)?;
        let down = loss_value(x, label, &probe, spec)?;
        work[i] = theta[i];
        out.push((up - down) / (2.0 * h));
    }
    Ok(out)
}

/// Largest per-coordinate relative deviation and where it occurs.
///
/// Coordinate `i` contributes `|a_i - b_i| / max(|a_i|, |b_i|, floor)` where
/// `floor = RELATIVE_FLOOR * max_j max(|a_j|, |b_j|)`.
pub fn max_relative_deviation(a: &[f64], b: &[f64]) -> (f64, usize) {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (RELATIVE_FLOOR * scale).max(f64::MIN_POSITIVE);
    let mut worst = (0.0, 0);
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let d = (x - y).abs();
        if d == 0.0 {
            continue;
        }
        let rel = d / x.abs().max(y.abs()).max(floor);
        if !(rel <= worst.0) {
            worst = (rel, i);
        }
    }
    worst
}

/// Compares backprop with central differences.
pub fn grad_check(p: &ModelParams, x: &[f64], label: &[Vec<f64>], spec: &LossSpec, eps: f64) -> Result<GradCheckReport> {
    grad_check_with_fault(p, x, label, spec, eps, None)
}

/// As [`grad_check`], with `fault = (coordinate, delta)` added to the analytic gradient.
pub fn grad_check_with_fault(
    p: &ModelParams,
    x: &[f64],
    label: &[Vec<f64>],
    spec: &LossSpec,
    eps: f64,
    fault: Option<(usize, f64)>,
) -> Result<GradCheckReport> {
    if !(1e-8..=1e-4).contains(&eps) {
        return Err(invalid(format!("eps {eps} outside [1e-8, 1e-4]")));
    }
    let (_, g) = backprop(x, label, p, spec)?;
    let mut analytic = g.flat();
    if let Some((i, delta)) = fault {
        let slot = analytic
            .get_mut(i)
            .ok_or_else(|| invalid(format!("fault coordinate {i} out of range")))?;
        *slot += delta;
    }
    let numeric = numeric_gradient(p, x, label, spec, eps)?;
    let (max_deviation, worst) = max_relative_deviation(&analytic, &numeric);
    Ok(GradCheckReport {
        worst_name: p.coordinate_name(worst),
        analytic,
        numeric,
        max_deviation,
        worst,
    })
}

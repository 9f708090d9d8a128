/// Numerically stable softmax: positive entries summing to one.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|a| (a - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|a| a / s).collect()
}

/// Pulls a gradient w.r.t. `p = softmax(v)` back to `v`:
/// `g_v = p * (g_p - <g_p, p>)`.
pub(crate) fn softmax_backward(p: &[f64], gp: &[f64]) -> Vec<f64> {
    let dot: f64 = p.iter().zip(gp).map(|(a, b)| a * b).sum();
    p.iter().zip(gp).map(|(pi, gi)| pi * (gi - dot)).collect()
}

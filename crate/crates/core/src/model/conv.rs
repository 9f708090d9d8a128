//! "Same"-length 1-D cross-correlation with zero padding and its adjoints.
//!
//! `y[t] = sum_i x[t - h + i] * w[i]` for `i in 0..K`, `h = K / 2`, with
//! `x[s] = 0` outside `0..N`.

use crate::error::{invalid, Result};

/// Valid output range `[lo, hi)` for tap `i`: the `t` with `0 <= t + i - h < n`.
#[inline]
fn tap_range(n: usize, h: usize, i: usize) -> (usize, usize) {
    let lo = h.saturating_sub(i);
    let hi = (n + h).saturating_sub(i).min(n);
    (lo, hi.max(lo))
}

/// Accumulates the convolution of `x` with `w` into `out`.
pub(crate) fn conv_accumulate(x: &[f64], w: &[f64], out: &mut [f64]) {
    let n = x.len();
    let h = w.len() / 2;
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        let (lo, hi) = tap_range(n, h, i);
        if lo >= hi {
            continue;
        }
        let src = &x[lo + i - h..hi + i - h];
        for (o, s) in out[lo..hi].iter_mut().zip(src) {
            *o += wi * s;
        }
    }
}

pub(crate) fn conv_same(x: &[f64], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    conv_accumulate(x, w, &mut out);
    out
}

/// `d/dw[i]` of `<gy, conv(x, w)>`.
pub(crate) fn conv_grad_weights(x: &[f64], gy: &[f64], k: usize, gw: &mut [f64]) {
    let n = x.len();
    let h = k / 2;
    for (i, g) in gw.iter_mut().enumerate().take(k) {
        let (lo, hi) = tap_range(n, h, i);
        if lo >= hi {
            continue;
        }
        let src = &x[lo + i - h..hi + i - h];
        *g += gy[lo..hi].iter().zip(src).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Accumulates `d/dx` of `<gy, conv(x, w)>` into `gx`.
pub(crate) fn conv_grad_input(gy: &[f64], w: &[f64], gx: &mut [f64]) {
    let n = gy.len();
    let h = w.len() / 2;
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        let (lo, hi) = tap_range(n, h, i);
        if lo >= hi {
            continue;
        }
        let dst = &mut gx[lo + i - h..hi + i - h];
        for (d, g) in dst.iter_mut().zip(&gy[lo..hi]) {
            *d += wi * g;
        }
    }
}

/// Zero-padded convolution whose output has the input's length.
pub fn conv1d_same(x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if w.is_empty() || w.len() > x.len() {
        return Err(invalid(format!(
            "filter length {} must be in 1..={}",
            w.len(),
            x.len()
        )));
    }
    Ok(conv_same(x, w))
}

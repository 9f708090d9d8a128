//! Iterative filtering: repeatedly subtract a triangular moving average whose
//! half-length follows the mean extrema spacing of the current iterate.

use super::extrema::count_extrema;
use super::DecompositionResult;
use crate::error::{invalid, Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfConfig {
    /// Filter-length multiplier.
    pub xi: f64,
    /// Stop sifting once `||x_{n+1} - x_n|| / ||x_n||` drops below this.
    pub inner_tol: f64,
    pub max_inner: usize,
    pub max_imfs: usize,
}

impl Default for IfConfig {
    fn default() -> Self {
        IfConfig {
            xi: 2.0,
            inner_tol: 0.03,
            max_inner: 200,
            max_imfs: 8,
        }
    }
}

impl IfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) {
            return Err(invalid(format!("xi must be positive, got {}", self.xi)));
        }
        if !(self.inner_tol > 0.0 && self.inner_tol < 1.0) {
            return Err(invalid(format!("inner_tol must lie in (0, 1), got {}", self.inner_tol)));
        }
        if self.max_inner == 0 || self.max_imfs == 0 {
            return Err(invalid("max_inner and max_imfs must be at least 1"));
        }
        Ok(())
    }
}

/// Normalized triangular window of half-length `l`:
/// `w[j] = (l + 1 - |j|) / (l + 1)^2` for `j = -l..=l`.
pub fn triangular_window(l: usize) -> Vec<f64> {
    let h = (l + 1) as f64;
    (0..=2 * l)
        .map(|i| (h - (i as f64 - l as f64).abs()) / (h * h))
        .collect()
}

/// Half-length `round(xi * N / extrema)` clamped to `[1, N / 2]`.
pub fn if_filter_length(n: usize, extrema: usize, xi: f64) -> usize {
    let raw = (xi * n as f64 / extrema.max(1) as f64).round();
    (raw as usize).clamp(1, (n / 2).max(1))
}

fn mirror_index(i: isize, n: usize) -> usize {
    // whole-sample symmetric extension: x[-j] = x[j], x[n-1+j] = x[n-1-j]
    let last = n as isize - 1;
    let mut j = i;
    if j < 0 {
        j = -j;
    }
    if j > last {
        j = 2 * last - j;
    }
    j as usize
}

fn local_average(x: &[f64], l: usize) -> Vec<f64> {
    let w = triangular_window(l);
    let n = x.len();
    let li = l as isize;
    (0..n)
        .map(|t| {
            let t = t as isize;
            w.iter()
                .enumerate()
                .map(|(i, wi)| wi * x[mirror_index(t + i as isize - li, n)])
                .sum()
        })
        .collect()
}

/// Convolution of `x` with the triangular window of half-length `l`,
/// mirror-extended at both ends.
pub fn if_local_average(x: &Signal, l: usize) -> Result<Signal> {
    let n = x.len();
    if l < 1 || l > n / 2 {
        return Err(invalid(format!("filter half-length {l} outside [1, {}]", n / 2)));
    }
    x.with_samples(local_average(x.samples(), l))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Sifts one IMF out of `x`. Returns the IMF and the number of iterations.
pub fn if_extract_imf(x: &Signal, cfg: &IfConfig) -> Result<(Signal, usize)> {
    cfg.validate()?;
    let n = x.len();
    let found = count_extrema(x.samples());
    if found < 2 {
        return Err(Error::TooFewExtrema { needed: 2, found });
    }
    let mut cur = x.samples().to_vec();
    let mut iterations = 0;
    while iterations < cfg.max_inner {
        let extrema = count_extrema(&cur);
        if extrema == 0 {
            break;
        }
        let l = if_filter_length(n, extrema, cfg.xi);
        let avg = local_average(&cur, l);
        let next: Vec<f64> = cur.iter().zip(&avg).map(|(a, b)| a - b).collect();
        iterations += 1;
        let denom = norm(&cur);
        let change = norm(&avg);
        cur = next;
        if denom == 0.0 || change / denom < cfg.inner_tol {
            break;
        }
    }
    Ok((x.with_samples(cur)?, iterations))
}

/// Extracts IMFs until the remainder has fewer than two extrema or
/// `max_imfs` is reached. The remainder is stored as the residue.
pub fn if_decompose(x: &Signal, cfg: &IfConfig) -> Result<DecompositionResult> {
    cfg.validate()?;
    if x.len() < 8 {
        return Err(invalid(format!("need at least 8 samples, got {}", x.len())));
    }
    let mut imfs = Vec::new();
    let mut remainder = x.clone();
    while imfs.len() < cfg.max_imfs && count_extrema(remainder.samples()) >= 2 {
        let (imf, _) = if_extract_imf(&remainder, cfg)?;
        let next = remainder
            .samples()
            .iter()
            .zip(imf.samples())
            .map(|(r, m)| r - m)
            .collect();
        remainder = remainder.with_samples(next)?;
        imfs.push(imf);
    }
    Ok(DecompositionResult {
        imfs,
        residue: remainder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::sample_function;

    fn middle(v: &[f64]) -> &[f64] {
        let n = v.len();
        &v[n / 10..n - n / 10]
    }

    #[test]
    fn window_is_stochastic_and_symmetric() {
        for l in [1, 2, 5, 40, 511] {
            let w = triangular_window(l);
            assert_eq!(w.len(), 2 * l + 1);
            assert!(w.iter().all(|&v| v > 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for j in 0..w.len() {
                assert_eq!(w[j], w[w.len() - 1 - j]);
            }
        }
    }

    #[test]
    fn impulse_response_reads_window() {
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        let x = Signal::new(v, 0.0, 1.0).unwrap();
        let y = if_local_average(&x, 1).unwrap();
        assert_eq!(&y.samples()[3..6], &[0.25, 0.5, 0.25]);
        assert!(y.samples()[..3].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constants_are_preserved() {
        let x = Signal::new(vec![3.25; 64], 0.0, 1.0).unwrap();
        for l in [1, 7, 32] {
            let y = if_local_average(&x, l).unwrap();
            for v in y.samples() {
                assert!((v - 3.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn filter_length_bounds() {
        assert!(if_local_average(&Signal::new(vec![0.0; 10], 0.0, 1.0).unwrap(), 0).is_err());
        assert!(if_local_average(&Signal::new(vec![0.0; 10], 0.0, 1.0).unwrap(), 6).is_err());
        assert_eq!(if_filter_length(1000, 0, 1.6), 500);
        assert_eq!(if_filter_length(1000, 100, 1.6), 16);
        assert_eq!(if_filter_length(10, 1000, 1.6), 1);
    }

    #[test]
    fn average_attenuates_a_tone() {
        // cos(3 l t), l = 4, on the T2 grid
        let x = sample_function(|t| (12.0 * t).cos(), 0.0, 3.0, 1024).unwrap();
        let l = if_filter_length(x.len(), count_extrema(x.samples()), 1.6);
        let avg = if_local_average(&x, l).unwrap();
        let peak = middle(avg.samples()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak < 0.1 * x.max_abs(), "peak {peak}");
    }

    #[test]
    fn mono_component_is_its_own_imf() {
        let x = sample_function(|t| (10.0 * t).cos(), 0.0, 3.0, 1024).unwrap();
        let cfg = IfConfig::default();
        let (imf, iters) = if_extract_imf(&x, &cfg).unwrap();
        assert!(iters >= 1 && iters <= cfg.max_inner);
        // compare beyond the reach of the mirrored boundary
        let l = if_filter_length(x.len(), count_extrema(x.samples()), cfg.xi);
        let n = x.len();
        let diff: Vec<f64> = imf.samples().iter().zip(x.samples()).map(|(a, b)| a - b).collect();
        let rel = norm(&diff[l..n - l]) / norm(&x.samples()[l..n - l]);
        assert!(rel < 0.05, "relative deviation {rel}");
    }

    #[test]
    fn close_tones_split_into_first_imf() {
        use std::f64::consts::PI;
        let x = sample_function(|t| (5.0 * PI * t).cos() + (6.8 * PI * t).cos(), 0.0, 6.0, 1024).unwrap();
        let fast = sample_function(|t| (6.8 * PI * t).cos(), 0.0, 6.0, 1024).unwrap();
        let d = if_decompose(&x, &IfConfig::default()).unwrap();
        assert!(d.imfs.len() >= 2);
        let (a, b) = (middle(d.imfs[0].samples()), middle(fast.samples()));
        let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
        let corr = dot / (norm(a) * norm(b));
        assert!(corr > 0.9, "correlation {corr}");
    }

    #[test]
    fn zero_signal_has_no_imf() {
        let x = Signal::new(vec![0.0; 64], 0.0, 1.0).unwrap();
        assert!(matches!(
            if_extract_imf(&x, &IfConfig::default()),
            Err(Error::TooFewExtrema { .. })
        ));
        let d = if_decompose(&x, &IfConfig::default()).unwrap();
        assert!(d.imfs.is_empty());
        assert_eq!(d.residue.samples(), x.samples());
    }

    #[test]
    fn iteration_cap_respected() {
        let x = sample_function(|t| (10.0 * t).cos() + (3.0 * t).sin(), 0.0, 3.0, 512).unwrap();
        let cfg = IfConfig {
            max_inner: 2,
            ..IfConfig::default()
        };
        let (_, iters) = if_extract_imf(&x, &cfg).unwrap();
        assert!(iters <= 2);
    }

    #[test]
    fn decomposition_subtraction_chain_is_exact() {
        let x = sample_function(|t| (5.0 * std::f64::consts::PI * t).cos() + 0.3 * t, 0.0, 6.0, 512)
            .unwrap();
        let d = if_decompose(&x, &IfConfig::default()).unwrap();
        let mut chain = x.samples().to_vec();
        for imf in &d.imfs {
            for (c, v) in chain.iter_mut().zip(imf.samples()) {
                *c -= v;
            }
        }
        assert_eq!(chain, d.residue.samples());
        let again = if_decompose(&x, &IfConfig::default()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn rejects_bad_config() {
        let x = Signal::new(vec![0.0; 16], 0.0, 1.0).unwrap();
        let bad = IfConfig {
            inner_tol: 1.5,
            ..IfConfig::default()
        };
        assert!(if_decompose(&x, &bad).is_err());
        assert!(if_decompose(&Signal::new(vec![0.0; 7], 0.0, 1.0).unwrap(), &IfConfig::default()).is_err());
    }
}

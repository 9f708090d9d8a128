use super::extrema::find_extrema;
use super::spline::NaturalSpline;
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Number of extrema mirrored past each end before fitting an envelope.
const MIRRORED: usize = 2;

fn envelope(x: &[f64], idx: &[usize]) -> Result<Vec<f64>> {
    let last = (x.len() - 1) as f64;
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(idx.len() + 2 * MIRRORED);
    for &i in idx.iter().take(MIRRORED).rev() {
        knots.push((-(i as f64), x[i]));
    }
    knots.extend(idx.iter().map(|&i| (i as f64, x[i])));
    for &i in idx.iter().rev().take(MIRRORED) {
        knots.push((2.0 * last - i as f64, x[i]));
    }
    let (xs, ys) = knots.into_iter().unzip();
    let spline = NaturalSpline::new(xs, ys)?;
    Ok((0..x.len()).map(|k| spline.eval(k as f64)).collect())
}

/// Mean of the natural cubic-spline envelopes through the maxima and minima.
///
/// The two extrema nearest each end are mirrored about the end sample so the
/// envelopes cover the whole grid.
pub fn csa_average(x: &Signal) -> Result<Signal> {
    let (maxima, minima) = find_extrema(x.samples());
    let found = maxima.len().min(minima.len());
    if found < 2 {
        return Err(Error::TooFewExtrema { needed: 2, found });
    }
    let upper = envelope(x.samples(), &maxima)?;
    let lower = envelope(x.samples(), &minima)?;
    x.with_samples(upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect())
}

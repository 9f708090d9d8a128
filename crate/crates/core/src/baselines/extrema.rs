/// Indices of interior local maxima and minima.
///
/// An extremum is a sign change of the first difference. A flat run between
/// the two changes reports its midpoint, rounded down. Endpoints are never
/// extrema.
pub fn find_extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    // (sign of the last non-zero difference, index where the run after it starts)
    let mut last: Option<(f64, usize)> = None;
    for i in 0..x.len().saturating_sub(1) {
        let d = x[i + 1] - x[i];
        if d == 0.0 {
            continue;
        }
        let s = d.signum();
        if let Some((prev, start)) = last {
            if prev != s {
                let mid = (start + i) / 2;
                if prev > 0.0 {
                    maxima.push(mid);
                } else {
                    minima.push(mid);
                }
            }
        }
        last = Some((s, i + 1));
    }
    (maxima, minima)
}

/// Total number of interior extrema.
pub fn count_extrema(x: &[f64]) -> usize {
    let (a, b) = find_extrema(x);
    a.len() + b.len()
}

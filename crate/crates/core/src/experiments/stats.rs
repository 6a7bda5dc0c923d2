//! Trend statistics and least-squares fits used by the verdicts.

/// Kendall rank correlation τ_b of the pairs (x_i, y_i).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    kendall_tau_resolved(x, y, 0.0)
}

/// τ_b with y-differences below `rel_resolution`·max|y| counted as ties.
pub fn kendall_tau_resolved(x: &[f64], y: &[f64], rel_resolution: f64) -> f64 {
    let n = x.len().min(y.len());
    let res = rel_resolution * y[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut tie_x, mut tie_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[j] - x[i];
            let dy = if (y[j] - y[i]).abs() <= res { 0.0 } else { y[j] - y[i] };
            match (dx == 0.0, dy == 0.0) {
                (true, true) => {}
                (true, false) => tie_x += 1,
                (false, true) => tie_y += 1,
                _ => {
                    if dx * dy > 0.0 {
                        concordant += 1
                    } else {
                        discordant += 1
                    }
                }
            }
        }
    }
    let n0 = (concordant + discordant) as f64;
    let denom = ((n0 + tie_x as f64) * (n0 + tie_y as f64)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (concordant - discordant) as f64 / denom
    }
}

/// Kendall τ of `values` against growth as h decreases: positive when the
/// values systematically increase towards small h.
pub fn trend_towards_small_h(h: &[f64], values: &[f64]) -> f64 {
    trend_towards_small_h_resolved(h, values, 0.0)
}

/// As [`trend_towards_small_h`], with relative value resolution.
pub fn trend_towards_small_h_resolved(h: &[f64], values: &[f64], rel_resolution: f64) -> f64 {
    let neg_log_h: Vec<f64> = h.iter().map(|h| -h.ln()).collect();
    kendall_tau_resolved(&neg_log_h, values, rel_resolution)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual.
    pub rms: f64,
}

/// Ordinary least squares y ≈ slope·x + intercept.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = x[..n].iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x[..n]
        .iter()
        .zip(&y[..n])
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Some(LineFit { slope, intercept, rms })
}

/// max/min of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

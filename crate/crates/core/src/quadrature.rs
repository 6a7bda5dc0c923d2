//! Gauss rules on reference intervals.

use std::num::NonZeroUsize;

use gauss_quad::jacobi::GaussJacobi;
use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn legendre_unit(q: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(q).expect("positive rule size"));
    let mut out: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(t, w)| (0.5 * (t + 1.0), 0.5 * w))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Nodes and weights on [0, 1] for ∫₀¹ t^p f(t) dt, p > −1.
pub fn jacobi_unit(q: usize, p: f64) -> Vec<(f64, f64)> {
    let beta = p.try_into().expect("exponent above -1");
    let rule = GaussJacobi::new(NonZeroUsize::new(q).expect("positive rule size"), 0.0.try_into().unwrap(), beta);
    // (1 + t)^p on [−1, 1] maps to 2^p s^p on [0, 1] with dt = 2 ds
    let scale = 0.5f64.powf(p + 1.0);
    let mut out: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(t, w)| (0.5 * (t + 1.0), w * scale))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_moments() {
        let r = legendre_unit(5);
        for k in 0..10 {
            let s: f64 = r.iter().map(|(t, w)| w * t.powi(k)).sum();
            assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_moments() {
        for p in [-0.5, 0.3, 2.0, 4.5] {
            let r = jacobi_unit(6, p);
            for k in 0..8 {
                let s: f64 = r.iter().map(|(t, w)| w * t.powi(k)).sum();
                let exact = 1.0 / (k as f64 + p + 1.0);
                assert!((s - exact).abs() < 1e-12 * exact.max(1.0), "p={p} k={k}: {s} vs {exact}");
            }
        }
    }
}

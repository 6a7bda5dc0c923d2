//! Complex powers by contour integration,
//! (A)_w = (i/2π) ∫_γ λ^w (A − λ)^{−1} dλ for Re w < 0, with the contour
//! wrapped around the cut (−∞, 0], and A_w = A^k A_{w−k} beyond.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::legendre_unit;
use crate::radial::RadialOperator;
use crate::spectral::{resolvent_apply, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeeleyError {
    #[error("contour offset must lie in (0, 1/2), got {0}")]
    BadEpsilon(f64),
    #[error("ray truncation must be at least 10, got {0}")]
    BadRadius(f64),
    #[error("node count must be positive")]
    NoNodes,
    #[error("ray angle must lie in (0, pi/2), got {0}")]
    BadAngle(f64),
    #[error("contour integral needs Re w < 0, got w = {0}")]
    NonNegativeOrder(Complex64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    UpperRay,
    Arc,
    LowerRay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ContourKind {
    /// Rays Im λ = ±ε joined by the half circle |λ| = ε through +ε.
    Horizontal,
    /// Rays arg λ = ±(π − δ) joined by the arc |λ| = ε through +ε.
    Radial { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourNode {
    pub lambda: Complex64,
    /// dλ quadrature weight times i/2π.
    pub weight: Complex64,
    pub segment: Segment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub epsilon: f64,
    pub r_max: f64,
    pub kind: ContourKind,
    pub nodes: Vec<ContourNode>,
}

/// Gauss–Legendre panels in log r on [r0, r1], one panel per decade.
fn log_panels(r0: f64, r1: f64, per_decade: usize) -> Vec<(f64, f64)> {
    let rule = legendre_unit(per_decade);
    let (t0, t1) = (r0.ln(), r1.ln());
    let decade = std::f64::consts::LN_10;
    let panels = ((t1 - t0) / decade).ceil().max(1.0) as usize;
    let width = (t1 - t0) / panels as f64;
    let mut out = Vec::with_capacity(panels * per_decade);
    for p in 0..panels {
        let a = t0 + p as f64 * width;
        for &(u, w) in &rule {
            let t = a + u * width;
            let r = t.exp();
            out.push((r, w * width * r));
        }
    }
    out
}

fn check_common(epsilon: f64, r_max: f64, per_decade: usize) -> Result<(), SeeleyError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(SeeleyError::BadEpsilon(epsilon));
    }
    if !(r_max >= 10.0) || !r_max.is_finite() {
        return Err(SeeleyError::BadRadius(r_max));
    }
    if per_decade == 0 {
        return Err(SeeleyError::NoNodes);
    }
    Ok(())
}

/// The contour γ_ε = γ₃∘γ₂∘γ₁ with γ₁(s) = s + iε (s ∈ [−R_max, 0]),
/// γ₂(θ) = εe^{−iθ} (θ ∈ [−π/2, π/2]), γ₃(s) = −s − iε (s ∈ [0, R_max]).
pub fn build_contour(epsilon: f64, r_max: f64, nodes_per_decade: usize) -> Result<Contour, SeeleyError> {
    check_common(epsilon, r_max, nodes_per_decade)?;
    let pref = Complex64::new(0.0, 1.0 / (2.0 * PI));
    let i = Complex64::new(0.0, 1.0);
    // |s| on [0, ε] linearly, then logarithmic panels on [ε, R_max]
    let lin: Vec<(f64, f64)> = legendre_unit(nodes_per_decade)
        .into_iter()
        .map(|(u, w)| (u * epsilon, w * epsilon))
        .collect();
    let logs = log_panels(epsilon, r_max, nodes_per_decade);
    let mut abs_s: Vec<(f64, f64)> = lin.into_iter().chain(logs).collect();
    abs_s.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut nodes = Vec::new();
    // γ₁: from −R_max + iε to iε, dλ = ds
    for &(r, w) in abs_s.iter().rev() {
        nodes.push(ContourNode {
            lambda: Complex64::new(-r, epsilon),
            weight: pref * w,
            segment: Segment::UpperRay,
        });
    }
    // γ₂: θ from −π/2 to π/2, dλ = −iε e^{−iθ} dθ
    let arc = legendre_unit(nodes_per_decade.max(16));
    for &(u, w) in &arc {
        let theta = -0.5 * PI + u * PI;
        let e = Complex64::from_polar(1.0, -theta);
        nodes.push(ContourNode {
            lambda: e * epsilon,
            weight: pref * (-i * epsilon * e) * (w * PI),
            segment: Segment::Arc,
        });
    }
    // γ₃: from −iε to −R_max − iε, dλ = −ds
    for &(r, w) in &abs_s {
        nodes.push(ContourNode {
            lambda: Complex64::new(-r, -epsilon),
            weight: pref * (-w),
            segment: Segment::LowerRay,
        });
    }
    Ok(Contour {
        epsilon,
        r_max,
        kind: ContourKind::Horizontal,
        nodes,
    })
}

/// The radial deformation: rays at angle ±(π − δ) for ε ≤ |λ| ≤ R_max and
/// the arc |λ| = ε through +ε.
pub fn build_radial_contour(epsilon: f64, delta: f64, r_max: f64, nodes_per_decade: usize) -> Result<Contour, SeeleyError> {
    check_common(epsilon, r_max, nodes_per_decade)?;
    if !(delta > 0.0 && delta < 0.5 * PI) {
        return Err(SeeleyError::BadAngle(delta));
    }
    let pref = Complex64::new(0.0, 1.0 / (2.0 * PI));
    let i = Complex64::new(0.0, 1.0);
    let theta_top = PI - delta;
    let up = Complex64::from_polar(1.0, theta_top);
    let down = Complex64::from_polar(1.0, -theta_top);
    let logs = log_panels(epsilon, r_max, nodes_per_decade);
    let mut nodes = Vec::new();
    for &(r, w) in logs.iter().rev() {
        // inward along arg λ = π − δ
        nodes.push(ContourNode {
            lambda: up * r,
            weight: pref * (-up * w),
            segment: Segment::UpperRay,
        });
    }
    let arc = legendre_unit((2 * nodes_per_decade).max(24));
    for &(u, w) in &arc {
        // θ decreasing from π − δ to −(π − δ)
        let theta = theta_top - u * 2.0 * theta_top;
        let e = Complex64::from_polar(1.0, theta);
        nodes.push(ContourNode {
            lambda: e * epsilon,
            weight: pref * (-i * epsilon * e) * (w * 2.0 * theta_top),
            segment: Segment::Arc,
        });
    }
    for &(r, w) in &logs {
        nodes.push(ContourNode {
            lambda: down * r,
            weight: pref * (down * w),
            segment: Segment::LowerRay,
        });
    }
    Ok(Contour {
        epsilon,
        r_max,
        kind: ContourKind::Radial { delta },
        nodes,
    })
}

/// Principal branch λ^w with the cut along (−∞, 0].
pub fn principal_power(lambda: Complex64, w: Complex64) -> Complex64 {
    (w * lambda.ln()).exp()
}

impl Contour {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature of (i/2π) ∫ λ^w (a − λ)^{−1} dλ; equals a^w for Re w < 0
    /// up to quadrature and truncation error.
    pub fn scalar_power(&self, a: Complex64, w: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for node in &self.nodes {
            s += node.weight * principal_power(node.lambda, w) / (a - node.lambda);
        }
        s
    }

    /// Bound on the truncated ray tails, R_max^{Re w}/|Re w|.
    pub fn tail_bound(&self, w: Complex64) -> f64 {
        self.r_max.powf(w.re) / w.re.abs()
    }

    /// min over nodes of the distance to [lower, ∞).
    pub fn distance_to_half_line(&self, lower: f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| {
                if n.lambda.re >= lower {
                    n.lambda.im.abs()
                } else {
                    (n.lambda - lower).norm()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Σ_k weight_k λ_k^w (S − λ_k M)^{−1} M f, summed in node order.
pub fn contour_power_apply(
    op: &RadialOperator,
    contour: &Contour,
    w: Complex64,
    f: &[Complex64],
) -> Result<Vec<Complex64>, SeeleyError> {
    if w.re >= 0.0 {
        return Err(SeeleyError::NonNegativeOrder(w));
    }
    let parts: Vec<Vec<Complex64>> = contour
        .nodes
        .par_iter()
        .map(|node| {
            let u = resolvent_apply(op, node.lambda, f)?;
            let c = node.weight * principal_power(node.lambda, w);
            Ok(u.into_iter().map(|x| x * c).collect())
        })
        .collect::<Result<_, SpectralError>>()?;
    let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
    for p in &parts {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    Ok(out)
}

/// k = max(0, ⌈Re w⌉ + 1), so that Re(w − k) < 0.
pub fn continuation_order(w: Complex64) -> usize {
    (w.re.ceil() + 1.0).max(0.0) as usize
}

/// A_w = A^k A_{w−k} with the default k.
pub fn analytic_continuation_power(
    op: &RadialOperator,
    contour: &Contour,
    w: Complex64,
    f: &[Complex64],
) -> Result<Vec<Complex64>, SeeleyError> {
    analytic_continuation_power_k(op, contour, w, continuation_order(w), f)
}

/// A_w = A^k A_{w−k}. The k exact applications of M⁻¹S are made to f before
/// the contour integral; both factors are functions of the same operator.
pub fn analytic_continuation_power_k(
    op: &RadialOperator,
    contour: &Contour,
    w: Complex64,
    k: usize,
    f: &[Complex64],
) -> Result<Vec<Complex64>, SeeleyError> {
    let inner = w - k as f64;
    if inner.re >= 0.0 {
        return Err(SeeleyError::NonNegativeOrder(inner));
    }
    let mut g = f.to_vec();
    for _ in 0..k {
        g = op.apply(&g);
    }
    contour_power_apply(op, contour, inner, &g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn contour_geometry() {
        let k = build_contour(0.2, 1e4, 8).unwrap();
        for n in &k.nodes {
            match n.segment {
                Segment::UpperRay => assert!((n.lambda.im - 0.2).abs() < 1e-15 && n.lambda.re <= 0.0),
                Segment::LowerRay => assert!((n.lambda.im + 0.2).abs() < 1e-15 && n.lambda.re <= 0.0),
                Segment::Arc => assert!((n.lambda.norm() - 0.2).abs() < 1e-15 && n.lambda.re >= 0.0),
            }
        }
        assert!(k.distance_to_half_line(1.0) >= 1.0 - 0.2 - 1e-15);
        assert!(build_contour(0.6, 1e4, 8).is_err());
        assert!(build_contour(0.1, 5.0, 8).is_err());
        assert!(build_contour(0.1, 1e4, 0).is_err());
    }

    #[test]
    fn scalar_oracles() {
        let k = build_contour(0.1, 1e4, 40).unwrap();
        let v = k.scalar_power(c(1.0, 0.0), c(-1.0, 0.0));
        assert!((v - c(1.0, 0.0)).norm() < 1e-8, "{v}");

        let k = build_contour(0.1, 1e16, 24).unwrap();
        let v = k.scalar_power(c(2.0, 0.0), c(-0.5, 0.0));
        assert!((v - c(0.5f64.sqrt(), 0.0)).norm() < 1e-6, "{v}");

        let w = c(-0.7, 0.4);
        let a = k.scalar_power(c(3.0, 0.0), w);
        let b = build_contour(0.2, 1e16, 24).unwrap().scalar_power(c(3.0, 0.0), w);
        assert!((a - b).norm() < 1e-6);
        assert!((a - c(3.0, 0.0).powc(w)).norm() < 1e-6);
    }

    #[test]
    fn radial_deformation_agrees() {
        let h = build_contour(0.1, 1e16, 24).unwrap();
        let r = build_radial_contour(0.1, 0.05, 1e16, 24).unwrap();
        for &(a, w) in &[(1.5, c(-0.5, 0.0)), (40.0, c(-1.0, 1.0)), (1e5, c(-2.0, 0.0))] {
            let x = h.scalar_power(c(a, 0.0), w);
            let y = r.scalar_power(c(a, 0.0), w);
            assert!((x - y).norm() < 1e-8 * x.norm().max(1e-300) + 1e-12, "a={a}: {x} vs {y}");
        }
    }

    #[test]
    fn continuation_orders() {
        assert_eq!(continuation_order(c(1.0, 0.0)), 2);
        assert_eq!(continuation_order(c(0.5, 0.0)), 2);
        assert_eq!(continuation_order(c(0.0, 0.0)), 1);
        assert_eq!(continuation_order(c(2.0, 0.0)), 3);
        assert_eq!(continuation_order(c(-2.0, 0.0)), 0);
        for w in [c(1.0, 0.0), c(0.5, 1.0), c(0.0, 0.0), c(-0.5, 0.0), c(-3.0, 0.0)] {
            assert!((w - continuation_order(w) as f64).re < 0.0);
        }
    }
}

#[cfg(test)]
mod operator_tests {
    use super::*;
    use crate::model::ConeModel;
    use crate::radial::{assemble_mode_operator, RadialGrid};
    use crate::spectral::{eigendecompose, functional_power_apply, mass_norm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matches_functional_calculus() {
        let model = ConeModel::round(3, 1.0, 2).unwrap();
        let grid = RadialGrid::graded(1.0, 64, 1.0).unwrap();
        let contour = build_contour(0.1, 1e16, 24).unwrap();
        let mut worst: f64 = 0.0;
        let mut worst_k: f64 = 0.0;
        for mode in &model.angular_modes {
            let base = assemble_mode_operator(&model, &grid, mode, 1.0).unwrap();
            let dec0 = eigendecompose(&base).unwrap();
            let f: Vec<Complex64> = grid.interpolate(|x| c((1.0 - x * x) * (1.0 + x), 0.0));
            for e in 2..=8 {
                let h = 0.5f64.powi(e);
                let op = base.with_h(h);
                let dec = dec0.at_h(h);
                for w in [c(-2.0, 0.0), c(-1.0, 0.0), c(-0.5, 0.0), c(-0.5, 1.0), c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0)] {
                    let a = analytic_continuation_power(&op, &contour, w, &f).unwrap();
                    let b = functional_power_apply(&dec, w * 2.0, &f);
                    let d: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                    let rel = mass_norm(&op.mass, &d) / mass_norm(&op.mass, &b);
                    worst = worst.max(rel);
                    let k = continuation_order(w);
                    let a1 = analytic_continuation_power_k(&op, &contour, w, k + 1, &f).unwrap();
                    let d: Vec<Complex64> = a.iter().zip(&a1).map(|(x, y)| x - y).collect();
                    worst_k = worst_k.max(mass_norm(&op.mass, &d) / mass_norm(&op.mass, &a));
                }
            }
        }
        eprintln!("worst {worst:e} k {worst_k:e}");
        assert!(worst < 1e-5);
        assert!(worst_k < 1e-8);
    }
}

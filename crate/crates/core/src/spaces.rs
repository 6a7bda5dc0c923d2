//! Weighted semiclassical cone Sobolev norms H_{c,h}^{s,α,τ}, semiclassical
//! b-norms H_{b,h}^{s,α} and domain norms of A_h^{w/2}, evaluated on per-mode
//! piecewise-linear functions with the b-density dx/x.
//!
//! For integer s ≥ 0 the cone norm is the b-derivative characterization
//! applied to W u, W = (x/(x+h))^{−α}(x+h)^{−τ}, with the vector fields
//! (h/(x+h)) x∂_x and (h/(x+h)) ∂_y. Negative orders are duals with respect
//! to the b-pairing; orders in (−1, 1) are discrete Hilbert interpolants.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::SymTridiagonal;
use crate::quadrature::{jacobi_unit, legendre_unit};
use crate::radial::RadialGrid;
use crate::spectral::{functional_power_apply, mass_norm, pencil_eigenpairs, SpectralDecomposition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("unsupported order s = {0}")]
    UnsupportedOrder(f64),
    #[error("weight exponent alpha = {0} too singular for piecewise-linear functions")]
    TooSingular(f64),
    #[error("semiclassical parameter must be positive, got {0}")]
    BadH(f64),
    #[error("vector has length {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("expected {expected} mode vectors, got {found}")]
    ModeCount { expected: usize, found: usize },
    #[error("trial set is empty")]
    EmptyTrialSet,
    #[error("domain norms are evaluated from a spectral decomposition")]
    DomainScale,
    #[error("no inclusion rule between these scales")]
    IncompatibleScales,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Cone,
    B,
    Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub scale: Scale,
    pub s: f64,
    pub alpha: f64,
    pub tau: f64,
    pub h: f64,
}

impl NormSpec {
    pub fn cone(s: f64, alpha: f64, tau: f64, h: f64) -> Self {
        Self {
            scale: Scale::Cone,
            s,
            alpha,
            tau,
            h,
        }
    }

    pub fn b(s: f64, alpha: f64, h: f64) -> Self {
        Self {
            scale: Scale::B,
            s,
            alpha,
            tau: alpha,
            h,
        }
    }

    /// The cone space identified with the domain of A_h^{w/2}:
    /// H_{c,h}^{Re w, Re w − n/2, −n/2}.
    pub fn domain_identification(n: usize, w_re: f64, h: f64) -> Self {
        let half = n as f64 / 2.0;
        Self::cone(w_re, w_re - half, -half, h)
    }

    pub fn with_h(self, h: f64) -> Self {
        Self { h, ..self }
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn neg(x: f64) -> f64 {
    (-x).max(0.0)
}

/// Exponent e such that h^e ‖u‖_to/‖u‖_from stays bounded as h → 0.
pub fn predicted_inclusion_power(from: &NormSpec, to: &NormSpec) -> Result<f64, SpaceError> {
    if from == to || (from.scale == to.scale && from.s == to.s && from.alpha == to.alpha && (from.scale == Scale::B || from.tau == to.tau)) {
        return Ok(0.0);
    }
    match (from.scale, to.scale) {
        (Scale::Cone, Scale::B) if from.s == to.s && from.alpha == to.alpha => {
            Ok(neg(from.tau - from.alpha) + neg(from.s))
        }
        (Scale::B, Scale::Cone) if from.s == to.s && from.alpha == to.alpha => Ok(pos(to.tau - to.alpha) + pos(to.s)),
        _ => Err(SpaceError::IncompatibleScales),
    }
}

#[derive(Debug, Clone, Copy)]
struct Weight {
    alpha: f64,
    tau: f64,
    h: f64,
    cone: bool,
}

impl Weight {
    fn from_spec(spec: &NormSpec, alpha: f64) -> Self {
        Self {
            alpha,
            tau: if spec.scale == Scale::B { alpha } else { spec.tau },
            h: spec.h,
            cone: spec.scale == Scale::Cone,
        }
    }

    /// Exponent p of the tip singularity W²/x ~ x^p.
    fn p(&self) -> f64 {
        -2.0 * self.alpha - 1.0
    }

    /// W²/x with the x^p factor removed.
    fn smooth(&self, x: f64) -> f64 {
        if self.cone {
            (x + self.h).powf(2.0 * (self.alpha - self.tau))
        } else {
            1.0
        }
    }

    fn density(&self, x: f64) -> f64 {
        x.powf(self.p()) * self.smooth(x)
    }

    /// W(x), the weight applied before differentiation.
    fn value(&self, x: f64) -> f64 {
        if self.cone {
            (x / (x + self.h)).powf(-self.alpha) * (x + self.h).powf(-self.tau)
        } else {
            x.powf(-self.alpha)
        }
    }

    fn rho(&self, x: f64) -> f64 {
        if self.cone {
            self.h / (x + self.h)
        } else {
            self.h
        }
    }

    /// x W′/W.
    fn log_derivative(&self, x: f64) -> f64 {
        if self.cone {
            -self.alpha + (self.alpha - self.tau) * x / (x + self.h)
        } else {
            -self.alpha
        }
    }

    /// Panel length limit at left end a.
    fn panel_limit(&self, a: f64) -> f64 {
        if self.cone {
            0.5 * (a + self.h)
        } else {
            0.5 * a
        }
    }
}

/// Element contributions [LL, LR, RR] of the L² part and the full s = 1 form.
#[derive(Default, Clone, Copy)]
struct ElementPair {
    zero: [f64; 3],
    one: [f64; 3],
}

#[allow(clippy::too_many_arguments)]
fn accumulate(acc: &mut ElementPair, wt: &Weight, lambda_sq: f64, x: f64, quad_w: f64, a: f64, b: f64, scale_out: f64) {
    let len = b - a;
    let phi = [(b - x) / len, (x - a) / len];
    let dphi = [-1.0 / len, 1.0 / len];
    let rho = wt.rho(x);
    let c = wt.log_derivative(x);
    let d = [c * phi[0] + x * dphi[0], c * phi[1] + x * dphi[1]];
    let idx = [(0, 0), (0, 1), (1, 1)];
    for (k, &(i, j)) in idx.iter().enumerate() {
        let z = phi[i] * phi[j];
        acc.zero[k] += quad_w * scale_out * z;
        acc.one[k] += quad_w * scale_out * ((1.0 + lambda_sq * rho * rho) * z + rho * rho * d[i] * d[j]);
    }
}

struct Gram {
    zero: SymTridiagonal,
    one: SymTridiagonal,
    /// Leading unknowns forced to vanish (infinite norm otherwise).
    pinned: usize,
}

const PANEL_ORDER: usize = 6;

fn assemble_gram(grid: &RadialGrid, lambda_sq: f64, wt: &Weight) -> Result<Gram, SpaceError> {
    let verts = grid.vertices();
    let dofs = grid.dofs();
    let rule = legendre_unit(PANEL_ORDER);
    let p = wt.p();
    // x^p is integrable against φ₀² for p > −1 and against φ₁² for p > −3;
    // otherwise the first element must carry the zero function
    let pinned = if p > -1.0 {
        0
    } else if p > -3.0 {
        1
    } else {
        2
    };
    if dofs <= pinned {
        return Err(SpaceError::TooSingular(wt.alpha));
    }
    let mut elems = Vec::with_capacity(verts.len() - 1);
    for e in 0..verts.len() - 1 {
        let (a, b) = (verts[e], verts[e + 1]);
        let mut acc = ElementPair::default();
        let mut lo = a;
        if e == 0 && pinned == 2 {
            elems.push(acc);
            continue;
        }
        if e == 0 {
            // x^p (or x^{p+2} once the tip value is pinned) by Gauss–Jacobi
            let b0 = if wt.cone { b.min(wt.h) } else { b };
            let pe = if pinned == 1 { p + 2.0 } else { p };
            let jr = jacobi_unit(PANEL_ORDER, pe);
            let scale = b0.powf(pe + 1.0);
            for &(t, w) in &jr {
                let x = b0 * t;
                let extra = if pinned == 1 { 1.0 / (x * x) } else { 1.0 };
                accumulate(&mut acc, wt, lambda_sq, x, w * scale, a, b, wt.smooth(x) * extra);
            }
            lo = b0;
        }
        while lo < b {
            let hi = (lo + wt.panel_limit(lo)).min(b);
            let len = hi - lo;
            for &(t, w) in &rule {
                let x = lo + t * len;
                accumulate(&mut acc, wt, lambda_sq, x, w * len, a, b, wt.density(x));
            }
            lo = hi;
        }
        if e == 0 && pinned == 1 {
            acc.zero[0] = 0.0;
            acc.zero[1] = 0.0;
            acc.one[0] = 0.0;
            acc.one[1] = 0.0;
        }
        elems.push(acc);
    }
    let mut zero = SymTridiagonal::zeros(dofs);
    let mut one = SymTridiagonal::zeros(dofs);
    for (e, acc) in elems.iter().enumerate() {
        let (i, j) = (e, e + 1);
        zero.diag[i] += acc.zero[0];
        one.diag[i] += acc.one[0];
        if j < dofs {
            zero.diag[j] += acc.zero[2];
            one.diag[j] += acc.one[2];
            zero.off[i] += acc.zero[1];
            one.off[i] += acc.one[1];
        }
    }
    let mut g = Gram { zero, one, pinned };
    pin(&mut g.zero, pinned);
    pin(&mut g.one, pinned);
    Ok(g)
}

/// Replace the first `k` rows and columns by the identity.
fn pin(m: &mut SymTridiagonal, k: usize) {
    for i in 0..k.min(m.dim()) {
        m.diag[i] = 1.0;
        if i < m.off.len() {
            m.off[i] = 0.0;
        }
    }
}

fn pinned_nonzero(u: &[Complex64], k: usize) -> bool {
    u.iter().take(k).any(|z| *z != Complex64::new(0.0, 0.0))
}

fn clear_pinned(v: &mut [Complex64], k: usize) {
    for z in v.iter_mut().take(k) {
        *z = Complex64::new(0.0, 0.0);
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Form {
        g: SymTridiagonal,
        pinned: usize,
    },
    Second {
        grid: RadialGrid,
        weight: WeightRepr,
        lambda_sq: f64,
    },
    Dual {
        g: SymTridiagonal,
        pairing: SymTridiagonal,
        pinned: usize,
    },
    Interp {
        theta: f64,
        sigma: Vec<f64>,
        vectors: Vec<Vec<f64>>,
        proj: SymTridiagonal,
        pinned: usize,
        dual: bool,
    },
}

#[derive(Debug, Clone, Copy)]
struct WeightRepr {
    alpha: f64,
    tau: f64,
    h: f64,
    cone: bool,
}

impl From<WeightRepr> for Weight {
    fn from(w: WeightRepr) -> Self {
        Self {
            alpha: w.alpha,
            tau: w.tau,
            h: w.h,
            cone: w.cone,
        }
    }
}

/// A norm prepared for repeated evaluation on one mode and grid.
#[derive(Debug, Clone)]
pub struct NormEvaluator {
    pub spec: NormSpec,
    dofs: usize,
    kind: Kind,
}

const ORDER_TOL: f64 = 1e-12;

impl NormEvaluator {
    /// `n` is the cone dimension (for the pairing x^{n−1}dx), `lambda_sq`
    /// the cross-section eigenvalue of the mode.
    pub fn new(spec: NormSpec, grid: &RadialGrid, n: usize, lambda_sq: f64) -> Result<Self, SpaceError> {
        if spec.scale == Scale::Domain {
            return Err(SpaceError::DomainScale);
        }
        if !(spec.h > 0.0) {
            return Err(SpaceError::BadH(spec.h));
        }
        let s = spec.s;
        let nf = n as f64;
        let dual_spec = NormSpec {
            alpha: -spec.alpha - nf,
            tau: -spec.tau - nf,
            ..spec
        };
        let kind = if (s - 2.0).abs() < ORDER_TOL {
            let w = Weight::from_spec(&spec, spec.alpha);
            Kind::Second {
                grid: grid.clone(),
                weight: WeightRepr {
                    alpha: w.alpha,
                    tau: w.tau,
                    h: w.h,
                    cone: w.cone,
                },
                lambda_sq,
            }
        } else if s.abs() < ORDER_TOL || (s - 1.0).abs() < ORDER_TOL {
            let g = assemble_gram(grid, lambda_sq, &Weight::from_spec(&spec, spec.alpha))?;
            let m = if s.abs() < ORDER_TOL { g.zero } else { g.one };
            Kind::Form { g: m, pinned: g.pinned }
        } else if (s + 1.0).abs() < ORDER_TOL {
            let g = assemble_gram(grid, lambda_sq, &Weight::from_spec(&dual_spec, dual_spec.alpha))?;
            Kind::Dual {
                g: g.one,
                pairing: pairing_matrix(grid, n),
                pinned: g.pinned,
            }
        } else if s > 0.0 && s < 1.0 {
            let (sigma, vectors, zero, pinned) = interpolation_pencil(grid, lambda_sq, &spec, s)?;
            Kind::Interp {
                theta: s,
                sigma,
                vectors,
                proj: zero,
                pinned,
                dual: false,
            }
        } else if s < 0.0 && s > -1.0 {
            let theta = -s;
            let (sigma, vectors, _, pinned) = interpolation_pencil(grid, lambda_sq, &dual_spec, theta)?;
            Kind::Interp {
                theta,
                sigma,
                vectors,
                proj: pairing_matrix(grid, n),
                pinned,
                dual: true,
            }
        } else {
            return Err(SpaceError::UnsupportedOrder(s));
        };
        Ok(Self {
            spec,
            dofs: grid.dofs(),
            kind,
        })
    }

    pub fn norm(&self, u: &[Complex64]) -> Result<f64, SpaceError> {
        if u.len() != self.dofs {
            return Err(SpaceError::Dimension {
                expected: self.dofs,
                found: u.len(),
            });
        }
        let sq = match &self.kind {
            Kind::Form { g, pinned } => {
                if pinned_nonzero(u, *pinned) {
                    return Ok(f64::INFINITY);
                }
                g.form_c(u)
            }
            Kind::Second { grid, weight, lambda_sq } => second_order_sq(grid, &(*weight).into(), *lambda_sq, u),
            Kind::Dual { g, pairing, pinned } => {
                let mut rhs = pairing.matvec_c(u);
                clear_pinned(&mut rhs, *pinned);
                let x = g.solve_spd_c(&rhs);
                rhs.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum()
            }
            Kind::Interp {
                theta,
                sigma,
                vectors,
                proj,
                pinned,
                dual,
            } => {
                if !dual && pinned_nonzero(u, *pinned) {
                    return Ok(f64::INFINITY);
                }
                let mut pu = proj.matvec_c(u);
                clear_pinned(&mut pu, *pinned);
                let power = if *dual { -theta } else { *theta };
                vectors
                    .iter()
                    .zip(sigma)
                    .map(|(v, &sg)| {
                        let c: Complex64 = v.iter().zip(&pu).map(|(a, b)| b * a).sum();
                        sg.powf(power) * c.norm_sqr()
                    })
                    .sum()
            }
        };
        Ok(sq.max(0.0).sqrt())
    }
}

/// ∫ φ_i φ_j x^{n−1} dx: the b-pairing after the substitution v = x^n ṽ.
fn pairing_matrix(grid: &RadialGrid, n: usize) -> SymTridiagonal {
    let half = -(n as f64) / 2.0;
    let wt = Weight {
        alpha: half,
        tau: half,
        h: 1.0,
        cone: false,
    };
    assemble_gram(grid, 0.0, &wt).expect("regular weight").zero
}

type InterpPencil = (Vec<f64>, Vec<Vec<f64>>, SymTridiagonal, usize);

/// Generalized eigenpairs of (G¹, G⁰) for the endpoint spaces
/// H^{0, α−θ, τ} and H^{1, α−θ+1, τ}, whose θ-interpolant has weight α.
fn interpolation_pencil(
    grid: &RadialGrid,
    lambda_sq: f64,
    spec: &NormSpec,
    theta: f64,
) -> Result<InterpPencil, SpaceError> {
    let a0 = spec.alpha - theta;
    let a1 = a0 + 1.0;
    let g0 = assemble_gram(grid, lambda_sq, &Weight::from_spec(spec, a0))?;
    let g1 = assemble_gram(grid, lambda_sq, &Weight::from_spec(spec, a1))?;
    let pinned = g0.pinned.max(g1.pinned);
    let mut zero = g0.zero;
    let mut one = g1.one;
    pin(&mut zero, pinned);
    pin(&mut one, pinned);
    let (sigma, vectors) = pencil_eigenpairs(&one, &zero);
    Ok((sigma, vectors, zero, pinned))
}

/// s = 2: v = W u, g = ρ x∂_x v by nodal gradient recovery, and
/// ‖v‖² + ‖g‖² + λ²‖ρv‖² + ‖ρx∂_x g‖² + 2λ²‖ρg‖² + λ⁴‖ρ²v‖² in L²_b.
fn second_order_sq(grid: &RadialGrid, wt: &Weight, lambda_sq: f64, u: &[Complex64]) -> f64 {
    let verts = grid.vertices();
    let nv = verts.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; nv];
    for i in 0..u.len() {
        let x = verts[i];
        v[i] = if i == 0 {
            if u[0] == zero || wt.alpha < 0.0 {
                zero
            } else if wt.alpha == 0.0 {
                u[0] * if wt.cone { wt.h.powf(-wt.tau) } else { 1.0 }
            } else {
                return f64::INFINITY;
            }
        } else {
            u[i] * wt.value(x)
        };
    }
    if v[0] != zero {
        return f64::INFINITY;
    }
    let slopes: Vec<Complex64> = (0..nv - 1).map(|e| (v[e + 1] - v[e]) / (verts[e + 1] - verts[e])).collect();
    let mut g = vec![zero; nv];
    for i in 0..nv {
        let s = if i == 0 {
            slopes[0]
        } else if i == nv - 1 {
            slopes[nv - 2]
        } else {
            (slopes[i - 1] + slopes[i]) * 0.5
        };
        g[i] = s * (wt.rho(verts[i]) * verts[i]);
    }
    let rule = legendre_unit(4);
    let mut total = 0.0;
    for e in 0..nv - 1 {
        let (a, b) = (verts[e], verts[e + 1]);
        let len = b - a;
        let dg = (g[e + 1] - g[e]) / len;
        for &(t, w) in &rule {
            let x = a + t * len;
            let vx = v[e] * (1.0 - t) + v[e + 1] * t;
            let gx = g[e] * (1.0 - t) + g[e + 1] * t;
            let r = wt.rho(x);
            let r2 = r * r;
            let dgx = dg * (r * x);
            let integrand = vx.norm_sqr() * (1.0 + lambda_sq * r2 + lambda_sq * lambda_sq * r2 * r2)
                + gx.norm_sqr() * (1.0 + 2.0 * lambda_sq * r2)
                + dgx.norm_sqr();
            total += w * len * integrand / x;
        }
    }
    total
}

/// Σ over modes of squared per-mode norms, square-rooted. `lambda_sq[j]` is
/// the cross-section eigenvalue belonging to `u[j]`.
pub fn cone_sobolev_norm(
    spec: &NormSpec,
    grid: &RadialGrid,
    n: usize,
    lambda_sq: &[f64],
    u: &[Vec<Complex64>],
) -> Result<f64, SpaceError> {
    if spec.scale != Scale::Cone && spec.scale != Scale::B {
        return Err(SpaceError::DomainScale);
    }
    if lambda_sq.len() != u.len() {
        return Err(SpaceError::ModeCount {
            expected: lambda_sq.len(),
            found: u.len(),
        });
    }
    let mut sq = 0.0;
    for (l, v) in lambda_sq.iter().zip(u) {
        let nv = NormEvaluator::new(*spec, grid, n, *l)?.norm(v)?;
        sq += nv * nv;
    }
    Ok(sq.sqrt())
}

/// ‖A_h^{w/2} u‖ in the metric L² norm.
pub fn domain_norm(dec: &SpectralDecomposition, w: Complex64, u: &[Complex64]) -> f64 {
    mass_norm(&dec.mass, &functional_power_apply(dec, w, u))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialVector {
    pub id: String,
    /// Position in the list of modes passed alongside.
    pub mode: usize,
    pub values: Vec<Complex64>,
}

/// Smooth tip bump (1 − (x/r)²)² on [0, r).
pub fn tip_bump(grid: &RadialGrid, radius: f64) -> Vec<Complex64> {
    grid.interpolate(|x| {
        let t = x / radius;
        let b = if t < 1.0 { (1.0 - t * t).powi(2) } else { 0.0 };
        Complex64::new(b, 0.0)
    })
}

/// Gaussian packet exp(−(x−x₀)²/(2σ²)) e^{iξ₀x/h}.
pub fn wave_packet(grid: &RadialGrid, x0: f64, xi0: f64, sigma: f64, h: f64) -> Vec<Complex64> {
    grid.interpolate(|x| {
        let g = (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp();
        Complex64::from_polar(g, xi0 * x / h)
    })
}

/// The declared trial set at semiclassical parameter h: for every mode the
/// lowest `eigs` eigenvectors, 10 tip bumps of radius 2^{−k} x_max and 5
/// wave packets of width √h/2 at ξ₀ = 1.
pub fn standard_trial_set(grid: &RadialGrid, decs: &[SpectralDecomposition], eigs: usize, h: f64) -> Vec<TrialVector> {
    let mut out = Vec::new();
    let xm = grid.x_max();
    for (j, dec) in decs.iter().enumerate() {
        for k in 0..eigs.min(dec.dim()) {
            out.push(TrialVector {
                id: format!("eig:mode={j}:k={k}"),
                mode: j,
                values: dec.vectors[k].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            });
        }
        for k in 1..=10 {
            out.push(TrialVector {
                id: format!("bump:mode={j}:r=2^-{k}"),
                mode: j,
                values: tip_bump(grid, xm * 0.5f64.powi(k)),
            });
        }
        for p in 0..5 {
            let x0 = xm * (0.3 + 0.1 * p as f64);
            out.push(TrialVector {
                id: format!("packet:mode={j}:x0={x0:.2}"),
                mode: j,
                values: wave_packet(grid, x0, 1.0, 0.5 * h.sqrt() * xm, h),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionRow {
    pub h: f64,
    /// max over trials of ‖u‖_to/‖u‖_from (a lower bound on the operator norm).
    pub ratio: f64,
    /// `ratio` × h^{predicted_power}.
    pub scaled_ratio: f64,
    pub predicted_power: f64,
    pub argmax: String,
}

/// Worst-case ratio ‖u‖_to/‖u‖_from over the trial set for every h.
pub fn inclusion_constant_sweep<F>(
    from: &NormSpec,
    to: &NormSpec,
    h_values: &[f64],
    grid: &RadialGrid,
    n: usize,
    lambda_sq: &[f64],
    trial_set: F,
) -> Result<Vec<InclusionRow>, SpaceError>
where
    F: Fn(f64) -> Vec<TrialVector> + Sync,
{
    let power = predicted_inclusion_power(from, to)?;
    h_values
        .par_iter()
        .map(|&h| {
            let trials = trial_set(h);
            if trials.is_empty() {
                return Err(SpaceError::EmptyTrialSet);
            }
            let mut evals = Vec::with_capacity(lambda_sq.len());
            for &l in lambda_sq {
                evals.push((
                    NormEvaluator::new(from.with_h(h), grid, n, l)?,
                    NormEvaluator::new(to.with_h(h), grid, n, l)?,
                ));
            }
            let mut best = (f64::NEG_INFINITY, String::new());
            for t in &trials {
                let (ef, et) = evals.get(t.mode).ok_or(SpaceError::ModeCount {
                    expected: lambda_sq.len(),
                    found: t.mode + 1,
                })?;
                let a = ef.norm(&t.values)?;
                let b = et.norm(&t.values)?;
                if a == 0.0 || !a.is_finite() {
                    continue;
                }
                let r = b / a;
                if r > best.0 {
                    best = (r, t.id.clone());
                }
            }
            Ok(InclusionRow {
                h,
                ratio: best.0,
                scaled_ratio: best.0 * h.powf(power),
                predicted_power: power,
                argmax: best.1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::graded(1.0, 200, 2.0).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn l2_b_norm_of_polynomial() {
        // ∫₀¹ x² (1−x)² dx/x = 1/12
        let g = grid();
        let u: Vec<Complex64> = g.interpolate(|x| c(x * (1.0 - x)));
        let nrm = NormEvaluator::new(NormSpec::cone(0.0, 0.0, 0.0, 0.5), &g, 3, 0.0)
            .unwrap()
            .norm(&u)
            .unwrap();
        assert!((nrm * nrm - 1.0 / 12.0).abs() < 1e-4, "{nrm}");
        // the tip value makes the unweighted L²_b norm infinite
        let one: Vec<Complex64> = g.interpolate(|_| c(1.0));
        let nrm = NormEvaluator::new(NormSpec::cone(0.0, 0.0, 0.0, 0.5), &g, 3, 0.0)
            .unwrap()
            .norm(&one)
            .unwrap();
        assert!(nrm.is_infinite());
    }

    #[test]
    fn metric_l2_identification() {
        // H^{0,−n/2,−n/2} is L²(x^{n−1}dx)
        let g = grid();
        let u: Vec<Complex64> = g.interpolate(|x| c((1.0 - x * x).powi(2)));
        for n in [3usize, 4] {
            let hf = n as f64 / 2.0;
            let a = NormEvaluator::new(NormSpec::cone(0.0, -hf, -hf, 0.1), &g, n, 0.0)
                .unwrap()
                .norm(&u)
                .unwrap();
            let m = pairing_matrix(&g, n);
            let b = m.form_c(&u).sqrt();
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn tip_bump_weight_ratio() {
        let h = 0.01;
        let g = RadialGrid::graded(1.0, 400, 3.0).unwrap();
        let u: Vec<Complex64> = g.interpolate(|x| {
            let t = (x - h) / (0.3 * h);
            c(if t.abs() < 1.0 { (1.0 - t * t).powi(3) } else { 0.0 })
        });
        let n1 = NormEvaluator::new(NormSpec::cone(0.0, 1.0, 0.0, h), &g, 3, 0.0).unwrap().norm(&u).unwrap();
        let n0 = NormEvaluator::new(NormSpec::cone(0.0, 0.0, 0.0, h), &g, 3, 0.0).unwrap().norm(&u).unwrap();
        // weight (x/(x+h))^{−α} at x ≈ h divides by 1/2, i.e. multiplies the norm by ≈ 2
        let r = n0 / n1;
        assert!((r - 0.5).abs() < 0.05, "{r}");
    }

    #[test]
    fn integer_orders_nest() {
        let g = grid();
        let u: Vec<Complex64> = g.interpolate(|x| c(x * (1.0 - x) * (1.0 + 3.0 * x)));
        let (h, alpha, tau) = (0.2, -0.5, -1.5);
        let e = |s: f64| NormEvaluator::new(NormSpec::cone(s, alpha, tau, h), &g, 3, 2.0).unwrap().norm(&u).unwrap();
        let (m1, z, p1, p2) = (e(-1.0), e(0.0), e(1.0), e(2.0));
        assert!(m1 <= z && z <= p1, "{m1} {z} {p1}");
        assert!(p2 >= 0.99 * p1, "{p2} {p1}");
    }

    #[test]
    fn half_order_is_an_interpolant() {
        // ‖u‖²_{1/2,α} ≤ ‖u‖_{0,α−1/2} ‖u‖_{1,α+1/2}
        let g = grid();
        let u: Vec<Complex64> = g.interpolate(|x| c((1.0 - x) * (0.5 + x)));
        let h = 0.1;
        for alpha in [-1.0, -0.75] {
            let e = |s: f64, a: f64| NormEvaluator::new(NormSpec::cone(s, a, -1.5, h), &g, 3, 2.0).unwrap().norm(&u).unwrap();
            let mid = e(0.5, alpha);
            assert!(mid * mid <= e(0.0, alpha - 0.5) * e(1.0, alpha + 0.5) * (1.0 + 1e-9));
            assert!(mid >= e(0.0, alpha - 0.5) * (1.0 - 1e-9));
        }
        // the negative half order is dual to the positive one: |⟨u, v⟩| ≤ ‖u‖_{−1/2,α} ‖v‖_{1/2,−α−n}
        let v: Vec<Complex64> = g.interpolate(|x| c((1.0 - x * x) * (2.0 - x)));
        let (alpha, tau) = (-2.0, -1.5);
        let nu = NormEvaluator::new(NormSpec::cone(-0.5, alpha, tau, h), &g, 3, 2.0).unwrap().norm(&u).unwrap();
        let nv = NormEvaluator::new(NormSpec::cone(0.5, -alpha - 3.0, -tau - 3.0, h), &g, 3, 2.0).unwrap().norm(&v).unwrap();
        let pair = pairing_matrix(&g, 3);
        let mu = pair.matvec_c(&u);
        let ip: Complex64 = mu.iter().zip(&v).map(|(a, b)| a * b.conj()).sum();
        assert!(ip.norm() <= nu * nv * (1.0 + 1e-9), "{} > {}", ip.norm(), nu * nv);
    }

    #[test]
    fn identical_specs_give_unit_ratio() {
        let g = grid();
        let spec = NormSpec::cone(1.0, -0.5, -1.5, 0.1);
        let trials = |h: f64| {
            vec![
                TrialVector {
                    id: "bump".into(),
                    mode: 0,
                    values: tip_bump(&g, 0.3),
                },
                TrialVector {
                    id: "packet".into(),
                    mode: 0,
                    values: wave_packet(&g, 0.5, 1.0, 0.1, h),
                },
            ]
        };
        let rows = inclusion_constant_sweep(&spec, &spec, &[0.25, 0.0625], &g, 3, &[0.0], trials).unwrap();
        for r in rows {
            assert!((r.ratio - 1.0).abs() < 1e-14);
            assert_eq!(r.predicted_power, 0.0);
        }
        assert!(inclusion_constant_sweep(&spec, &spec, &[0.25], &g, 3, &[0.0], |_| Vec::new()).is_err());
    }

    #[test]
    fn inclusion_powers() {
        let cone = NormSpec::cone(1.0, 0.3, 0.3, 0.1);
        let b = NormSpec::b(1.0, 0.3, 0.1);
        assert_eq!(predicted_inclusion_power(&cone, &b).unwrap(), 0.0);
        assert_eq!(predicted_inclusion_power(&b, &cone).unwrap(), 1.0);
        let cone = NormSpec::cone(-1.0, 0.0, -2.0, 0.1);
        let b = NormSpec::b(-1.0, 0.0, 0.1);
        assert_eq!(predicted_inclusion_power(&cone, &b).unwrap(), 3.0);
        assert_eq!(predicted_inclusion_power(&b, &cone).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_orders() {
        let g = grid();
        assert!(matches!(
            NormEvaluator::new(NormSpec::cone(3.0, 0.0, 0.0, 0.1), &g, 3, 0.0),
            Err(SpaceError::UnsupportedOrder(_))
        ));
        // strongly vanishing weights only see functions that vanish near the tip
        let e = NormEvaluator::new(NormSpec::cone(1.0, 1.5, 0.0, 0.1), &g, 3, 0.0).unwrap();
        let far: Vec<Complex64> = g.interpolate(|x| c(if x > 0.3 { (x - 0.3) * (1.0 - x) } else { 0.0 }));
        assert!(e.norm(&far).unwrap().is_finite());
        assert!(e.norm(&tip_bump(&g, 0.5)).unwrap().is_infinite());
    }
}

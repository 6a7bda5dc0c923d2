//! Generalized eigendecompositions of tridiagonal pencils (Sturm bisection
//! on inertia counts followed by inverse iteration), resolvent solves and
//! the functional calculus built on them.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::{SymTridiagonal, TridiagLu};
use crate::radial::RadialOperator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("spectral parameter {lambda} is within {tol:e} of the eigenvalue {nearest}")]
    NearSpectral {
        lambda: Complex64,
        nearest: f64,
        tol: f64,
    },
    #[error("eigendecomposition lost M-orthonormality: defect {defect:e}, relative gap {min_gap:e}")]
    Breakdown { defect: f64, min_gap: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
}

/// Smallest `count` eigenvalues of the pencil (a, m), m positive definite,
/// by bisection on inertia counts.
pub fn pencil_eigenvalues(a: &SymTridiagonal, m: &SymTridiagonal, count: usize) -> Vec<f64> {
    let n = a.dim();
    let count = count.min(n);
    let upper = a.pencil_upper_bound(m);
    let lower = lower_bound(a, m);
    (0..count)
        .into_par_iter()
        .map(|k| bisect_eigenvalue(a, m, k, lower, upper))
        .collect()
}

fn lower_bound(a: &SymTridiagonal, m: &SymTridiagonal) -> f64 {
    let mut lo = -1.0;
    while a.pencil_count_below(m, lo) > 0 {
        lo *= 2.0;
    }
    lo
}

/// The k-th (0-based) eigenvalue of the pencil inside [lo, hi].
pub fn bisect_eigenvalue(a: &SymTridiagonal, m: &SymTridiagonal, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if a.pencil_count_below(m, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

fn m_normalize(v: &mut [f64], m: &SymTridiagonal) {
    let nrm = m.form(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= nrm;
    }
}

fn inverse_iteration(
    a: &SymTridiagonal,
    m: &SymTridiagonal,
    shift: f64,
    seed: u64,
    previous: &[Vec<f64>],
) -> Vec<f64> {
    let n = a.dim();
    let one = Complex64::new(1.0, 0.0);
    let lu = TridiagLu::factor_combination(a, one, m, Complex64::new(-shift, 0.0));
    let mut v = start_vector(n, seed);
    m_normalize(&mut v, m);
    for _ in 0..4 {
        let rhs: Vec<Complex64> = m.matvec(&v).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        v = lu.solve(&rhs).into_iter().map(|z| z.re).collect();
        for p in previous {
            let c = m.form(p, &v);
            for (x, y) in v.iter_mut().zip(p) {
                *x -= c * y;
            }
        }
        m_normalize(&mut v, m);
    }
    // fix the sign so the largest component is positive
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    if v[imax] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    v
}

/// Full eigendecomposition of the pencil (a, m): eigenvalues ascending and
/// m-orthonormal eigenvectors.
pub fn pencil_eigenpairs(a: &SymTridiagonal, m: &SymTridiagonal) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.dim();
    let vals = pencil_eigenvalues(a, m, n);
    // clusters of relatively close eigenvalues are orthogonalized together
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        let split = k == n || {
            let scale = vals[k].abs().max(vals[k - 1].abs()).max(f64::MIN_POSITIVE);
            (vals[k] - vals[k - 1]) > 1e-7 * scale
        };
        if split {
            clusters.push((start, k));
            start = k;
        }
    }
    let mut vecs: Vec<Vec<f64>> = clusters
        .par_iter()
        .flat_map_iter(|&(s, e)| {
            let mut local: Vec<Vec<f64>> = Vec::with_capacity(e - s);
            for (k, &mu) in vals.iter().enumerate().take(e).skip(s) {
                let v = inverse_iteration(a, m, mu, k as u64 + 1, &local);
                local.push(v);
            }
            local
        })
        .collect();
    vecs.truncate(n);
    (vals, vecs)
}

/// Eigenpairs of one mode at a given h. The eigenvectors are those of the
/// h-free pencil (K, M); eigenvalues of A_h are μ = 1 + h² κ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub h: f64,
    pub laplacian_eigenvalues: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub mass: SymTridiagonal,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rescale to another semiclassical parameter.
    pub fn at_h(&self, h: f64) -> Self {
        Self {
            h,
            eigenvalues: self.laplacian_eigenvalues.iter().map(|k| 1.0 + h * h * k).collect(),
            ..self.clone()
        }
    }

    /// Coefficients ⟨f, v_k⟩_M.
    pub fn coefficients(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mf = self.mass.matvec_c(f);
        self.vectors
            .par_iter()
            .map(|v| v.iter().zip(&mf).map(|(a, b)| b * a).sum())
            .collect()
    }

    /// Σ c_k v_k.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.mass.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }

    /// g(A) f = Σ g(μ_k) ⟨f, v_k⟩_M v_k.
    pub fn apply_function<G: Fn(f64) -> Complex64 + Sync>(&self, g: G, f: &[Complex64]) -> Vec<Complex64> {
        let c = self.coefficients(f);
        let scaled: Vec<Complex64> = c.iter().zip(&self.eigenvalues).map(|(c, &mu)| c * g(mu)).collect();
        self.synthesize(&scaled)
    }

    /// max |V^T M V − I|.
    pub fn orthonormality_defect(&self) -> f64 {
        let mv: Vec<Vec<f64>> = self.vectors.par_iter().map(|v| self.mass.matvec(v)).collect();
        self.vectors
            .par_iter()
            .enumerate()
            .map(|(i, vi)| {
                let mut worst: f64 = 0.0;
                for (j, mvj) in mv.iter().enumerate() {
                    let g: f64 = vi.iter().zip(mvj).map(|(a, b)| a * b).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Full pencil eigendecomposition of a radial operator, with
/// M-orthonormality verified.
pub fn eigendecompose(op: &RadialOperator) -> Result<SpectralDecomposition, SpectralError> {
    let (kappa, vectors) = pencil_eigenpairs(&op.laplacian, &op.mass);
    let dec = SpectralDecomposition {
        h: op.h,
        eigenvalues: kappa.iter().map(|k| 1.0 + op.h * op.h * k).collect(),
        laplacian_eigenvalues: kappa,
        vectors,
        mass: op.mass.clone(),
    };
    let defect = spot_orthonormality(&dec);
    if defect > 1e-9 {
        let min_gap = dec
            .laplacian_eigenvalues
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[1].abs().max(1.0))
            .fold(f64::INFINITY, f64::min);
        return Err(SpectralError::Breakdown { defect, min_gap });
    }
    Ok(dec)
}

/// Orthonormality defect on a deterministic sample of neighbouring pairs,
/// linear in the dimension.
fn spot_orthonormality(dec: &SpectralDecomposition) -> f64 {
    let n = dec.vectors.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mvi = dec.mass.matvec(&dec.vectors[i]);
        for j in [i, i + 1, i + 2, (i * 7 + 3) % n.max(1)] {
            if j >= n {
                continue;
            }
            let g: f64 = dec.vectors[j].iter().zip(&mvi).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// Solve (S − λ̃M)u = M f.
pub fn resolvent_apply(op: &RadialOperator, lambda: Complex64, f: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
    let n = op.dim();
    if f.len() != n {
        return Err(SpectralError::Dimension {
            expected: n,
            found: f.len(),
        });
    }
    check_off_spectrum(op, lambda)?;
    let one = Complex64::new(1.0, 0.0);
    let lu = TridiagLu::factor_combination(&op.stiffness, one, &op.mass, -lambda);
    let rhs = op.mass.matvec_c(f);
    let mut u = lu.solve(&rhs);
    // one step of iterative refinement
    let r = residual(op, lambda, &u, &rhs);
    let rn: f64 = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let bn: f64 = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if rn > 1e-13 * bn {
        let du = lu.solve(&r);
        for (a, b) in u.iter_mut().zip(du) {
            *a += b;
        }
    }
    Ok(u)
}

/// b − (S − λ̃M)u.
pub fn residual(op: &RadialOperator, lambda: Complex64, u: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let su = op.stiffness.matvec_c(u);
    let mu = op.mass.matvec_c(u);
    b.iter()
        .zip(su.iter().zip(&mu))
        .map(|(b, (s, m))| b - (s - lambda * m))
        .collect()
}

fn check_off_spectrum(op: &RadialOperator, lambda: Complex64) -> Result<(), SpectralError> {
    let tol = 1e-10 * lambda.norm().max(1.0);
    // the discrete spectrum lies in [1, ∞)
    let dist_lower = if lambda.re >= 1.0 {
        lambda.im.abs()
    } else {
        Complex64::new(lambda.re - 1.0, lambda.im).norm()
    };
    if dist_lower > tol {
        return Ok(());
    }
    let r = lambda.re;
    let below = op.stiffness.pencil_count_below(&op.mass, r - tol);
    let above = op.stiffness.pencil_count_below(&op.mass, r + tol);
    if below != above {
        let nearest = bisect_eigenvalue(&op.stiffness, &op.mass, below, r - tol, r + tol);
        return Err(SpectralError::NearSpectral { lambda, nearest, tol });
    }
    Ok(())
}

/// A^{w/2} f = Σ μ_k^{w/2} ⟨f, v_k⟩_M v_k (principal branch).
pub fn functional_power_apply(dec: &SpectralDecomposition, w: Complex64, f: &[Complex64]) -> Vec<Complex64> {
    let half = w / 2.0;
    dec.apply_function(|mu| Complex64::new(mu, 0.0).powc(half), f)
}

/// Real vector to complex.
pub fn complexify(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// ‖x‖_M.
pub fn mass_norm(m: &SymTridiagonal, x: &[Complex64]) -> f64 {
    m.form_c(x).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConeModel;
    use crate::radial::{assemble_mode_operator, RadialGrid};

    fn op(n_nodes: usize, l: usize, h: f64) -> RadialOperator {
        let model = ConeModel::round(3, 1.0, 2).unwrap();
        let g = RadialGrid::graded(1.0, n_nodes, 2.0).unwrap();
        assemble_mode_operator(&model, &g, &model.angular_modes[l], h).unwrap()
    }

    #[test]
    fn pairs_satisfy_pencil() {
        let o = op(80, 1, 1.0);
        let dec = eigendecompose(&o).unwrap();
        assert!(dec.orthonormality_defect() < 1e-10);
        for (mu, v) in dec.eigenvalues.iter().zip(&dec.vectors).step_by(7) {
            let sv = o.stiffness.matvec(v);
            let mv = o.mass.matvec(v);
            let r: f64 = sv.iter().zip(&mv).map(|(s, m)| (s - mu * m).powi(2)).sum::<f64>().sqrt();
            let scale: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
            assert!(r <= 1e-10 * scale, "residual {r} at mu {mu}");
        }
    }

    #[test]
    fn lowest_eigenvalue_near_pi_squared() {
        let o = op(400, 0, 1.0);
        let low = pencil_eigenvalues(&o.stiffness, &o.mass, 1)[0];
        let exact = 1.0 + std::f64::consts::PI.powi(2);
        assert!((low - exact).abs() / exact < 5e-3);
    }

    #[test]
    fn h_scaling_law() {
        let o1 = op(60, 2, 1.0);
        let oh = o1.with_h(0.125);
        let e1 = pencil_eigenvalues(&o1.stiffness, &o1.mass, 10);
        let eh = pencil_eigenvalues(&oh.stiffness, &oh.mass, 10);
        for (a, b) in e1.iter().zip(&eh) {
            let predicted = 1.0 + 0.125f64.powi(2) * (a - 1.0);
            assert!((b - predicted).abs() < 1e-10 * b);
        }
    }

    #[test]
    fn resolvent_examples() {
        let o = op(64, 0, 1.0);
        let dec = eigendecompose(&o).unwrap();
        let f: Vec<Complex64> = o.grid.interpolate(|x| Complex64::new((1.0 - x) * (2.0 + x), 0.0));
        let u = resolvent_apply(&o, Complex64::new(0.0, 0.0), &f).unwrap();
        let back = o.stiffness.matvec_c(&u);
        let mf = o.mass.matvec_c(&f);
        let err: f64 = back.iter().zip(&mf).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let nrm: f64 = mf.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-10 * nrm);

        let k = 5;
        let vk = complexify(&dec.vectors[k]);
        let lam = Complex64::new(0.3, 0.7);
        let u = resolvent_apply(&o, lam, &vk).unwrap();
        let expect: Vec<Complex64> = vk.iter().map(|x| x / (dec.eigenvalues[k] - lam)).collect();
        let d: f64 = u.iter().zip(&expect).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(d < 1e-10);

        let u = resolvent_apply(&o, Complex64::new(-1.0, 0.0), &f).unwrap();
        assert!(mass_norm(&o.mass, &u) <= mass_norm(&o.mass, &f) / 2.0);

        let mu = dec.eigenvalues[3];
        let err = resolvent_apply(&o, Complex64::new(mu, 0.0), &f).unwrap_err();
        assert!(matches!(err, SpectralError::NearSpectral { .. }));
    }

    #[test]
    fn power_examples() {
        let o = op(64, 1, 0.5);
        let dec = eigendecompose(&o).unwrap();
        let f: Vec<Complex64> = o.grid.interpolate(|x| Complex64::new(x * (1.0 - x), 0.1 * x));
        let id = functional_power_apply(&dec, Complex64::new(0.0, 0.0), &f);
        let nf = mass_norm(&o.mass, &f);
        let diff = |a: &[Complex64], b: &[Complex64]| {
            let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            mass_norm(&o.mass, &d)
        };
        assert!(diff(&id, &f) < 1e-10 * nf);
        let a1 = functional_power_apply(&dec, Complex64::new(2.0, 0.0), &f);
        let direct = o.apply(&f);
        assert!(diff(&a1, &direct) < 1e-8 * mass_norm(&o.mass, &direct));
        let back = functional_power_apply(&dec, Complex64::new(2.0, 0.0), &functional_power_apply(&dec, Complex64::new(-2.0, 0.0), &f));
        assert!(diff(&back, &f) < 1e-8 * nf);
        // completeness of the spectral projectors
        let c = dec.coefficients(&f);
        let s = dec.synthesize(&c);
        assert!(diff(&s, &f) < 1e-8 * nf);
    }
}

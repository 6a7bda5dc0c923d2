//! Symmetric tridiagonal matrices and the handful of factorizations the
//! radial problems need: pencil inertia counts, real and complex
//! tridiagonal solves.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn matvec_c(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut s = x[i] * self.diag[i];
                if i > 0 {
                    s += x[i - 1] * self.off[i - 1];
                }
                if i + 1 < n {
                    s += x[i + 1] * self.off[i];
                }
                s
            })
            .collect()
    }

    /// `xᵀ A y` for real vectors.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// `x^H A x` for a complex vector (real because `A` is real symmetric).
    pub fn form_c(&self, x: &[Complex64]) -> f64 {
        let ax = self.matvec_c(x);
        x.iter().zip(&ax).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Number of eigenvalues of the pencil `(self, mass)` strictly below
    /// `sigma`, by Sylvester inertia of the LDLᵀ pivots of `self − σ mass`.
    pub fn pencil_count_below(&self, mass: &Self, sigma: f64) -> usize {
        let n = self.dim();
        let mut count = 0;
        let mut d_prev = 1.0;
        let mut e_prev = 0.0;
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..n {
            let a = self.diag[i] - sigma * mass.diag[i];
            let mut d = if i == 0 { a } else { a - e_prev * e_prev / d_prev };
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
            if i + 1 < n {
                e_prev = self.off[i] - sigma * mass.off[i];
            }
            d_prev = d;
        }
        count
    }

    /// An upper bound on the pencil spectrum of `(self, mass)`, found by
    /// doubling from the largest diagonal ratio until the inertia count is
    /// full.
    pub fn pencil_upper_bound(&self, mass: &Self) -> f64 {
        let n = self.dim();
        let mut sigma = (0..n)
            .map(|i| (self.diag[i] / mass.diag[i]).abs())
            .fold(1.0, f64::max);
        while self.pencil_count_below(mass, sigma) < n {
            sigma *= 2.0;
        }
        sigma
    }

    /// Solve `self · x = b` for a positive definite matrix (Thomas / LDLᵀ).
    pub fn solve_spd(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = self.diag[0];
        for i in 1..n {
            l[i - 1] = self.off[i - 1] / d[i - 1];
            d[i] = self.diag[i] - l[i - 1] * self.off[i - 1];
        }
        let mut y = b.to_vec();
        for i in 1..n {
            y[i] -= l[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= l[i] * y[i + 1];
        }
        y
    }

    pub fn solve_spd_c(&self, b: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = b.iter().map(|z| z.re).collect();
        let im: Vec<f64> = b.iter().map(|z| z.im).collect();
        let xr = self.solve_spd(&re);
        let xi = self.solve_spd(&im);
        xr.into_iter()
            .zip(xi)
            .map(|(a, b)| Complex64::new(a, b))
            .collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factorization with partial pivoting of a complex tridiagonal matrix
/// (the `gttrf` layout: one extra superdiagonal from row interchanges).
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<Complex64>,
    d: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swap: Vec<bool>,
    min_pivot: f64,
}

impl TridiagLu {
    /// Factor the tridiagonal matrix with subdiagonal `dl`, diagonal `d`,
    /// superdiagonal `du`.
    pub fn factor(dl: &[Complex64], d: &[Complex64], du: &[Complex64]) -> Self {
        let n = d.len();
        let mut dl = dl.to_vec();
        let mut d = d.to_vec();
        let mut du = du.to_vec();
        let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i].norm() > 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        let min_pivot = d.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        // an exactly singular pivot (inverse iteration at a converged shift)
        // is nudged so the solve returns a huge multiple of the null vector
        let scale = d.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for p in d.iter_mut() {
            if p.norm() == 0.0 {
                *p = Complex64::new(f64::EPSILON * scale, 0.0);
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swap,
            min_pivot,
        }
    }

    /// Factor the complex symmetric matrix `a·K + b·M` with `K, M` real.
    pub fn factor_combination(k: &SymTridiagonal, a: Complex64, m: &SymTridiagonal, b: Complex64) -> Self {
        let d: Vec<Complex64> = k
            .diag
            .iter()
            .zip(&m.diag)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let off: Vec<Complex64> = k
            .off
            .iter()
            .zip(&m.off)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::factor(&off, &d, &off)
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                x.swap(i, i + 1);
            }
            let t = self.dl[i] * x[i];
            x[i + 1] -= t;
        }
        if n == 0 {
            return x;
        }
        x[n - 1] /= self.d[n - 1];
        if n > 1 {
            let t = self.du[n - 2] * x[n - 1];
            x[n - 2] = (x[n - 2] - t) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            let t = self.du[i] * x[i + 1] + self.du2[i] * x[i + 2];
            x[i] = (x[i] - t) / self.d[i];
        }
        x
    }
}

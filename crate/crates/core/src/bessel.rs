//! Bessel functions J_ν of real order ν ≥ 0 and their positive zeros, for
//! the exact-cone eigenvalue oracle.

use thiserror::Error;

use crate::indicial::bessel_order;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("found only {found} of {wanted} zeros of J_{nu} in ({lo}, {hi})")]
    Bracketing {
        nu: f64,
        wanted: usize,
        found: usize,
        lo: f64,
        hi: f64,
    },
    #[error("order must be nonnegative, got {0}")]
    NegativeOrder(f64),
}

const SERIES_LIMIT: f64 = 20.0;

/// Γ(ν+1) (2/x)^ν J_ν(x) from the ascending series; has the sign of J_ν.
fn reduced_series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (nu + m));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && m > 0.5 * x {
            break;
        }
        if m > 400.0 {
            break;
        }
    }
    sum
}

fn ln_gamma(z: f64) -> f64 {
    // Lanczos approximation (g = 7, n = 9)
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut a = COEF[0];
    let t = z + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Hankel asymptotic expansion, valid for x well above ν².
fn asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p: f64 = 0.0;
    let mut q: f64 = 0.0;
    let mut a: f64 = 1.0; // a_k(ν) / x^k
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        let kk = k as f64;
        a *= (mu - (2.0 * kk + 1.0).powi(2)) / (8.0 * (kk + 1.0) * x);
        if a == 0.0 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_ν(x), ν ≥ 0, x ≥ 0.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT.max(nu * nu * 0.5) {
        let log_pref = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
        log_pref.exp() * reduced_series(nu, x)
    } else {
        asymptotic(nu, x)
    }
}

fn sign_function(nu: f64, x: f64) -> f64 {
    if x < SERIES_LIMIT.max(nu * nu * 0.5) {
        reduced_series(nu, x)
    } else {
        asymptotic(nu, x)
    }
}

/// The first `count` positive zeros of J_ν by a sign scan and bisection.
pub fn bessel_zeros(nu: f64, count: usize) -> Result<Vec<f64>, BesselError> {
    if nu < 0.0 {
        return Err(BesselError::NegativeOrder(nu));
    }
    let step = 0.05;
    let hi_limit = nu + 4.0 * (count as f64 + 2.0) + 20.0;
    let mut zeros = Vec::with_capacity(count);
    let mut x0 = 1e-3;
    let mut f0 = sign_function(nu, x0);
    while zeros.len() < count {
        let x1 = x0 + step;
        if x1 > hi_limit {
            return Err(BesselError::Bracketing {
                nu,
                wanted: count,
                found: zeros.len(),
                lo: 0.0,
                hi: hi_limit,
            });
        }
        let f1 = sign_function(nu, x1);
        if f0 == 0.0 {
            zeros.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = sign_function(nu, m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(zeros)
}

/// 1 + (j_{ν̄,m}/x_max)², m = 1..=count, with ν̄ = √(((n−2)/2)² + λ²): the
/// Friedrichs eigenvalues of Δ_g + 1 on the exact truncated cone.
pub fn bessel_oracle_eigenvalues(n: usize, lambda_sq: f64, x_max: f64, count: usize) -> Result<Vec<f64>, BesselError> {
    let nu = bessel_order(n, lambda_sq);
    Ok(bessel_zeros(nu, count)?
        .into_iter()
        .map(|j| 1.0 + (j / x_max).powi(2))
        .collect())
}

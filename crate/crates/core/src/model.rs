//! Cone geometry: dimension, radial extent, cross-section spectrum, warp
//! profile, and the semiclassical parameter grids.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension {0} is below 3")]
    DimensionTooSmall(usize),
    #[error("inadmissible model: {0}")]
    Inadmissible(String),
}

/// One eigenspace of the cross-section Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMode {
    pub index: usize,
    pub lambda_sq: f64,
    pub multiplicity: usize,
}

/// Log-conformal warp φ(x) = Σ c_k x^k, so that k(x) = e^{2φ(x)} k(0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warp {
    pub coeffs: Vec<f64>,
}

impl Warp {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeModel {
    pub n: usize,
    pub x_max: f64,
    pub angular_modes: Vec<AngularMode>,
    pub warp: Option<Warp>,
}

impl ConeModel {
    /// Exact cone over the round sphere S^{n−1} with modes ℓ = 0..=l_max.
    pub fn round(n: usize, x_max: f64, l_max: usize) -> Result<Self, ModelError> {
        Ok(Self {
            n,
            x_max,
            angular_modes: sphere_spectrum(n, l_max)?,
            warp: None,
        })
    }

    pub fn with_modes(n: usize, x_max: f64, lambda_sq: &[f64]) -> Self {
        Self {
            n,
            x_max,
            angular_modes: lambda_sq
                .iter()
                .enumerate()
                .map(|(index, &lambda_sq)| AngularMode {
                    index,
                    lambda_sq,
                    multiplicity: 1,
                })
                .collect(),
            warp: None,
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.warp.as_ref().map_or(0.0, |w| w.value(x))
    }

    pub fn dphi(&self, x: f64) -> f64 {
        self.warp.as_ref().map_or(0.0, |w| w.derivative(x))
    }

    pub fn is_exact(&self) -> bool {
        self.warp
            .as_ref()
            .is_none_or(|w| w.coeffs.iter().all(|&c| c == 0.0))
    }

    /// Metric density per cross-section volume, x^{n−1} e^{(n−1)φ(x)}.
    pub fn density(&self, x: f64) -> f64 {
        let m = (self.n - 1) as f64;
        x.powf(m) * (m * self.phi(x)).exp()
    }

    pub fn mode(&self, index: usize) -> Option<&AngularMode> {
        self.angular_modes.iter().find(|m| m.index == index)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let report = validate_model(self);
        if report.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = report.iter().map(|v| v.to_string()).collect();
            Err(ModelError::Inadmissible(msgs.join("; ")))
        }
    }
}

/// Dimension of the degree-ℓ spherical harmonics on S^{n−1}.
pub fn harmonic_dimension(n: usize, l: usize) -> usize {
    let binom = |a: usize, b: usize| -> usize {
        if b > a {
            return 0;
        }
        let mut r: u128 = 1;
        for i in 0..b {
            r = r * (a - i) as u128 / (i + 1) as u128;
        }
        r as usize
    };
    if l == 0 {
        1
    } else if l == 1 {
        n
    } else {
        binom(l + n - 1, n - 1) - binom(l + n - 3, n - 1)
    }
}

/// Spectrum of the round sphere S^{n−1}: λ² = ℓ(ℓ+n−2) for ℓ = 0..=l_max.
pub fn sphere_spectrum(n: usize, l_max: usize) -> Result<Vec<AngularMode>, ModelError> {
    if n < 3 {
        return Err(ModelError::DimensionTooSmall(n));
    }
    Ok((0..=l_max)
        .map(|l| AngularMode {
            index: l,
            lambda_sq: (l * (l + n - 2)) as f64,
            multiplicity: harmonic_dimension(n, l),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DimensionBelowThree(usize),
    NonPositiveRadius(f64),
    ModesUnsorted(usize),
    NegativeEigenvalue(usize),
    NonzeroFirstEigenvalue(f64),
    ZeroEigenvalueAfterFirst(usize),
    ZeroMultiplicity(usize),
    WarpNonzeroAtTip(f64),
    NonFinite(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionBelowThree(n) => write!(f, "dimension below 3 (n = {n})"),
            Violation::NonPositiveRadius(r) => write!(f, "radial extent must be positive (x_max = {r})"),
            Violation::ModesUnsorted(j) => write!(f, "angular modes not sorted at position {j}"),
            Violation::NegativeEigenvalue(j) => write!(f, "negative cross-section eigenvalue at mode {j}"),
            Violation::NonzeroFirstEigenvalue(l) => {
                write!(f, "first cross-section eigenvalue is {l}, expected 0 for a connected cross-section")
            }
            Violation::ZeroEigenvalueAfterFirst(j) => write!(f, "zero eigenvalue at mode {j} (cross-section not connected)"),
            Violation::ZeroMultiplicity(j) => write!(f, "zero multiplicity at mode {j}"),
            Violation::WarpNonzeroAtTip(v) => write!(f, "warp nonzero at tip (phi(0) = {v})"),
            Violation::NonFinite(what) => write!(f, "non-finite value in {what}"),
        }
    }
}

/// Every invariant violation of the model; empty iff admissible.
pub fn validate_model(m: &ConeModel) -> Vec<Violation> {
    let mut out = Vec::new();
    if m.n < 3 {
        out.push(Violation::DimensionBelowThree(m.n));
    }
    if !m.x_max.is_finite() {
        out.push(Violation::NonFinite("x_max"));
    } else if m.x_max <= 0.0 {
        out.push(Violation::NonPositiveRadius(m.x_max));
    }
    for (pos, mode) in m.angular_modes.iter().enumerate() {
        if !mode.lambda_sq.is_finite() {
            out.push(Violation::NonFinite("angular eigenvalue"));
            continue;
        }
        if mode.lambda_sq < 0.0 {
            out.push(Violation::NegativeEigenvalue(mode.index));
        }
        if mode.multiplicity == 0 {
            out.push(Violation::ZeroMultiplicity(mode.index));
        }
        if pos > 0 {
            let prev = m.angular_modes[pos - 1].lambda_sq;
            if mode.lambda_sq < prev {
                out.push(Violation::ModesUnsorted(pos));
            }
            if mode.lambda_sq == 0.0 {
                out.push(Violation::ZeroEigenvalueAfterFirst(mode.index));
            }
        }
    }
    if let Some(first) = m.angular_modes.first() {
        if first.lambda_sq.is_finite() && first.lambda_sq != 0.0 {
            out.push(Violation::NonzeroFirstEigenvalue(first.lambda_sq));
        }
    }
    if let Some(w) = &m.warp {
        if w.coeffs.iter().any(|c| !c.is_finite()) {
            out.push(Violation::NonFinite("warp coefficients"));
        } else {
            let v = w.value(0.0);
            if v != 0.0 {
                out.push(Violation::WarpNonzeroAtTip(v));
            }
        }
    }
    out
}

/// Semiclassical parameters and the weight pair (α, τ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub h_values: Vec<f64>,
    pub htilde_values: Option<Vec<f64>>,
    pub alpha: f64,
    pub tau: f64,
}

impl ParameterGrid {
    pub fn validate(&self, alpha_window: (f64, f64)) -> Result<(), ModelError> {
        let in_unit = |v: &f64| *v > 0.0 && *v < 1.0;
        if self.h_values.is_empty() || !self.h_values.iter().all(in_unit) {
            return Err(ModelError::Inadmissible("h values must lie in (0, 1)".into()));
        }
        if self.h_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ModelError::Inadmissible("h values must be strictly decreasing".into()));
        }
        if let Some(ht) = &self.htilde_values {
            if !ht.iter().all(in_unit) {
                return Err(ModelError::Inadmissible("h-tilde values must lie in (0, 1)".into()));
            }
        }
        if !(self.alpha > alpha_window.0 && self.alpha < alpha_window.1) {
            return Err(ModelError::Inadmissible(format!(
                "alpha = {} outside the window ({}, {})",
                self.alpha, alpha_window.0, alpha_window.1
            )));
        }
        Ok(())
    }

    /// Geometric sweep 2^{-a}, …, 2^{-b}.
    pub fn dyadic(a: i32, b: i32) -> Vec<f64> {
        (a..=b).map(|k| 2f64.powi(-k)).collect()
    }
}

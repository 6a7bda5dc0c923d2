//! Indicial roots, boundary spectra and truncated index sets with their
//! algebra (shifts, sums, extended unions, saturations), plus the index-set
//! families attached to resolvents and complex powers of h²Δ_g + 1.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ConeModel;

/// Absolute tolerance under which two exponents are treated as equal.
pub const EXPONENT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicialError {
    #[error("weight alpha = {alpha} lies on -Im spec_b: root {root} (mode {mode}, sign {sign})")]
    OnBoundarySpectrum {
        alpha: f64,
        root: Complex64,
        mode: usize,
        sign: RootSign,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootSign {
    Plus,
    Minus,
}

impl std::fmt::Display for RootSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RootSign::Plus => "+",
            RootSign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicialRoot {
    pub mode: usize,
    pub sign: RootSign,
    pub value: Complex64,
}

/// ν_± = i((n−2)/2 ± √(((n−2)/2)² + λ²)).
pub fn indicial_roots(n: usize, lambda_sq: f64) -> (IndicialRoot, IndicialRoot) {
    let c = (n as f64 - 2.0) / 2.0;
    let nu_bar = (c * c + lambda_sq).sqrt();
    let plus = IndicialRoot {
        mode: 0,
        sign: RootSign::Plus,
        value: Complex64::new(0.0, c + nu_bar),
    };
    let minus = IndicialRoot {
        mode: 0,
        sign: RootSign::Minus,
        value: Complex64::new(0.0, c - nu_bar),
    };
    (plus, minus)
}

/// √(((n−2)/2)² + λ²), the Bessel order attached to a mode.
pub fn bessel_order(n: usize, lambda_sq: f64) -> f64 {
    let c = (n as f64 - 2.0) / 2.0;
    (c * c + lambda_sq).sqrt()
}

/// Tip exponent of the regular solution of a mode in function
/// normalization: −(n−2)/2 + √(((n−2)/2)² + λ²).
pub fn recessive_exponent(n: usize, lambda_sq: f64) -> f64 {
    bessel_order(n, lambda_sq) - (n as f64 - 2.0) / 2.0
}

fn cmp_exponent(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn same_exponent(a: &Complex64, b: &Complex64) -> bool {
    (a - b).norm() <= EXPONENT_TOL
}

/// Finite truncation of an index set: distinct exponents with their maximal
/// log order, complete for Re z ≤ `cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSet {
    entries: Vec<(Complex64, u32)>,
    cutoff: f64,
}

/// Serialized entry `{re, im, k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub re: f64,
    pub im: f64,
    pub k: u32,
}

impl IndexSet {
    pub fn empty(cutoff: f64) -> Self {
        Self {
            entries: Vec::new(),
            cutoff,
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (Complex64, u32)>>(pairs: I, cutoff: f64) -> Self {
        let mut s = Self::empty(cutoff);
        for (z, k) in pairs {
            s.insert(z, k);
        }
        s
    }

    /// {(j, 0) : j ≥ start, j ≤ cutoff}.
    pub fn naturals(start: u32, cutoff: f64) -> Self {
        let top = if cutoff.is_finite() { cutoff.floor().max(-1.0) } else { -1.0 };
        let pairs = (start as i64..=top as i64).map(|j| (Complex64::new(j as f64, 0.0), 0));
        Self::from_pairs(pairs, cutoff)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct exponents with their maximal log order, sorted by (Re, Im).
    pub fn exponents(&self) -> &[(Complex64, u32)] {
        &self.entries
    }

    /// All (z, k) pairs, k = 0..=k_max for each exponent.
    pub fn pairs(&self) -> Vec<(Complex64, u32)> {
        self.entries
            .iter()
            .flat_map(|&(z, kmax)| (0..=kmax).map(move |k| (z, k)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(|(_, k)| *k as usize + 1).sum()
    }

    pub fn insert(&mut self, z: Complex64, k: u32) {
        if let Some(e) = self.entries.iter_mut().find(|(w, _)| same_exponent(w, &z)) {
            if cmp_exponent(&z, &e.0) == Ordering::Less {
                e.0 = z;
            }
            e.1 = e.1.max(k);
            return;
        }
        let pos = self
            .entries
            .binary_search_by(|(w, _)| cmp_exponent(w, &z))
            .unwrap_or_else(|p| p);
        self.entries.insert(pos, (z, k));
    }

    pub fn max_log(&self, z: Complex64) -> Option<u32> {
        self.entries
            .iter()
            .find(|(w, _)| same_exponent(w, &z))
            .map(|(_, k)| *k)
    }

    pub fn contains(&self, z: Complex64, k: u32) -> bool {
        self.max_log(z).is_some_and(|m| k <= m)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.entries.iter().all(|&(z, k)| other.contains(z, k))
    }

    pub fn inf_re(&self) -> Option<f64> {
        self.entries.first().map(|(z, _)| z.re)
    }

    pub fn max_log_order(&self) -> Option<u32> {
        self.entries.iter().map(|(_, k)| *k).max()
    }

    pub fn has_logs(&self) -> bool {
        self.entries.iter().any(|(_, k)| *k > 0)
    }

    /// E + c.
    pub fn shift(&self, c: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(z, k)| (z + c, k)).collect(),
            cutoff: self.cutoff + c.re,
        }
    }

    pub fn filter<F: Fn(Complex64, u32) -> bool>(&self, keep: F) -> Self {
        let mut out = Self::empty(self.cutoff);
        for (z, k) in self.pairs() {
            if keep(z, k) {
                out.insert(z, k);
            }
        }
        out
    }

    /// Drop entries with Re z > c and lower the cutoff to c.
    pub fn truncate(&self, c: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|(z, _)| z.re <= c + EXPONENT_TOL)
                .collect(),
            cutoff: self.cutoff.min(c),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = Self::empty(self.cutoff.min(other.cutoff));
        for &(z, k) in self.entries.iter().chain(&other.entries) {
            out.insert(z, k);
        }
        out
    }

    /// E ∪̄ F = E ∪ F ∪ {(z, j+k+1) : (z,j) ∈ E, (z,k) ∈ F}.
    pub fn extended_union(&self, other: &Self) -> Self {
        let mut out = self.union(other);
        for &(z, j) in &self.entries {
            if let Some(k) = other.max_log(z) {
                out.insert(z, j + k + 1);
            }
        }
        out
    }

    /// E + F = {(z + w, j + k)}.
    pub fn sum(&self, other: &Self) -> Self {
        let floor = |s: &Self| s.inf_re().map_or(s.cutoff, |m| m.min(s.cutoff));
        let cutoff = (self.cutoff + floor(other)).min(other.cutoff + floor(self));
        let mut out = Self::empty(cutoff);
        for &(z, j) in &self.entries {
            for &(w, k) in &other.entries {
                out.insert(z + w, j + k);
            }
        }
        out
    }

    /// ℕ₀-saturation ⋃_{j ∈ ℕ₀} (E + j), generated up to the cutoff.
    pub fn saturated(&self) -> Self {
        let mut out = Self::empty(self.cutoff);
        for &(z, k) in &self.entries {
            let mut j = 0.0;
            loop {
                let w = z + j;
                if j > 0.0 && w.re > self.cutoff + EXPONENT_TOL {
                    break;
                }
                out.insert(w, k);
                j += 1.0;
            }
        }
        out
    }

    /// Iterated extended union over integer shifts, ∪̄_{j ∈ ℕ₀} (E + j),
    /// generated up to the cutoff.
    pub fn hat(&self) -> Self {
        let mut out = self.clone();
        let Some(inf) = self.inf_re() else {
            return out;
        };
        let mut j = 1.0;
        while inf + j <= self.cutoff + EXPONENT_TOL {
            let mut shifted = self.shift(Complex64::new(j, 0.0));
            shifted.cutoff = self.cutoff;
            out = out.extended_union(&shifted);
            j += 1.0;
        }
        out
    }

    /// Index-set invariants below the cutoff: downward closure in the log
    /// order holds by construction; ℕ₀-shift closure is checked.
    pub fn is_index_set(&self) -> bool {
        self.entries.iter().all(|&(z, k)| {
            if z.re <= self.cutoff - 1.0 + EXPONENT_TOL {
                self.max_log(z + 1.0).is_some_and(|m| m >= k)
            } else {
                true
            }
        })
    }

    pub fn to_entries(&self) -> Vec<IndexEntry> {
        self.pairs()
            .into_iter()
            .map(|(z, k)| IndexEntry { re: z.re, im: z.im, k })
            .collect()
    }

    pub fn from_entries(entries: &[IndexEntry], cutoff: f64) -> Self {
        Self::from_pairs(entries.iter().map(|e| (Complex64::new(e.re, e.im), e.k)), cutoff)
    }
}

/// Boundary spectrum of x²Δ_g: all (ν_{j±}, 0) with |Im ν| ≤ `cutoff`.
/// The entries live in the Mellin variable σ, so the result is not an
/// ℕ₀-closed index set.
pub fn boundary_spectrum(model: &ConeModel, cutoff: f64) -> IndexSet {
    let mut out = IndexSet::empty(cutoff);
    for r in spectrum_roots(model) {
        if r.value.im.abs() <= cutoff + EXPONENT_TOL {
            out.insert(r.value, 0);
        }
    }
    out
}

/// Every indicial root of the model's listed modes.
pub fn spectrum_roots(model: &ConeModel) -> Vec<IndicialRoot> {
    model
        .angular_modes
        .iter()
        .flat_map(|m| {
            let (mut p, mut q) = indicial_roots(model.n, m.lambda_sq);
            p.mode = m.index;
            q.mode = m.index;
            [p, q]
        })
        .collect()
}

/// Reject α ∈ −Im spec_b, reporting the offending root.
pub fn check_weight(model: &ConeModel, alpha: f64) -> Result<(), IndicialError> {
    for r in spectrum_roots(model) {
        if (-r.value.im - alpha).abs() <= EXPONENT_TOL {
            return Err(IndicialError::OnBoundarySpectrum {
                alpha,
                root: r.value,
                mode: r.mode,
                sign: r.sign,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFamily {
    pub lb: IndexSet,
    pub ff: IndexSet,
    pub rb: IndexSet,
    pub tf: IndexSet,
}

/// E_lb(α) and E_rb(α), unsaturated.
pub fn boundary_index_sets(model: &ConeModel, alpha: f64, re_cutoff: f64) -> (IndexSet, IndexSet) {
    let i = Complex64::new(0.0, 1.0);
    let mut lb = IndexSet::empty(re_cutoff);
    let mut rb = IndexSet::empty(re_cutoff);
    for r in spectrum_roots(model) {
        let z_lb = i * r.value;
        if z_lb.re > alpha + EXPONENT_TOL {
            lb.insert(z_lb, 0);
        }
        let z_rb = -i * r.value;
        if z_rb.re > -alpha + EXPONENT_TOL {
            rb.insert(z_rb, 0);
        }
    }
    (lb, rb)
}

/// ℰ = (Ě_lb, Ě_ff + 2, Ě_rb + 2, ℕ₀) for the resolvent of h²Δ_g + 1,
/// truncated at `re_cutoff`.
pub fn resolvent_index_family(
    model: &ConeModel,
    alpha: f64,
    re_cutoff: f64,
) -> Result<IndexFamily, IndicialError> {
    check_weight(model, alpha)?;
    let (lb, rb) = boundary_index_sets(model, alpha, re_cutoff);
    let hat_lb = lb.hat();
    let hat_rb = rb.hat();
    let check_lb = hat_lb.extended_union(&hat_lb);
    let check_rb = hat_rb.extended_union(&hat_rb);
    let nat = IndexSet::naturals(1, re_cutoff);
    let nat0 = IndexSet::naturals(0, re_cutoff);
    let inner = check_lb.sum(&check_rb).truncate(re_cutoff).extended_union(&nat);
    let check_ff = nat0.sum(&inner).truncate(re_cutoff);
    let two = Complex64::new(2.0, 0.0);
    Ok(IndexFamily {
        lb: check_lb.truncate(re_cutoff),
        ff: check_ff.shift(two).truncate(re_cutoff),
        rb: check_rb.shift(two).truncate(re_cutoff),
        tf: nat0,
    })
}

/// ℰ(w) = (ℰ_lb, ℰ_ff(w), ℰ_rb, ℕ₀) for the complex power (h²Δ_g + 1)_w.
pub fn power_index_family(
    model: &ConeModel,
    alpha: f64,
    w: Complex64,
    re_cutoff: f64,
) -> Result<IndexFamily, IndicialError> {
    let base = resolvent_index_family(model, alpha, re_cutoff)?;
    let ff = power_front_face(&base.ff, model.n, w, re_cutoff);
    Ok(IndexFamily { ff, ..base })
}

/// The three-case front-face index set built from ℰ'_ff(w) = ℰ_ff ∪̄ (ℕ₀ − 2w).
pub fn power_front_face(e_ff: &IndexSet, n: usize, w: Complex64, re_cutoff: f64) -> IndexSet {
    if (w + 1.0).norm() <= 1e-12 {
        return e_ff.clone();
    }
    let top = re_cutoff + 2.0 * w.re;
    let count = if top >= 0.0 { top.floor() as u32 + 1 } else { 0 };
    let shifted = IndexSet::from_pairs(
        (0..count).map(|j| (Complex64::new(j as f64, 0.0) - 2.0 * w, 0)),
        re_cutoff,
    );
    let prime = e_ff.extended_union(&shifted);
    let half_n = n as f64 / 2.0;
    if w.re <= -half_n {
        prime.filter(|z, _| z.re >= n as f64 - EXPONENT_TOL)
    } else {
        let bound = -2.0 * w.re;
        prime.filter(|z, k| {
            if k > 0 {
                z.re > bound + EXPONENT_TOL
            } else {
                z.re >= bound - EXPONENT_TOL
            }
        })
    }
}

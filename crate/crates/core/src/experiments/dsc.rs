//! Two-parameter invertibility of h̃²A_h − ω̃.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::verdict::{Report, Verdict};
use super::ExperimentError;
use crate::banded::SymTridiagonal;
use crate::model::ConeModel;
use crate::radial::{assemble_mode_operator, RadialGrid};
use crate::spectral::bisect_eigenvalue;

/// Distance from `t` to the pencil spectrum of (s, m), by Sturm counts and
/// bisection on the two neighbouring eigenvalues.
pub fn distance_to_pencil_spectrum(s: &SymTridiagonal, m: &SymTridiagonal, t: f64) -> f64 {
    let n = s.dim();
    let below = s.pencil_count_below(m, t);
    let mut d = f64::INFINITY;
    if below > 0 {
        let lo = t.min(0.0) - 1.0;
        let mu = bisect_eigenvalue(s, m, below - 1, lo, t);
        d = d.min(t - mu);
    }
    if below < n {
        let hi = s.pencil_upper_bound(m).max(t) * 2.0 + 1.0;
        let mu = bisect_eigenvalue(s, m, below, t, hi);
        d = d.min(mu - t);
    }
    d
}

/// Smallest generalized singular value of (h̃²S − ω̃M, M): the operator is
/// normal in the M inner product, so σ_min² = (Im ω̃)² + min_k (h̃²μ_k − Re ω̃)².
pub fn min_singular_value(s: &SymTridiagonal, m: &SymTridiagonal, htilde: f64, omega: Complex64) -> f64 {
    let t2 = htilde * htilde;
    let d = t2 * distance_to_pencil_spectrum(s, m, omega.re / t2);
    (omega.im * omega.im + d * d).sqrt()
}

/// dist(ω̃, [h̃², ∞)): the oracle lower bound from σ(A_h) ⊂ [1, ∞).
pub fn numerical_range_distance(htilde: f64, omega: Complex64) -> f64 {
    let a = htilde * htilde;
    if omega.re >= a {
        omega.im.abs()
    } else {
        (omega - a).norm()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DscRow {
    pub h: f64,
    pub htilde: f64,
    pub sigma_min: f64,
    pub oracle: f64,
    pub mode: usize,
}

/// PASS when σ_min ≥ (1 − rel_slack)·oracle at every grid point and the
/// oracle itself gives a uniform positive bound.
pub fn dsc_invertibility_sweep(
    model: &ConeModel,
    grid: &RadialGrid,
    h_values: &[f64],
    htilde_values: &[f64],
    omega: Complex64,
    rel_slack: f64,
) -> Result<Report, ExperimentError> {
    let bases = model
        .angular_modes
        .iter()
        .map(|m| assemble_mode_operator(model, grid, m, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(f64, f64)> = h_values.iter().flat_map(|&h| htilde_values.iter().map(move |&t| (h, t))).collect();
    let rows: Vec<DscRow> = jobs
        .par_iter()
        .map(|&(h, t)| {
            let mut best = (f64::INFINITY, 0);
            for (j, b) in bases.iter().enumerate() {
                let op = b.with_h(h);
                let s = min_singular_value(&op.stiffness, &op.mass, t, omega);
                if s < best.0 {
                    best = (s, j);
                }
            }
            DscRow {
                h,
                htilde: t,
                sigma_min: best.0,
                oracle: numerical_range_distance(t, omega),
                mode: best.1,
            }
        })
        .collect();
    let ok_bound = rows.iter().all(|r| r.sigma_min >= (1.0 - rel_slack) * r.oracle);
    let c_oracle = rows.iter().map(|r| r.oracle).fold(f64::INFINITY, f64::min);
    let worst = rows
        .iter()
        .min_by(|a, b| a.sigma_min.total_cmp(&b.sigma_min))
        .cloned()
        .expect("nonempty grid");
    let lower = rows.iter().map(|r| r.sigma_min / r.oracle).fold(f64::INFINITY, f64::min);
    let mut report = Report::new("dsc-invertibility");
    report
        .param("n", model.n)
        .param("omega_tilde", [omega.re, omega.im])
        .param("h_values", h_values)
        .param("htilde_values", htilde_values)
        .param("rel_slack", rel_slack)
        .metric("min_sigma", worst.sigma_min)
        .metric("argmin", serde_json::json!({ "h": worst.h, "htilde": worst.htilde, "mode": worst.mode }))
        .metric("uniform_oracle_bound", c_oracle)
        .metric("min_ratio_to_oracle", lower)
        .metric("rows", &rows)
        .provenance("grid_nodes", grid.dofs())
        .provenance("grid_grading", grid.grading())
        .provenance("x_max", grid.x_max());
    report.verdict = Verdict::from_bool(ok_bound && c_oracle > 0.0);
    Ok(report)
}

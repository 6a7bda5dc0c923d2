//! Friedrichs eigenvalues of Δ_g + 1 on the exact truncated cone against the
//! Bessel-zero oracle.

use rayon::prelude::*;
use serde::Serialize;

use super::verdict::{Report, Verdict};
use super::ExperimentError;
use crate::bessel::bessel_oracle_eigenvalues;
use crate::model::{ConeModel, ModelError};
use crate::radial::{assemble_mode_operator, RadialGrid};
use crate::spectral::pencil_eigenvalues;

#[derive(Debug, Clone, Serialize)]
pub struct EigenComparison {
    pub mode: usize,
    pub lambda_sq: f64,
    pub k: usize,
    pub computed: f64,
    pub oracle: f64,
    pub rel_error: f64,
}

/// The lowest `count` eigenvalues of every mode of an exact cone.
pub fn bessel_comparison(model: &ConeModel, grid: &RadialGrid, count: usize) -> Result<Vec<EigenComparison>, ExperimentError> {
    if !model.is_exact() {
        return Err(ModelError::Inadmissible("Bessel oracle needs an exact cone".into()).into());
    }
    let per_mode: Vec<Vec<EigenComparison>> = model
        .angular_modes
        .par_iter()
        .enumerate()
        .map(|(j, m)| {
            let op = assemble_mode_operator(model, grid, m, 1.0)?;
            let ev = pencil_eigenvalues(&op.stiffness, &op.mass, count);
            let oracle = bessel_oracle_eigenvalues(model.n, m.lambda_sq, grid.x_max(), count)?;
            Ok(ev
                .iter()
                .zip(&oracle)
                .enumerate()
                .map(|(k, (&c, &o))| EigenComparison {
                    mode: j,
                    lambda_sq: m.lambda_sq,
                    k,
                    computed: c,
                    oracle: o,
                    rel_error: (c - o).abs() / o,
                })
                .collect())
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(per_mode.into_iter().flatten().collect())
}

/// PASS when every relative error is at most `tolerance`.
pub fn bessel_oracle_experiment(model: &ConeModel, grid: &RadialGrid, count: usize, tolerance: f64) -> Result<Report, ExperimentError> {
    let rows = bessel_comparison(model, grid, count)?;
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let mut report = Report::new("bessel-oracle");
    report
        .param("n", model.n)
        .param("count", count)
        .param("tolerance", tolerance)
        .param("modes", model.angular_modes.iter().map(|m| m.lambda_sq).collect::<Vec<_>>())
        .metric("max_rel_error", worst)
        .metric("eigenvalues", &rows)
        .provenance("grid_nodes", grid.dofs())
        .provenance("grid_grading", grid.grading())
        .provenance("x_max", grid.x_max())
        .provenance("oracle", "1 + (j_{nu,m}/x_max)^2, nu = sqrt(((n-2)/2)^2 + lambda^2)");
    report.verdict = Verdict::from_bool(worst <= tolerance);
    Ok(report)
}

//! Discrete Hardy inequality ‖u/x‖ ≤ C ‖u′‖ in L²(x^{n−1}dx), u(x_max) = 0.

use rayon::prelude::*;
use serde::Serialize;

use super::verdict::{Report, Verdict};
use super::ExperimentError;
use crate::model::ConeModel;
use crate::radial::{assemble_mode_operator, RadialGrid};
use crate::spectral::pencil_eigenvalues;

/// 1/√λ_min of (K₀, H) with K₀ = ∫φ′φ′x^{n−1}, H = ∫φφx^{n−3}.
pub fn discrete_hardy_constant(n: usize, grid: &RadialGrid) -> Result<f64, ExperimentError> {
    let model = ConeModel::with_modes(n, grid.x_max(), &[0.0, 1.0]);
    let radial = assemble_mode_operator(&model, grid, &model.angular_modes[0], 1.0)?;
    let one = assemble_mode_operator(&model, grid, &model.angular_modes[1], 1.0)?;
    let h = one.laplacian.combine(1.0, &radial.laplacian, -1.0);
    let lam = pencil_eigenvalues(&radial.laplacian, &h, 1)[0];
    Ok(1.0 / lam.sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct HardyRow {
    pub n: usize,
    pub nodes: usize,
    pub constant: f64,
    pub sharp: f64,
}

/// PASS when every discrete constant is ≤ 2/(n−2) + slack.
pub fn hardy_experiment(dims: &[usize], node_counts: &[usize], grading: f64, slack: f64) -> Result<Report, ExperimentError> {
    let jobs: Vec<(usize, usize)> = dims.iter().flat_map(|&n| node_counts.iter().map(move |&k| (n, k))).collect();
    let rows: Vec<HardyRow> = jobs
        .par_iter()
        .map(|&(n, k)| {
            if n < 3 {
                return Err(ExperimentError::IllPosed(format!("Hardy inequality needs n >= 3, got {n}")));
            }
            let grid = RadialGrid::graded(1.0, k, grading)?;
            Ok(HardyRow {
                n,
                nodes: k,
                constant: discrete_hardy_constant(n, &grid)?,
                sharp: 2.0 / (n as f64 - 2.0),
            })
        })
        .collect::<Result<_, _>>()?;
    let ok = rows.iter().all(|r| r.constant <= r.sharp + slack);
    let mut report = Report::new("hardy");
    report
        .param("dims", dims)
        .param("node_counts", node_counts)
        .param("slack", slack)
        .metric("rows", &rows)
        .provenance("grid_grading", grading)
        .provenance("x_max", 1.0);
    report.verdict = Verdict::from_bool(ok);
    Ok(report)
}

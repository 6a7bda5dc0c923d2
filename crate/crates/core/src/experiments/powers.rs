//! Contour-integral powers against the functional calculus.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::domain::mode_decompositions;
use super::verdict::{Report, Verdict};
use super::ExperimentError;
use crate::model::ConeModel;
use crate::radial::{assemble_mode_operator, RadialGrid};
use crate::seeley::{analytic_continuation_power, analytic_continuation_power_k, continuation_order, Contour};
use crate::spectral::{functional_power_apply, mass_norm};

#[derive(Debug, Clone, Serialize)]
pub struct PowerRow {
    pub mode: usize,
    pub h: f64,
    pub w: [f64; 2],
    pub vector: String,
    /// ‖contour − functional‖_M / ‖functional‖_M.
    pub defect: f64,
    /// ‖A_w(k) − A_w(k+1)‖_M / ‖A_w(k)‖_M.
    pub k_defect: f64,
    pub k: usize,
    pub tail_bound: f64,
}

/// Test vectors: a smooth profile vanishing at x_max and a seeded random
/// vector.
pub fn power_test_vectors(grid: &RadialGrid, seed: u64) -> Vec<(String, Vec<Complex64>)> {
    let xm = grid.x_max();
    let smooth = grid.interpolate(|x| {
        let t = x / xm;
        Complex64::new((1.0 - t * t) * (1.0 + t), 0.0)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = (0..grid.dofs())
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    vec![("smooth".into(), smooth), (format!("random:{seed}"), random)]
}

pub fn power_rows(
    model: &ConeModel,
    grid: &RadialGrid,
    h_values: &[f64],
    w_samples: &[Complex64],
    contour: &Contour,
    seed: u64,
) -> Result<Vec<PowerRow>, ExperimentError> {
    let decs = mode_decompositions(model, grid)?;
    let bases = model
        .angular_modes
        .iter()
        .map(|m| assemble_mode_operator(model, grid, m, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let vectors = power_test_vectors(grid, seed);
    let mut jobs = Vec::new();
    for j in 0..bases.len() {
        for &h in h_values {
            for &w in w_samples {
                for v in 0..vectors.len() {
                    jobs.push((j, h, w, v));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(j, h, w, v)| {
            let op = bases[j].with_h(h);
            let dec = decs[j].at_h(h);
            let f = &vectors[v].1;
            let k = continuation_order(w);
            let a = analytic_continuation_power(&op, contour, w, f)?;
            let b = functional_power_apply(&dec, w * 2.0, f);
            let a1 = analytic_continuation_power_k(&op, contour, w, k + 1, f)?;
            let diff = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> { x.iter().zip(y).map(|(p, q)| p - q).collect() };
            Ok(PowerRow {
                mode: j,
                h,
                w: [w.re, w.im],
                vector: vectors[v].0.clone(),
                defect: mass_norm(&op.mass, &diff(&a, &b)) / mass_norm(&op.mass, &b),
                k_defect: mass_norm(&op.mass, &diff(&a, &a1)) / mass_norm(&op.mass, &a),
                k,
                tail_bound: contour.tail_bound(w - k as f64),
            })
        })
        .collect()
}

/// PASS when every defect is ≤ `tolerance` and every k-defect ≤ `k_tolerance`.
#[allow(clippy::too_many_arguments)]
pub fn seeley_equivalence_experiment(
    model: &ConeModel,
    grid: &RadialGrid,
    h_values: &[f64],
    w_samples: &[Complex64],
    contour: &Contour,
    tolerance: f64,
    k_tolerance: f64,
    seed: u64,
) -> Result<Report, ExperimentError> {
    let rows = power_rows(model, grid, h_values, w_samples, contour, seed)?;
    let worst = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    let worst_k = rows.iter().map(|r| r.k_defect).fold(0.0, f64::max);
    let mut report = Report::new("seeley-equivalence");
    report
        .param("n", model.n)
        .param("h_values", h_values)
        .param("w_samples", w_samples.iter().map(|w| [w.re, w.im]).collect::<Vec<_>>())
        .param("tolerance", tolerance)
        .param("k_tolerance", k_tolerance)
        .metric("max_defect", worst)
        .metric("max_k_defect", worst_k)
        .metric("rows", &rows)
        .provenance("grid_nodes", grid.dofs())
        .provenance("grid_grading", grid.grading())
        .provenance("x_max", grid.x_max())
        .provenance("contour_epsilon", contour.epsilon)
        .provenance("contour_r_max", contour.r_max)
        .provenance("contour_nodes", contour.len())
        .provenance("seed", seed);
    report.verdict = Verdict::from_bool(worst <= tolerance && worst_k <= k_tolerance);
    Ok(report)
}

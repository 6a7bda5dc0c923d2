//! Tip decay of per-mode kernel columns of A_h^w against the recessive
//! indicial exponent.

use num_complex::Complex64;
use serde::Serialize;

use super::stats::fit_line;
use super::verdict::{Report, Verdict};
use super::ExperimentError;
use crate::indicial::recessive_exponent;
use crate::model::ConeModel;
use crate::radial::{assemble_mode_operator, RadialGrid};
use crate::spectral::{eigendecompose, functional_power_apply, SpectralDecomposition};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelOptions {
    /// Source point x′.
    pub source: f64,
    /// Fit on [x′/window.0, x′/window.1].
    pub window: (f64, f64),
    pub tolerance: f64,
    /// Values below floor·max|u| count as discretization floor.
    pub floor: f64,
    pub min_points: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            source: 0.5,
            window: (400.0, 40.0),
            tolerance: 0.02,
            floor: 1e-12,
            min_points: 8,
        }
    }
}

/// Column of the discrete kernel of A^w at the unknown `index`: A^w applied
/// to the load f = M⁻¹e_index.
pub fn kernel_column(dec: &SpectralDecomposition, w: Complex64, index: usize) -> Vec<Complex64> {
    let mut e = vec![0.0; dec.dim()];
    e[index] = 1.0;
    let f: Vec<Complex64> = dec.mass.solve_spd(&e).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    functional_power_apply(dec, w * 2.0, &f)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub rms: f64,
    pub points: usize,
    pub floor_hit: bool,
}

pub fn fit_decay(grid: &RadialGrid, u: &[Complex64], lo: f64, hi: f64, floor: f64) -> Option<DecayFit> {
    let xs = grid.dof_positions();
    let peak = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut floor_hit = false;
    for (x, z) in xs.iter().zip(u) {
        if *x >= lo && *x <= hi {
            let a = z.norm();
            if a <= floor * peak {
                floor_hit = true;
                continue;
            }
            lx.push(x.ln());
            ly.push(a.ln());
        }
    }
    let f = fit_line(&lx, &ly)?;
    Some(DecayFit {
        slope: f.slope,
        rms: f.rms,
        points: lx.len(),
        floor_hit,
    })
}

/// Slope of log|u| against log x near the tip for the kernel column of A_h^w
/// at x′; PASS within tolerance·max(1, |target|) of the recessive exponent
/// −(n−2)/2 + √(((n−2)/2)² + λ²).
pub fn kernel_decay_experiment(
    model: &ConeModel,
    grid: &RadialGrid,
    h: f64,
    w: Complex64,
    mode: usize,
    opts: KernelOptions,
) -> Result<Report, ExperimentError> {
    let m = model
        .mode(mode)
        .ok_or_else(|| ExperimentError::IllPosed(format!("no mode with index {mode}")))?;
    let (lo, hi) = (opts.source / opts.window.0, opts.source / opts.window.1);
    if !(lo > 0.0 && lo < hi && hi <= opts.source / 4.0 && opts.source < grid.x_max()) {
        return Err(ExperimentError::IllPosed(format!(
            "fit window [{lo}, {hi}] must lie inside (0, x'/4] with x' = {} < x_max",
            opts.source
        )));
    }
    let op = assemble_mode_operator(model, grid, m, h)?;
    let dec = eigendecompose(&op)?;
    let xs = grid.dof_positions();
    let index = xs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - opts.source).abs().total_cmp(&(b.1 - opts.source).abs()))
        .map(|(i, _)| i)
        .unwrap();
    let u = kernel_column(&dec, w, index);
    let target = recessive_exponent(model.n, m.lambda_sq);
    let half = model.n as f64 / 2.0;
    let mut report = Report::new("kernel-decay");
    report
        .param("n", model.n)
        .param("mode", mode)
        .param("lambda_sq", m.lambda_sq)
        .param("h", h)
        .param("w", [w.re, w.im])
        .param("source", xs[index])
        .param("window", [lo, hi])
        .param("tolerance", opts.tolerance)
        .metric("target_slope", target)
        .metric("target_slope_b_half_density", target + half)
        .provenance("grid_nodes", grid.dofs())
        .provenance("grid_grading", grid.grading())
        .provenance("x_max", grid.x_max())
        .provenance("normalization", "function values, metric density; b-half-density adds n/2");
    match fit_decay(grid, &u, lo, hi, opts.floor) {
        Some(fit) if fit.points >= opts.min_points && !fit.floor_hit => {
            let err = (fit.slope - target).abs();
            report
                .metric("slope", fit.slope)
                .metric("slope_b_half_density", fit.slope + half)
                .metric("abs_error", err)
                .metric("fit_rms", fit.rms)
                .metric("fit_points", fit.points);
            report.verdict = Verdict::from_bool(err <= opts.tolerance * target.abs().max(1.0));
        }
        Some(fit) => {
            report
                .metric("slope", fit.slope)
                .metric("fit_points", fit.points)
                .metric("floor_hit", fit.floor_hit)
                .metric("diagnostic", "window too small or contaminated by the discretization floor");
            report.verdict = Verdict::Inconclusive;
        }
        None => {
            report.metric("diagnostic", "fewer than two usable points in the fit window");
            report.verdict = Verdict::Inconclusive;
        }
    }
    Ok(report)
}

//! Phase-space localization of A_h^{l/2} applied to interior wave packets,
//! and the commutation of A_h^{l/2} with A_h − 2 = h²Δ_g − 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::domain::mode_decompositions;
use super::stats::fit_line;
use super::verdict::{Report, Verdict};
use super::ExperimentError;
use crate::model::ConeModel;
use crate::quadrature::legendre_unit;
use crate::radial::{assemble_mode_operator, RadialGrid, RadialOperator};
use crate::seeley::{analytic_continuation_power, Contour};
use crate::spectral::{functional_power_apply, mass_norm, SpectralDecomposition};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Packet {
    pub x0: f64,
    pub xi0: f64,
    /// Width σ = kappa·√h.
    pub kappa: f64,
}

impl Default for Packet {
    fn default() -> Self {
        Self {
            x0: 1.0,
            xi0: 1.0,
            kappa: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WavefrontOptions {
    /// Phase-space box |x − x₀| < cσ, |k − ξ₀/h| < c/σ.
    pub box_factor: f64,
    pub min_rate: f64,
    pub commutator_tolerance: f64,
    /// Frequency quadrature: panel width in k and Gauss points per panel.
    pub k_panel: f64,
    pub k_points: usize,
}

impl Default for WavefrontOptions {
    fn default() -> Self {
        Self {
            box_factor: 1.5,
            min_rate: 0.9,
            commutator_tolerance: 1e-8,
            k_panel: 0.25,
            k_points: 4,
        }
    }
}

/// Packet in one mode: x^{−(n−1)/2} e^{−(x−x₀)²/(2σ²)} e^{iξ₀x/h}, so that
/// its half-density form x^{(n−1)/2}u is a Gaussian packet in L²(dx).
pub fn packet_vector(grid: &RadialGrid, n: usize, p: &Packet, h: f64) -> Vec<Complex64> {
    let sigma = p.kappa * h.sqrt();
    let m = (n as f64 - 1.0) / 2.0;
    grid.interpolate(|x| {
        if x == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let g = (-(x - p.x0).powi(2) / (2.0 * sigma * sigma)).exp();
        Complex64::from_polar(g * x.powf(-m), p.xi0 * x / h)
    })
}

/// Nodal values of x^{(n−1)/2}u at x_0..x_N (the last is the Dirichlet zero).
fn half_density(grid: &RadialGrid, n: usize, u: &[Complex64]) -> (Vec<f64>, Vec<Complex64>) {
    let verts = grid.vertices();
    let m = (n as f64 - 1.0) / 2.0;
    let mut g: Vec<Complex64> = u.iter().zip(&verts).map(|(z, &x)| z * x.powf(m)).collect();
    g.push(Complex64::new(0.0, 0.0));
    (verts, g)
}

/// ∫_0^1 e^{−its} ds and ∫_0^1 s e^{−its} ds.
fn moments(t: f64) -> (Complex64, Complex64) {
    let it = Complex64::new(0.0, t);
    if t.abs() < 0.5 {
        let mut e0 = Complex64::new(0.0, 0.0);
        let mut e1 = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for m in 0..14 {
            if m > 0 {
                pw *= -it;
                fact *= m as f64;
            }
            e0 += pw / (fact * (m as f64 + 1.0));
            e1 += pw / (fact * (m as f64 + 2.0));
        }
        (e0, e1)
    } else {
        let e = (-it).exp();
        let e0 = (Complex64::new(1.0, 0.0) - e) / it;
        let e1 = e / (-it) + e0 / it;
        (e0, e1)
    }
}

/// Exact Fourier transform ∫ g(x) e^{−ikx} dx of a piecewise-linear g.
pub fn p1_fourier(verts: &[f64], g: &[Complex64], k: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for e in 0..verts.len() - 1 {
        let (a, b) = (verts[e], verts[e + 1]);
        let l = b - a;
        let (e0, e1) = moments(k * l);
        s += Complex64::from_polar(l, -k * a) * (g[e] * e0 + (g[e + 1] - g[e]) * e1);
    }
    s
}

/// ∫_{lo}^{hi} |g|² dx for piecewise-linear g (exact).
fn p1_mass_between(verts: &[f64], g: &[Complex64], lo: f64, hi: f64) -> f64 {
    let rule = legendre_unit(2);
    let mut s = 0.0;
    for e in 0..verts.len() - 1 {
        let (a, b) = (verts[e], verts[e + 1]);
        let (c, d) = (a.max(lo), b.min(hi));
        if d <= c {
            continue;
        }
        for &(t, w) in &rule {
            let x = c + t * (d - c);
            let s_ = (x - a) / (b - a);
            let v = g[e] * (1.0 - s_) + g[e + 1] * s_;
            s += w * (d - c) * v.norm_sqr();
        }
    }
    s
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Localization {
    pub spatial_outside: f64,
    pub frequency_outside: f64,
}

/// Fractions of the half-density L² mass outside |x − x₀| < cσ and of the
/// Fourier mass outside |k − ξ₀/h| < c/σ.
pub fn localization(grid: &RadialGrid, n: usize, u: &[Complex64], p: &Packet, h: f64, opts: &WavefrontOptions) -> Localization {
    let sigma = p.kappa * h.sqrt();
    let (verts, g) = half_density(grid, n, u);
    let total = p1_mass_between(&verts, &g, f64::NEG_INFINITY, f64::INFINITY);
    let r = opts.box_factor * sigma;
    let inside_x = p1_mass_between(&verts, &g, p.x0 - r, p.x0 + r);
    let k0 = p.xi0 / h;
    let rk = opts.box_factor / sigma;
    let panels = ((2.0 * rk) / opts.k_panel).ceil().max(1.0) as usize;
    let width = 2.0 * rk / panels as f64;
    let rule = legendre_unit(opts.k_points);
    let inside_k: f64 = (0..panels)
        .into_par_iter()
        .map(|j| {
            let a = k0 - rk + j as f64 * width;
            rule.iter()
                .map(|&(t, w)| w * width * p1_fourier(&verts, &g, a + t * width).norm_sqr())
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    // Plancherel: ∫|ĝ|² dk = 2π ∫|g|² dx
    Localization {
        spatial_outside: 1.0 - inside_x / total,
        frequency_outside: 1.0 - inside_k / (2.0 * PI * total),
    }
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// (A − 2)u = M⁻¹S u − 2u.
fn shifted(op: &RadialOperator, u: &[Complex64]) -> Vec<Complex64> {
    op.apply(u).iter().zip(u).map(|(a, b)| a - b * 2.0).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct WavefrontRow {
    pub mode: usize,
    pub h: f64,
    pub defect: f64,
    pub spatial_defect: f64,
    pub frequency_defect: f64,
    pub commutator: f64,
}

#[allow(clippy::too_many_arguments)]
fn one_row(
    op: &RadialOperator,
    dec: &SpectralDecomposition,
    grid: &RadialGrid,
    n: usize,
    mode: usize,
    l: f64,
    p: &Packet,
    opts: &WavefrontOptions,
) -> WavefrontRow {
    let h = op.h;
    let u = packet_vector(grid, n, p, h);
    let w = Complex64::new(l, 0.0);
    let pu = functional_power_apply(dec, w, &u);
    let a = localization(grid, n, &u, p, h, opts);
    let b = localization(grid, n, &pu, p, h, opts);
    let ds = (b.spatial_outside - a.spatial_outside).abs();
    let df = (b.frequency_outside - a.frequency_outside).abs();
    let c = sub(&functional_power_apply(dec, w, &shifted(op, &u)), &shifted(op, &pu));
    WavefrontRow {
        mode,
        h,
        defect: ds + df,
        spatial_defect: ds,
        frequency_defect: df,
        commutator: mass_norm(&op.mass, &c) / mass_norm(&op.mass, &u),
    }
}

/// Commutators of the contour and eigen paths of A^{l/2} with A − 2 on the
/// packet, and the quadrature bound ‖E(A−2)u‖ + ‖(A−2)Eu‖, E = P_c − P_e.
pub fn contour_commutator(
    op: &RadialOperator,
    dec: &SpectralDecomposition,
    contour: &Contour,
    u: &[Complex64],
    l: f64,
) -> Result<(f64, f64, f64), ExperimentError> {
    let w = Complex64::new(l, 0.0);
    let bu = shifted(op, u);
    let pe_u = functional_power_apply(dec, w, u);
    let pe_bu = functional_power_apply(dec, w, &bu);
    let pc_u = analytic_continuation_power(op, contour, w / 2.0, u)?;
    let pc_bu = analytic_continuation_power(op, contour, w / 2.0, &bu)?;
    let nu = mass_norm(&op.mass, u);
    let comm_c = mass_norm(&op.mass, &sub(&pc_bu, &shifted(op, &pc_u))) / nu;
    let comm_e = mass_norm(&op.mass, &sub(&pe_bu, &shifted(op, &pe_u))) / nu;
    let e_u = sub(&pc_u, &pe_u);
    let e_bu = sub(&pc_bu, &pe_bu);
    let bound = (mass_norm(&op.mass, &e_bu) + mass_norm(&op.mass, &shifted(op, &e_u))) / nu;
    Ok((comm_c, comm_e, bound))
}

pub fn check_packet(grid: &RadialGrid, p: &Packet, h: f64) -> Result<(), ExperimentError> {
    let s = p.kappa * h.sqrt();
    if p.x0 - 5.0 * s <= 0.0 || p.x0 + 5.0 * s >= grid.x_max() {
        return Err(ExperimentError::IllPosed(format!(
            "packet at x0 = {} with width {s} overlaps the tip or the outer boundary at h = {h}",
            p.x0
        )));
    }
    Ok(())
}

/// PASS when, for every mode, the localization defect decays at a fitted
/// rate ≥ min_rate in h and every commutator is ≤ commutator_tolerance. The
/// contour path, when given, is compared at the coarsest h.
#[allow(clippy::too_many_arguments)]
pub fn wavefront_preservation_experiment(
    model: &ConeModel,
    grid: &RadialGrid,
    h_values: &[f64],
    l: f64,
    packet: Packet,
    contour: Option<&Contour>,
    opts: WavefrontOptions,
) -> Result<Report, ExperimentError> {
    let limit = (model.n as f64 - 2.0) / 2.0;
    if l.abs() > limit + 1e-12 {
        return Err(ExperimentError::IllPosed(format!("order l = {l} outside [-{limit}, {limit}]")));
    }
    for &h in h_values {
        check_packet(grid, &packet, h)?;
    }
    let decs = mode_decompositions(model, grid)?;
    let bases = model
        .angular_modes
        .iter()
        .map(|m| assemble_mode_operator(model, grid, m, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, f64)> = (0..bases.len()).flat_map(|j| h_values.iter().map(move |&h| (j, h))).collect();
    let rows: Vec<WavefrontRow> = jobs
        .par_iter()
        .map(|&(j, h)| one_row(&bases[j].with_h(h), &decs[j].at_h(h), grid, model.n, j, l, &packet, &opts))
        .collect();

    let mut report = Report::new("wavefront-preservation");
    let mut verdict = Verdict::Pass;
    let mut rates = Vec::new();
    for j in 0..bases.len() {
        let sel: Vec<&WavefrontRow> = rows.iter().filter(|r| r.mode == j).collect();
        let lx: Vec<f64> = sel.iter().map(|r| r.h.ln()).collect();
        let ly: Vec<f64> = sel.iter().map(|r| r.defect.max(1e-300).ln()).collect();
        let rate = if l == 0.0 {
            None
        } else {
            fit_line(&lx, &ly).map(|f| f.slope)
        };
        match rate {
            Some(r) => verdict = verdict.and(Verdict::from_bool(r >= opts.min_rate)),
            None if l == 0.0 => {
                let tiny = sel.iter().all(|r| r.defect <= 1e-12);
                verdict = verdict.and(Verdict::from_bool(tiny));
            }
            None => verdict = verdict.and(Verdict::Inconclusive),
        }
        rates.push(rate);
    }
    let max_comm = rows.iter().map(|r| r.commutator).fold(0.0, f64::max);
    verdict = verdict.and(Verdict::from_bool(max_comm <= opts.commutator_tolerance));

    if let Some(c) = contour {
        let h = h_values.iter().cloned().fold(0.0, f64::max);
        let op = bases[0].with_h(h);
        let dec = decs[0].at_h(h);
        let u = packet_vector(grid, model.n, &packet, h);
        let (cc, ce, bound) = contour_commutator(&op, &dec, c, &u, l)?;
        let ok = cc <= bound + opts.commutator_tolerance;
        report
            .metric("contour_commutator", cc)
            .metric("eigen_commutator", ce)
            .metric("contour_quadrature_bound", bound)
            .metric("contour_h", h);
        verdict = verdict.and(Verdict::from_bool(ok));
    }

    report
        .param("n", model.n)
        .param("l", l)
        .param("h_values", h_values)
        .param("packet", packet)
        .param("box_factor", opts.box_factor)
        .param("min_rate", opts.min_rate)
        .param("commutator_tolerance", opts.commutator_tolerance)
        .metric("rates", rates)
        .metric("max_commutator", max_comm)
        .metric("rows", &rows)
        .provenance("grid_nodes", grid.dofs())
        .provenance("grid_grading", grid.grading())
        .provenance("x_max", grid.x_max())
        .provenance("frequency_quadrature", [opts.k_panel, opts.k_points as f64]);
    report.verdict = verdict;
    Ok(report)
}

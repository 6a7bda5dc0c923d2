//! Full-ellipticity verdict at a weight α: b-symbol bound, weight off the
//! boundary spectrum, and invertibility of the transition-face model.

use num_complex::Complex64;
use serde::Serialize;

use super::verdict::{Report, Verdict};
use super::ExperimentError;
use crate::indicial::{check_weight, spectrum_roots, IndicialError};
use crate::model::ConeModel;
use crate::radial::{assemble_model_operator_tf, RadialGrid, TF_RADIUS};
use crate::spectral::pencil_eigenvalues;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EllipticityOptions {
    pub xi_max: f64,
    pub xi_samples: usize,
    pub x_samples: usize,
    pub tf_nodes: usize,
    /// N_tf must have σ_min ≥ this.
    pub tf_floor: f64,
    /// Allowed relative change of σ_min under doubling x̂_max and refinement.
    pub tf_robustness: f64,
}

impl Default for EllipticityOptions {
    fn default() -> Self {
        Self {
            xi_max: 100.0,
            xi_samples: 401,
            x_samples: 64,
            tf_nodes: 400,
            tf_floor: 0.5,
            tf_robustness: 0.05,
        }
    }
}

/// min |σ − ω̃| / ⟨ζ⟩² over the sample, σ = ξ_b² + λ² e^{−2φ(x)} the per-mode
/// b-principal symbol and ⟨ζ⟩² = 1 + σ.
pub fn symbol_constant(model: &ConeModel, omega: Complex64, opts: &EllipticityOptions) -> f64 {
    let mut c0 = f64::INFINITY;
    for ix in 1..=opts.x_samples {
        let x = model.x_max * ix as f64 / opts.x_samples as f64;
        let e = (-2.0 * model.phi(x)).exp();
        for m in &model.angular_modes {
            for k in 0..opts.xi_samples {
                let xi = -opts.xi_max + 2.0 * opts.xi_max * k as f64 / (opts.xi_samples - 1) as f64;
                let sigma = xi * xi + m.lambda_sq * e;
                c0 = c0.min((Complex64::new(sigma, 0.0) - omega).norm() / (1.0 + sigma));
            }
        }
    }
    c0
}

/// Whether α lies in the component of ℝ ∖ (−Im spec_b) containing −(n−2)/2,
/// the weights at which the Friedrichs realization is the relevant one.
pub fn in_friedrichs_gap(model: &ConeModel, alpha: f64) -> bool {
    let centre = -(model.n as f64 - 2.0) / 2.0;
    let (lo, hi) = (alpha.min(centre), alpha.max(centre));
    !spectrum_roots(model).iter().any(|r| {
        let a = -r.value.im;
        a >= lo - 1e-12 && a <= hi + 1e-12
    })
}

fn tf_sigma(model: &ConeModel, radius: f64, nodes: usize) -> Result<f64, ExperimentError> {
    let grid = RadialGrid::graded(radius, nodes, 2.0)?;
    let mut s = f64::INFINITY;
    for m in &model.angular_modes {
        let op = assemble_model_operator_tf(model, &grid, m)?;
        s = s.min(pencil_eigenvalues(&op.stiffness, &op.mass, 1)[0]);
    }
    Ok(s)
}

pub fn full_ellipticity_check(model: &ConeModel, alpha: f64, omega: Complex64, opts: EllipticityOptions) -> Result<Report, ExperimentError> {
    let mut report = Report::new("full-ellipticity");
    report
        .param("n", model.n)
        .param("alpha", alpha)
        .param("omega_tilde", [omega.re, omega.im])
        .provenance("xi_max", opts.xi_max)
        .provenance("xi_samples", opts.xi_samples)
        .provenance("x_samples", opts.x_samples)
        .provenance("tf_radius", TF_RADIUS)
        .provenance("tf_nodes", opts.tf_nodes);

    let c0 = symbol_constant(model, omega, &opts);
    let v1 = Verdict::from_bool(c0 > 0.0);
    report.metric("symbol_c0", c0).metric("symbol_verdict", v1);

    let v2 = match check_weight(model, alpha) {
        Ok(()) => Verdict::Pass,
        Err(IndicialError::OnBoundarySpectrum { root, mode, sign, .. }) => {
            report.metric(
                "witness",
                serde_json::json!({ "mode": mode, "sign": sign.to_string(), "root": [root.re, root.im] }),
            );
            Verdict::Fail
        }
    };
    report.metric("weight_verdict", v2);

    let base = tf_sigma(model, TF_RADIUS, opts.tf_nodes)?;
    let wide = tf_sigma(model, 2.0 * TF_RADIUS, 2 * opts.tf_nodes)?;
    let fine = tf_sigma(model, TF_RADIUS, 2 * opts.tf_nodes)?;
    let drift = ((wide - base).abs().max((fine - base).abs())) / base;
    let gap = in_friedrichs_gap(model, alpha);
    let v3 = if !gap {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(base >= opts.tf_floor && drift <= opts.tf_robustness)
    };
    report
        .metric("tf_sigma_min", base)
        .metric("tf_sigma_min_doubled_radius", wide)
        .metric("tf_sigma_min_refined", fine)
        .metric("tf_relative_drift", drift)
        .metric("alpha_in_friedrichs_gap", gap)
        .metric("tf_verdict", v3);
    report.verdict = v1.and(v2).and(v3);
    Ok(report)
}

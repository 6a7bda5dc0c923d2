//! Experiment dispatch from a [`RunConfig`]. Numerical failures become
//! INCONCLUSIVE reports rather than errors.

use num_complex::Complex64;
use serde_json::Value;

use crate::config::RunConfig;
use crate::experiments::domain::{domain_equivalence_experiment, DomainOptions};
use crate::experiments::dsc::dsc_invertibility_sweep;
use crate::experiments::ellipticity::full_ellipticity_check;
use crate::experiments::hardy::hardy_experiment;
use crate::experiments::index::{index_family_independence_experiment, sample_window};
use crate::experiments::kernel::{kernel_decay_experiment, KernelOptions};
use crate::experiments::powers::seeley_equivalence_experiment;
use crate::experiments::spectrum::bessel_oracle_experiment;
use crate::experiments::wavefront::{wavefront_preservation_experiment, Packet, WavefrontOptions};
use crate::experiments::{ExperimentError, Report, Verdict};

pub const EXPERIMENTS: [&str; 9] = [
    "bessel-oracle",
    "seeley-equivalence",
    "domain-equivalence",
    "kernel-decay",
    "index-family",
    "dsc-invertibility",
    "full-ellipticity",
    "wavefront-preservation",
    "hardy",
];

fn c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// One report holding several sub-runs under `metrics.cases`; the verdict
/// is the conjunction.
fn combine(name: &str, parts: Vec<Report>) -> Report {
    let mut out = Report::new(name);
    let mut v = Verdict::Pass;
    let cases: Vec<Value> = parts
        .into_iter()
        .map(|r| {
            v = v.and(r.verdict);
            serde_json::json!({ "params": r.params, "metrics": r.metrics, "verdict": r.verdict, "provenance": r.provenance })
        })
        .collect();
    out.metric("cases", cases);
    out.verdict = v;
    out
}

pub fn inconclusive(name: &str, err: &ExperimentError) -> Report {
    let mut r = Report::new(name);
    r.metric("error", err.to_string());
    r.verdict = Verdict::Inconclusive;
    r
}

fn dispatch(name: &str, cfg: &RunConfig) -> Result<Report, ExperimentError> {
    let s = &cfg.settings;
    let t = &cfg.tolerances;
    let mut report = match name {
        "bessel-oracle" => {
            let (model, grid) = cfg.model_and_grid(s.bessel_oracle.grid.as_ref())?;
            bessel_oracle_experiment(&model, &grid, s.bessel_oracle.count, t.eigenvalue)?
        }
        "seeley-equivalence" => {
            let st = &s.seeley_equivalence;
            let (model, grid) = cfg.model_and_grid(st.grid.as_ref())?;
            let ws: Vec<Complex64> = st.w_samples.iter().map(|&w| c(w)).collect();
            let contour = cfg.contour.build()?;
            seeley_equivalence_experiment(
                &model,
                &grid,
                &cfg.h_values,
                &ws,
                &contour,
                t.power_defect,
                t.continuation,
                cfg.seed,
            )?
        }
        "domain-equivalence" => {
            let st = &s.domain_equivalence;
            let (model, grid) = cfg.model_and_grid(st.grid.as_ref())?;
            let ws: Vec<Complex64> = st.w_samples.iter().map(|&w| c(w)).collect();
            let opts = DomainOptions {
                eigs_per_mode: st.eigs_per_mode,
                max_trend: t.kendall_tau,
                max_spread: t.spread,
                trend_resolution: t.tau_resolution,
            };
            domain_equivalence_experiment(&model, &grid, &cfg.h_values, &ws, opts)?
        }
        "kernel-decay" => {
            let st = &s.kernel_decay;
            let (model, grid) = cfg.model_and_grid(st.grid.as_ref())?;
            let modes = st
                .modes
                .clone()
                .unwrap_or_else(|| model.angular_modes.iter().map(|m| m.index).collect());
            let opts = KernelOptions {
                source: st.source,
                window: (st.window[0], st.window[1]),
                tolerance: t.slope,
                ..KernelOptions::default()
            };
            let parts = modes
                .iter()
                .map(|&j| kernel_decay_experiment(&model, &grid, st.h, c(st.w), j, opts))
                .collect::<Result<Vec<_>, _>>()?;
            combine(name, parts)
        }
        "index-family" => {
            let st = &s.index_family;
            let model = cfg.model()?;
            let alphas = sample_window(model.n, st.samples, cfg.seed);
            let mut r = index_family_independence_experiment(&model, &alphas, st.re_cutoff)?;
            r.param("seed", cfg.seed);
            r
        }
        "dsc-invertibility" => {
            let st = &s.dsc_invertibility;
            let (model, grid) = cfg.model_and_grid(st.grid.as_ref())?;
            let hs = st.h_values.clone().unwrap_or_else(|| cfg.h_values.clone());
            let hts = cfg.htilde_values.clone().unwrap_or_else(|| hs.clone());
            let parts = st
                .omegas
                .iter()
                .map(|&om| dsc_invertibility_sweep(&model, &grid, &hs, &hts, c(om), t.singular_value_slack))
                .collect::<Result<Vec<_>, _>>()?;
            combine(name, parts)
        }
        "full-ellipticity" => {
            let st = &s.full_ellipticity;
            let model = cfg.model()?;
            let alphas = st.alphas.clone().unwrap_or_else(|| vec![cfg.alpha]);
            let parts = alphas
                .iter()
                .map(|&a| full_ellipticity_check(&model, a, c(st.omega), Default::default()))
                .collect::<Result<Vec<_>, _>>()?;
            combine(name, parts)
        }
        "wavefront-preservation" => {
            let st = &s.wavefront_preservation;
            let (model, grid) = cfg.model_and_grid(st.grid.as_ref())?;
            let hs = st.h_values.clone().unwrap_or_else(|| cfg.h_values.clone());
            let packet = Packet {
                x0: st.x0,
                xi0: st.xi0,
                kappa: st.kappa,
            };
            let opts = WavefrontOptions {
                box_factor: st.box_factor,
                min_rate: t.localization_rate,
                commutator_tolerance: t.commutator,
                ..WavefrontOptions::default()
            };
            let contour = if st.check_contour { Some(cfg.contour.build()?) } else { None };
            let parts = st
                .l_values
                .iter()
                .map(|&l| wavefront_preservation_experiment(&model, &grid, &hs, l, packet, contour.as_ref(), opts))
                .collect::<Result<Vec<_>, _>>()?;
            combine(name, parts)
        }
        "hardy" => {
            let st = &s.hardy;
            hardy_experiment(&st.dims, &st.node_counts, st.grading, t.hardy_slack)?
        }
        other => return Err(ExperimentError::IllPosed(format!("unknown experiment `{other}`"))),
    };
    report.provenance("config_seed", cfg.seed);
    Ok(report)
}

/// Runs one named experiment. Unknown names and numerical failures give an
/// INCONCLUSIVE report carrying the error text.
pub fn run_experiment(name: &str, cfg: &RunConfig) -> Report {
    dispatch(name, cfg).unwrap_or_else(|e| inconclusive(name, &e))
}

//! α-independence of the resolvent index family inside the weight window.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::verdict::{Report, Verdict};
use super::ExperimentError;
use crate::indicial::{resolvent_index_family, IndexFamily};
use crate::model::ConeModel;

/// `count` weights drawn uniformly from the open window (−n+2, 0).
pub fn sample_window(n: usize, count: usize, seed: u64) -> Vec<f64> {
    let lo = -(n as f64) + 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            // keep away from the open ends, where the window roots sit
            let t = 1e-6 + (1.0 - 2e-6) * rng.random::<f64>();
            lo * (1.0 - t)
        })
        .collect()
}

pub fn index_family_independence_experiment(
    model: &ConeModel,
    alphas: &[f64],
    re_cutoff: f64,
) -> Result<Report, ExperimentError> {
    if alphas.is_empty() {
        return Err(ExperimentError::IllPosed("no weights sampled".into()));
    }
    let families: Vec<IndexFamily> = alphas
        .iter()
        .map(|&a| resolvent_index_family(model, a, re_cutoff))
        .collect::<Result<_, _>>()?;
    let mismatches: Vec<f64> = alphas
        .iter()
        .zip(&families)
        .filter(|(_, f)| **f != families[0])
        .map(|(&a, _)| a)
        .collect();
    let f = &families[0];
    let mut report = Report::new("index-family");
    report
        .param("n", model.n)
        .param("alphas", alphas)
        .param("re_cutoff", re_cutoff)
        .metric("mismatched_alphas", &mismatches)
        .metric("lb", f.lb.to_entries())
        .metric("ff", f.ff.to_entries())
        .metric("rb", f.rb.to_entries())
        .metric("tf", f.tf.to_entries())
        .provenance("modes", model.angular_modes.iter().map(|m| m.lambda_sq).collect::<Vec<_>>());
    report.verdict = Verdict::from_bool(mismatches.is_empty());
    Ok(report)
}

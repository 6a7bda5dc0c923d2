mod common;

use conelab::indicial::{indicial_roots, resolvent_index_family, IndexSet};
use conelab::model::{validate_model, AngularMode, ConeModel, Warp};
use conelab::radial::{assemble_mode_operator, RadialGrid};
use conelab::seeley::{analytic_continuation_power_k, build_contour, contour_power_apply};
use conelab::spaces::{tip_bump, NormEvaluator, NormSpec};
use conelab::spectral::{eigendecompose, functional_power_apply, mass_norm, resolvent_apply};
use num_complex::Complex64;
use proptest::prelude::*;

fn mode(n: usize, l: usize) -> AngularMode {
    AngularMode {
        index: l,
        lambda_sq: (l * (l + n - 2)) as f64,
        multiplicity: 1,
    }
}

fn diff_norm(m: &conelab::banded::SymTridiagonal, a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mass_norm(m, &d)
}

fn smooth_vector(grid: &RadialGrid, seed: &[f64]) -> Vec<Complex64> {
    let xm = grid.x_max();
    grid.interpolate(|x| {
        let t = x / xm;
        let mut v = Complex64::new(0.0, 0.0);
        for (k, &c) in seed.iter().enumerate() {
            v += Complex64::new(c, 0.5 * c) * (t * (k + 1) as f64 * std::f64::consts::PI).cos();
        }
        v * (1.0 - t * t)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn extended_union_commutes(e in common::index_set(), f in common::index_set()) {
        prop_assert!(common::ext_union_commutes(&e, &f));
    }

    #[test]
    fn extended_union_contains_both(e in common::index_set(), f in common::index_set()) {
        prop_assert!(common::ext_union_monotone(&e, &f));
    }

    #[test]
    fn extended_union_log_order_bounded(e in common::index_set(), f in common::index_set()) {
        prop_assert!(common::ext_union_log_bound(&e, &f));
    }

    #[test]
    fn saturation_is_idempotent_and_shift_closed(e in common::index_set()) {
        prop_assert!(common::saturation_idempotent(&e));
        prop_assert!(e.saturated().is_index_set());
    }

    #[test]
    fn plain_union_commutes_and_contains(e in common::index_set(), f in common::index_set()) {
        let u = e.union(&f);
        prop_assert_eq!(&u, &f.union(&e));
        prop_assert!(e.is_subset_of(&u) && f.is_subset_of(&u));
        prop_assert!(u.is_subset_of(&e.extended_union(&f)));
    }

    #[test]
    fn index_set_json_round_trip(e in common::index_set()) {
        let text = conelab::io::index_set_json(&e);
        let back = conelab::io::parse_index_set(&text).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn indicial_roots_solve_the_quadratic(n in 3usize..8, lsq in 0.0f64..200.0) {
        // σ² − i(n−2)σ + λ² = 0 by the complex quadratic formula
        let b = Complex64::new(0.0, -(n as f64 - 2.0));
        let disc = (b * b - 4.0 * lsq).sqrt();
        let r1 = (-b + disc) / 2.0;
        let r2 = (-b - disc) / 2.0;
        let (r1, r2) = if r1.im >= r2.im { (r1, r2) } else { (r2, r1) };
        let (plus, minus) = indicial_roots(n, lsq);
        let scale = r1.norm().max(1.0);
        prop_assert!((plus.value - r1).norm() <= 1e-12 * scale);
        prop_assert!((minus.value - r2).norm() <= 1e-12 * scale);
        let sum = plus.value + minus.value;
        prop_assert!((sum - Complex64::new(0.0, n as f64 - 2.0)).norm() <= 1e-12 * scale);
        let half = (n as f64 - 2.0) / 2.0;
        prop_assert!(plus.value.im >= half && minus.value.im <= half);
    }

    #[test]
    fn resolvent_family_ignores_alpha(a in 0.001f64..0.999) {
        let model = ConeModel::round(3, 1.0, 2).unwrap();
        let alpha = -a;
        prop_assert_eq!(
            resolvent_index_family(&model, alpha, 5.0).unwrap(),
            resolvent_index_family(&model, -0.5, 5.0).unwrap()
        );
    }

    #[test]
    fn round_models_are_admissible(n in 3usize..7, l in 0usize..6, xm in 0.1f64..10.0) {
        let m = ConeModel::round(n, xm, l).unwrap();
        prop_assert!(validate_model(&m).is_empty());
        let grid = RadialGrid::graded(xm, 32, 2.0).unwrap();
        for md in &m.angular_modes {
            prop_assert!(assemble_mode_operator(&m, &grid, md, 0.5).is_ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assembled_operators_are_symmetric_and_bounded_below(
        l in 0usize..4, h in 0.01f64..1.0, c1 in -0.5f64..0.5
    ) {
        let mut model = ConeModel::round(3, 1.0, 3).unwrap();
        model.warp = Some(Warp::new(vec![0.0, c1]));
        let grid = RadialGrid::graded(1.0, 80, 2.0).unwrap();
        let op = assemble_mode_operator(&model, &grid, &mode(3, l), h).unwrap();
        // stored as one off-diagonal band: symmetric by construction, band ≤ 3
        prop_assert_eq!(op.stiffness.off.len() + 1, op.stiffness.dim());
        let dec = eigendecompose(&op).unwrap();
        prop_assert!(dec.eigenvalues[0] >= 1.0 - 1e-10);
        prop_assert!(dec.orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn power_group_law(
        a in -4.0f64..4.0, b in -4.0f64..4.0, ia in -1.0f64..1.0, ib in -1.0f64..1.0,
        seed in prop::collection::vec(-1.0f64..1.0, 4)
    ) {
        let model = ConeModel::round(3, 1.0, 1).unwrap();
        let grid = RadialGrid::graded(1.0, 48, 1.0).unwrap();
        let op = assemble_mode_operator(&model, &grid, &mode(3, 1), 0.5).unwrap();
        let dec = eigendecompose(&op).unwrap();
        let f = smooth_vector(&grid, &seed);
        let w1 = Complex64::new(a, ia);
        let w2 = Complex64::new(b, ib);
        let lhs = functional_power_apply(&dec, w1, &functional_power_apply(&dec, w2, &f));
        let rhs = functional_power_apply(&dec, w1 + w2, &f);
        let scale = mass_norm(&op.mass, &rhs).max(mass_norm(&op.mass, &f));
        prop_assert!(diff_norm(&op.mass, &lhs, &rhs) <= 1e-8 * scale);
    }

    #[test]
    fn resolvent_matches_spectral_resolvent(
        re in -5.0f64..40.0, im in 0.05f64..5.0, sign in prop::bool::ANY,
        seed in prop::collection::vec(-1.0f64..1.0, 4)
    ) {
        let model = ConeModel::round(3, 1.0, 2).unwrap();
        let grid = RadialGrid::graded(1.0, 64, 2.0).unwrap();
        let op = assemble_mode_operator(&model, &grid, &mode(3, 2), 0.25).unwrap();
        let dec = eigendecompose(&op).unwrap();
        let lam = Complex64::new(re, if sign { im } else { -im });
        let f = smooth_vector(&grid, &seed);
        let direct = resolvent_apply(&op, lam, &f).unwrap();
        let spectral = dec.apply_function(|mu| 1.0 / (Complex64::new(mu, 0.0) - lam), &f);
        let scale = mass_norm(&op.mass, &spectral);
        prop_assert!(diff_norm(&op.mass, &direct, &spectral) <= 1e-8 * scale.max(1e-300));
    }

    #[test]
    fn continuation_is_independent_of_k(re in -1.5f64..1.5, im in -1.0f64..1.0) {
        let model = ConeModel::round(3, 1.0, 1).unwrap();
        let grid = RadialGrid::graded(1.0, 32, 1.0).unwrap();
        let op = assemble_mode_operator(&model, &grid, &mode(3, 0), 0.5).unwrap();
        let contour = build_contour(0.1, 1e16, 24).unwrap();
        let f = smooth_vector(&grid, &[1.0, 0.3, -0.2]);
        let w = Complex64::new(re, im);
        let k = conelab::seeley::continuation_order(w);
        let a = analytic_continuation_power_k(&op, &contour, w, k, &f).unwrap();
        let b = analytic_continuation_power_k(&op, &contour, w, k + 1, &f).unwrap();
        let scale = mass_norm(&op.mass, &a);
        prop_assert!(diff_norm(&op.mass, &a, &b) <= 1e-8 * scale);
    }

    #[test]
    fn raising_alpha_raises_tip_norms(a1 in -1.4f64..-0.1, da in 0.02f64..1.0, hk in 2i32..7) {
        let h = 2f64.powi(-hk);
        let grid = RadialGrid::graded(1.0, 400, 2.0).unwrap();
        let a2 = (a1 + da).min(-0.01);
        let norm = |alpha: f64, u: &[Complex64]| {
            NormEvaluator::new(NormSpec::cone(0.0, alpha, 0.0, h), &grid, 3, 0.0).unwrap().norm(u).unwrap()
        };
        // concentrated at x ≤ h/4: weight (x/(x+h))^{−α} grows with α
        let tip = tip_bump(&grid, 0.25 * h);
        prop_assert!(norm(a2, &tip) > norm(a1, &tip));
        // for α ≥ 0 a nonzero tip value has infinite norm
        prop_assert_eq!(norm(a1 + 1.5, &tip), f64::INFINITY);
        // supported near x_max: (x/(x+h))^{−Δα} ∈ [1, (1+2h)^{Δα}]
        let far = grid.interpolate(|x| {
            let t = (x - 0.75) / 0.2;
            Complex64::new(if t.abs() < 1.0 { (1.0 - t * t).powi(2) } else { 0.0 }, 0.0)
        });
        let ratio = norm(a2, &far) / norm(a1, &far);
        prop_assert!(ratio >= 1.0 - 1e-9 && ratio <= (1.0 + 2.0 * h).powf(da) + 1e-9);
    }
}

#[test]
fn contour_quadrature_converges_geometrically() {
    let model = ConeModel::round(3, 1.0, 1).unwrap();
    let grid = RadialGrid::graded(1.0, 32, 1.0).unwrap();
    let op = assemble_mode_operator(&model, &grid, &mode(3, 1), 0.5).unwrap();
    let dec = eigendecompose(&op).unwrap();
    let f = smooth_vector(&grid, &[1.0, -0.4, 0.25]);
    for w in [Complex64::new(-0.5, 0.0), Complex64::new(-0.75, 0.5)] {
        let oracle = functional_power_apply(&dec, 2.0 * w, &f);
        let scale = mass_norm(&op.mass, &oracle);
        let mut prev = f64::INFINITY;
        let r_max = 1e24f64;
        // ray truncation sets the floor: ∫_R^∞ s^{Re w − 1} ds relative to ‖f‖
        let floor = (1e-10f64).max(10.0 * r_max.powf(w.re) / w.re.abs() * mass_norm(&op.mass, &f) / scale);
        for npd in [2usize, 4, 8, 16] {
            let contour = build_contour(0.1, r_max, npd).unwrap();
            let v = contour_power_apply(&op, &contour, w, &f).unwrap();
            let d = diff_norm(&op.mass, &v, &oracle) / scale;
            assert!(d <= floor || d * 4.0 <= prev, "w = {w}, nodes/decade {npd}: {d:e} after {prev:e}");
            prev = d;
        }
        assert!(prev <= floor.max(1e-8), "w = {w}: final defect {prev:e}");
    }
}

#[test]
fn hat_of_naturals_is_an_index_set() {
    let e = IndexSet::naturals(0, 4.0);
    assert!(e.hat().is_index_set());
    assert!(e.saturated().is_index_set());
}

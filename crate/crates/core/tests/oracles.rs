use conelab::banded::SymTridiagonal;
use conelab::experiments::dsc::min_singular_value;
use conelab::model::{sphere_spectrum, AngularMode, ConeModel};
use conelab::radial::{assemble_mode_operator, RadialGrid};
use conelab::spaces::domain_norm;
use conelab::spectral::{complexify, eigendecompose, mass_norm, pencil_eigenvalues};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

fn dense(t: &SymTridiagonal) -> DMatrix<f64> {
    let n = t.dim();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            t.diag[i]
        } else if i + 1 == j {
            t.off[i]
        } else if j + 1 == i {
            t.off[j]
        } else {
            0.0
        }
    })
}

/// Eigenvalues of the zonal operator −sin^{−p}θ ∂_θ(sin^p θ ∂_θ) + m²/sin²θ
/// on (0, π) by cell-centred finite volumes, p = n − 2.
fn zonal_eigenvalues(p: f64, m: f64, cells: usize) -> Vec<f64> {
    let d = std::f64::consts::PI / cells as f64;
    let centre = |i: usize| (i as f64 + 0.5) * d;
    let wt: Vec<f64> = (0..cells).map(|i| centre(i).sin().powf(p)).collect();
    let mut k = DMatrix::<f64>::zeros(cells, cells);
    for i in 0..cells - 1 {
        let flux = (((i + 1) as f64) * d).sin().powf(p) / (d * d);
        k[(i, i)] += flux;
        k[(i + 1, i + 1)] += flux;
        k[(i, i + 1)] -= flux;
        k[(i + 1, i)] -= flux;
    }
    for i in 0..cells {
        k[(i, i)] += wt[i] * m * m / centre(i).sin().powi(2);
    }
    // symmetric form W^{-1/2} K W^{-1/2}
    let s = DMatrix::from_fn(cells, cells, |i, j| k[(i, j)] / (wt[i] * wt[j]).sqrt());
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn sphere_spectrum_matches_finite_volume_eigensolve() {
    for n in [3usize, 4, 5] {
        let modes = sphere_spectrum(n, 3).unwrap();
        let fv = zonal_eigenvalues(n as f64 - 2.0, 0.0, 600);
        for (l, m) in modes.iter().enumerate() {
            assert_eq!(m.index, l);
            let rel = if m.lambda_sq == 0.0 {
                fv[l].abs()
            } else {
                (fv[l] - m.lambda_sq).abs() / m.lambda_sq
            };
            assert!(rel <= 1e-3, "n = {n}, l = {l}: {} vs {}", m.lambda_sq, fv[l]);
        }
    }
}

#[test]
fn two_sphere_multiplicities_count_azimuthal_orders() {
    // λ² = ℓ(ℓ+1) appears once in every azimuthal order |m| ≤ ℓ
    let modes = sphere_spectrum(3, 3).unwrap();
    for m in &modes {
        let count: usize = (-3i32..=3)
            .map(|az| {
                zonal_eigenvalues(1.0, az as f64, 300)
                    .iter()
                    .filter(|&&e| (e - m.lambda_sq).abs() <= 1e-2 * m.lambda_sq.max(1.0))
                    .count()
            })
            .sum();
        assert_eq!(m.multiplicity, count, "l = {}", m.index);
    }
    assert_eq!(sphere_spectrum(4, 1).unwrap()[1].lambda_sq, 3.0);
}

fn small_operator(l: usize, h: f64) -> conelab::radial::RadialOperator {
    let model = ConeModel::round(3, 1.0, 2).unwrap();
    let grid = RadialGrid::graded(1.0, 40, 2.0).unwrap();
    let mode = AngularMode {
        index: l,
        lambda_sq: (l * (l + 1)) as f64,
        multiplicity: 2 * l + 1,
    };
    assemble_mode_operator(&model, &grid, &mode, h).unwrap()
}

/// L⁻¹ A L⁻ᵀ with M = L Lᵀ, for the pencil (A, M).
fn whitened(a: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let l = m.clone().cholesky().unwrap().l();
    let li = l.clone().try_inverse().unwrap();
    &li * a * li.transpose()
}

#[test]
fn pencil_eigenvalues_match_dense_solver() {
    for l in 0..3 {
        let op = small_operator(l, 0.5);
        let w = whitened(&dense(&op.stiffness), &dense(&op.mass));
        let mut ev: Vec<f64> = SymmetricEigen::new(w).eigenvalues.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        let ours = pencil_eigenvalues(&op.stiffness, &op.mass, 10);
        for (a, b) in ours.iter().zip(&ev) {
            assert!((a - b).abs() <= 1e-9 * b, "l = {l}: {a} vs {b}");
        }
    }
}

#[test]
fn min_singular_value_matches_dense_svd() {
    let op = small_operator(1, 1.0);
    let s = dense(&op.stiffness);
    let m = dense(&op.mass);
    let l = m.clone().cholesky().unwrap().l();
    let li = l.try_inverse().unwrap();
    let sw = &li * &s * li.transpose();
    let eye = DMatrix::<f64>::identity(s.nrows(), s.ncols());
    for (ht, om) in [
        (0.5, Complex64::new(-1.0, 0.0)),
        (0.125, Complex64::from_polar(1.0, std::f64::consts::PI * 7.0 / 6.0)),
        (0.25, Complex64::new(3.0, 0.2)),
    ] {
        let a = sw.map(|x| Complex64::new(x * ht * ht, 0.0)) - eye.map(|x| om * x);
        let sv = a.singular_values();
        let dense_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let ours = min_singular_value(&op.stiffness, &op.mass, ht, om);
        assert!((ours - dense_min).abs() <= 1e-9 * dense_min.max(1.0), "{ht}, {om}: {ours} vs {dense_min}");
    }
}

#[test]
fn domain_norm_examples() {
    let op = small_operator(0, 1.0);
    let dec = eigendecompose(&op).unwrap();
    let u: Vec<Complex64> = op.grid.interpolate(|x| Complex64::new(1.0 - x * x, x));
    let l2 = mass_norm(&op.mass, &u);
    assert!((domain_norm(&dec, Complex64::new(0.0, 0.0), &u) - l2).abs() <= 1e-12 * l2);
    for k in [0usize, 3, 7] {
        let v = complexify(&dec.vectors[k]);
        let nv = mass_norm(&op.mass, &v);
        let got = domain_norm(&dec, Complex64::new(2.0, 0.0), &v);
        assert!((got - dec.eigenvalues[k] * nv).abs() <= 1e-9 * got, "k = {k}");
    }
}

#[test]
fn lowest_eigenvalue_tracks_first_bessel_zero() {
    let model = ConeModel::round(3, 1.0, 0).unwrap();
    let grid = RadialGrid::graded(1.0, 400, 2.0).unwrap();
    let op = assemble_mode_operator(&model, &grid, &model.angular_modes[0], 1.0).unwrap();
    let mu = pencil_eigenvalues(&op.stiffness, &op.mass, 1)[0];
    let target = 1.0 + std::f64::consts::PI.powi(2);
    assert!((mu - target).abs() / target <= 5e-3);
}

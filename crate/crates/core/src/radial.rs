//! Per-mode piecewise-linear Galerkin discretization of h²Δ_g + 1 on
//! [0, x_max]: natural condition at the tip (form closure, i.e. the
//! Friedrichs realization) and Dirichlet data at x_max.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::SymTridiagonal;
use crate::model::{AngularMode, ConeModel};
use crate::quadrature::legendre_unit;

#[derive(Debug, Error, PartialEq)]
pub enum AssemblyError {
    #[error("grid needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("grid nodes not strictly increasing at position {0}")]
    NotIncreasing(usize),
    #[error("grid must end at x_max = {expected}, ends at {found}")]
    WrongEnd { expected: f64, found: f64 },
    #[error("grading exponent must be at least 1, got {0}")]
    BadGrading(f64),
    #[error("semiclassical parameter must be positive, got {0}")]
    BadH(f64),
    #[error("model-operator radius {0} below 20")]
    ShallowTf(f64),
    #[error("singular assembly: nonpositive mass pivot at row {0}")]
    Singular(usize),
}

/// Vertices x_1 < … < x_N = x_max; the tip x_0 = 0 is implicit. Unknowns
/// are the values at x_0, …, x_{N−1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: f64,
}

impl RadialGrid {
    /// x_i = x_max (i/N)^γ, i = 1..=N.
    pub fn graded(x_max: f64, n: usize, gamma: f64) -> Result<Self, AssemblyError> {
        if gamma < 1.0 {
            return Err(AssemblyError::BadGrading(gamma));
        }
        let nodes = (1..=n)
            .map(|i| {
                if i == n {
                    x_max
                } else {
                    x_max * (i as f64 / n as f64).powf(gamma)
                }
            })
            .collect();
        Self::from_nodes(nodes, gamma, x_max)
    }

    pub fn from_nodes(nodes: Vec<f64>, grading: f64, x_max: f64) -> Result<Self, AssemblyError> {
        if nodes.len() < 16 {
            return Err(AssemblyError::TooFewNodes(nodes.len()));
        }
        if !(grading >= 1.0) {
            return Err(AssemblyError::BadGrading(grading));
        }
        let mut prev = 0.0;
        for (i, &x) in nodes.iter().enumerate() {
            if !(x > prev) {
                return Err(AssemblyError::NotIncreasing(i));
            }
            prev = x;
        }
        let last = *nodes.last().unwrap();
        if last != x_max {
            return Err(AssemblyError::WrongEnd {
                expected: x_max,
                found: last,
            });
        }
        Ok(Self { nodes, grading })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Number of unknowns (equals the number of nodes N).
    pub fn dofs(&self) -> usize {
        self.nodes.len()
    }

    /// x_0 = 0, x_1, …, x_N.
    pub fn vertices(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.nodes.iter().copied()).collect()
    }

    /// Positions of the unknowns, x_0 … x_{N−1}.
    pub fn dof_positions(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.nodes[..self.nodes.len() - 1].iter().copied())
            .collect()
    }

    /// Nodal interpolant of `f` (the Dirichlet value at x_max is dropped).
    pub fn interpolate<T, F: Fn(f64) -> T>(&self, f: F) -> Vec<T> {
        self.dof_positions().into_iter().map(f).collect()
    }
}

/// Galerkin matrices of one angular mode. `stiffness` is the form matrix of
/// h²Δ_g + 1, `mass` the L²(dg) Gram matrix and `laplacian` the h-free form
/// matrix of Δ_g, so that `stiffness = h² laplacian + mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialOperator {
    pub n: usize,
    pub mode: AngularMode,
    pub h: f64,
    pub stiffness: SymTridiagonal,
    pub mass: SymTridiagonal,
    pub laplacian: SymTridiagonal,
    pub grid: RadialGrid,
}

impl RadialOperator {
    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// The same mode at another semiclassical parameter.
    pub fn with_h(&self, h: f64) -> Self {
        Self {
            h,
            stiffness: self.laplacian.combine(h * h, &self.mass, 1.0),
            ..self.clone()
        }
    }

    /// M⁻¹S x, one application of the discrete operator.
    pub fn apply(&self, x: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        self.mass.solve_spd_c(&self.stiffness.matvec_c(x))
    }

    /// ‖x‖²_M.
    pub fn mass_norm_sq(&self, x: &[num_complex::Complex64]) -> f64 {
        self.mass.form_c(x)
    }
}

/// Element matrices [[a00, a01], [a01, a11]] of the gradient, angular and
/// mass forms on every element.
struct ElementForms {
    grad: Vec<[f64; 3]>,
    ang: Vec<[f64; 3]>,
    mass: Vec<[f64; 3]>,
}

fn element_forms(model: &ConeModel, grid: &RadialGrid) -> ElementForms {
    let q = (model.n / 2 + 3).max(4);
    let rule = legendre_unit(q);
    let verts = grid.vertices();
    let ne = verts.len() - 1;
    let mut grad = Vec::with_capacity(ne);
    let mut ang = Vec::with_capacity(ne);
    let mut mass = Vec::with_capacity(ne);
    let m = (model.n - 1) as f64;
    for e in 0..ne {
        let (a, b) = (verts[e], verts[e + 1]);
        let len = b - a;
        let mut g = [0.0; 3];
        let mut an = [0.0; 3];
        let mut ms = [0.0; 3];
        for &(t, w) in &rule {
            let x = a + t * len;
            let phi = model.phi(x);
            let rho = x.powf(m) * (m * phi).exp();
            let wr = w * len * rho;
            let (l, r) = (1.0 - t, t);
            let dl = -1.0 / len;
            let dr = 1.0 / len;
            g[0] += wr * dl * dl;
            g[1] += wr * dl * dr;
            g[2] += wr * dr * dr;
            // (n−1) ≥ 2 keeps x^{n−3} e^{...} bounded at the tip
            let wa = w * len * x.powf(m - 2.0) * ((m - 2.0) * phi).exp();
            an[0] += wa * l * l;
            an[1] += wa * l * r;
            an[2] += wa * r * r;
            ms[0] += wr * l * l;
            ms[1] += wr * l * r;
            ms[2] += wr * r * r;
        }
        grad.push(g);
        ang.push(an);
        mass.push(ms);
    }
    ElementForms { grad, ang, mass }
}

fn scatter(elems: &[[f64; 3]], dofs: usize) -> SymTridiagonal {
    let mut out = SymTridiagonal::zeros(dofs);
    for (e, a) in elems.iter().enumerate() {
        // element e joins vertices e and e+1; vertex N carries the Dirichlet value
        let (i, j) = (e, e + 1);
        out.diag[i] += a[0];
        if j < dofs {
            out.diag[j] += a[2];
            out.off[i] += a[1];
        }
    }
    out
}

fn check_mass(mass: &SymTridiagonal) -> Result<(), AssemblyError> {
    let n = mass.dim();
    let mut d_prev = 0.0;
    for i in 0..n {
        let d = if i == 0 {
            mass.diag[0]
        } else {
            mass.diag[i] - mass.off[i - 1] * mass.off[i - 1] / d_prev
        };
        if !(d > 0.0) || !d.is_finite() {
            return Err(AssemblyError::Singular(i));
        }
        d_prev = d;
    }
    Ok(())
}

/// Galerkin realization of h²Δ_g + 1 on one mode:
/// q(u,v) = ∫ (h²u′v′ + h²λ² e^{−2φ} x^{−2} uv + uv) x^{n−1} e^{(n−1)φ} dx.
pub fn assemble_mode_operator(
    model: &ConeModel,
    grid: &RadialGrid,
    mode: &AngularMode,
    h: f64,
) -> Result<RadialOperator, AssemblyError> {
    if !(h > 0.0) {
        return Err(AssemblyError::BadH(h));
    }
    let forms = element_forms(model, grid);
    let dofs = grid.dofs();
    let grad = scatter(&forms.grad, dofs);
    let ang = scatter(&forms.ang, dofs);
    let mass = scatter(&forms.mass, dofs);
    check_mass(&mass)?;
    let laplacian = grad.combine(1.0, &ang, mode.lambda_sq);
    let stiffness = laplacian.combine(h * h, &mass, 1.0);
    Ok(RadialOperator {
        n: model.n,
        mode: *mode,
        h,
        stiffness,
        mass,
        laplacian,
        grid: grid.clone(),
    })
}

/// N_tf(A) = Δ_{g₀} + 1 on the exact cone in the variable x̂ = x/h, with
/// Dirichlet data at x̂_max.
pub fn assemble_model_operator_tf(
    model: &ConeModel,
    grid: &RadialGrid,
    mode: &AngularMode,
) -> Result<RadialOperator, AssemblyError> {
    if grid.x_max() < 20.0 {
        return Err(AssemblyError::ShallowTf(grid.x_max()));
    }
    let exact = ConeModel {
        n: model.n,
        x_max: grid.x_max(),
        angular_modes: model.angular_modes.clone(),
        warp: None,
    };
    assemble_mode_operator(&exact, grid, mode, 1.0)
}

/// Default radius of the model problem in the rescaled variable.
pub const TF_RADIUS: f64 = 40.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConeModel, Warp};

    fn mode(l: usize, n: usize) -> AngularMode {
        AngularMode {
            index: l,
            lambda_sq: (l * (l + n - 2)) as f64,
            multiplicity: 1,
        }
    }

    #[test]
    fn grid_validation() {
        assert!(RadialGrid::graded(1.0, 10, 2.0).is_err());
        assert!(RadialGrid::graded(1.0, 32, 0.5).is_err());
        let g = RadialGrid::graded(2.0, 32, 2.0).unwrap();
        assert_eq!(g.x_max(), 2.0);
        assert_eq!(g.dofs(), 32);
        assert!(RadialGrid::from_nodes(vec![0.5; 20], 1.0, 0.5).is_err());
    }

    #[test]
    fn symmetric_and_above_mass() {
        let mut model = ConeModel::round(3, 1.0, 2).unwrap();
        model.warp = Some(Warp::new(vec![0.0, 0.3, -0.2]));
        let g = RadialGrid::graded(1.0, 64, 2.0).unwrap();
        let op = assemble_mode_operator(&model, &g, &mode(1, 3), 0.3).unwrap();
        // stored symmetric by construction; S − M = h² K with K ⪰ 0
        let d = op.stiffness.combine(1.0, &op.mass, -1.0);
        assert!(d.pencil_count_below(&op.mass, -1e-12) == 0);
    }

    #[test]
    fn constant_vector_form() {
        // λ² = 0, h = 1: q(1,1) = ∫ (u′² + u²) x² dx for the ramp to zero on the last element
        let model = ConeModel::round(3, 1.0, 0).unwrap();
        let g = RadialGrid::graded(1.0, 20, 1.0).unwrap();
        let op = assemble_mode_operator(&model, &g, &mode(0, 3), 1.0).unwrap();
        let ones = vec![1.0; g.dofs()];
        let q = op.stiffness.form(&ones, &ones);
        let a = 1.0 - 1.0 / 20.0;
        // ∫_0^a x² dx + ∫_a^1 ((1−x)/(1−a))² x² dx + ∫_a^1 x²/(1−a)² dx
        let l = 1.0 - a;
        let mass_tail = {
            // substitute s = 1 − x
            let f = |s: f64| (s / l).powi(2) * (1.0 - s).powi(2);
            let r = legendre_unit(8);
            r.iter().map(|(t, w)| w * l * f(t * l)).sum::<f64>()
        };
        let grad_tail = (1.0 - a.powi(3)) / 3.0 / (l * l);
        let exact = a.powi(3) / 3.0 + mass_tail + grad_tail;
        assert!((q - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn tf_requires_depth() {
        let model = ConeModel::round(3, 1.0, 0).unwrap();
        let g = RadialGrid::graded(10.0, 32, 2.0).unwrap();
        assert_eq!(
            assemble_model_operator_tf(&model, &g, &mode(0, 3)),
            Err(AssemblyError::ShallowTf(10.0))
        );
    }
}

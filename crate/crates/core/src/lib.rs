//! Numerical laboratory for semiclassical cone Laplacians h²Δ_g + 1 on
//! truncated cones: separated radial discretizations, resolvents, complex
//! powers by contour integration and by functional calculus, weighted cone
//! Sobolev norms, and index-set algebra.

// `!(x > 0.0)` style guards deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod indicial;
pub mod model;
pub mod quadrature;
pub mod radial;
pub mod spectral;
pub mod bessel;
pub mod seeley;
pub mod spaces;
pub mod experiments;
pub mod io;
pub mod config;
pub mod run;
pub mod cli;

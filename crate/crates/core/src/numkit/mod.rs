//! Dense complex linear algebra, DFT unitaries, normal-matrix
//! diagonalization, exact rationals and planar convex hulls.

mod dft;
mod eig;
mod family;
mod hull;
mod matrix;
mod rational;

pub use dft::dft_unitary;
pub use eig::{diagonalize_normal, flatten_constant_diagonal, hermitian_eigen, NormalDecomposition};
pub use family::{conditional_expectation_diag, verify_projection_family, FamilyReport};
pub use hull::{
    barycentric_coordinates, barycentric_exact, convex_hull, convex_hull_exact, hull_distance, hull_membership,
    hull_membership_exact, ExactComplex, ExactHullMembership, HullMembership, HullQuery,
};
pub use matrix::{gram, ComplexMatrix};
pub(crate) use matrix::gemm_strided;
pub use rational::{common_denominator, simplest_in, Rational};

pub use num_complex::Complex64;

/// Default tolerance for projection-family checks.
pub const PROJECTION_TOL: f64 = 1e-9;
/// Default tolerance for constructed unitaries.
pub const UNITARY_TOL: f64 = 1e-12;

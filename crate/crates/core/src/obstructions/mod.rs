//! Certified negative results and their contrast with truncated
//! constructions: a search over `U(3)` for the 3×3 diagonal obstruction,
//! the exact Farkas certificate for the four-point square, and a
//! side-by-side run of the tail-extended problems.
//!
//! The 3×3 nonexistence is a known result; the search only reports an
//! empirical floor consistent with it.

mod contrast;
mod search;
mod square;

pub use contrast::{contrast_demo, contrast_partition, contrast_target, ContrastReport, ContrastSide};
pub use search::{
    arveson_eigenvalues, arveson_search, arveson_target, haar_unitary, minimize_diagonal_residual, SearchConfig,
    SearchReport,
};
pub use square::{
    extreme_point_bounds, square_infeasibility_certificate, square_interior_witness, square_system, ExtremePointBound,
    SquareCertificate,
};

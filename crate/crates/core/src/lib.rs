//! Constructions of projection families and unitaries with prescribed
//! approximate diagonals, together with verification oracles and exact
//! infeasibility certificates.

pub mod carpenter;
pub mod error;
pub mod numkit;
pub mod obstructions;
pub mod schurhorn;

pub use error::{Error, Result};
pub use numkit::{Complex64, ComplexMatrix, Rational};

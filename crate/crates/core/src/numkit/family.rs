use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Diagonal of `M`, i.e. its image under the conditional expectation onto
/// the diagonal matrices.
pub fn conditional_expectation_diag(m: &ComplexMatrix) -> Vec<Complex64> {
    m.diag()
}

/// Residuals of the projection-family axioms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub dim: usize,
    pub count: usize,
    /// Per projection: max |P - P*|.
    pub hermitian: Vec<f64>,
    /// Per projection: max |P² - P|.
    pub idempotent: Vec<f64>,
    /// max |P_j P_k| over j ≠ k.
    pub orthogonality: f64,
    /// max |Σ P_k - I|.
    pub sum: f64,
    pub tol: f64,
    pub pass: bool,
}

impl FamilyReport {
    pub fn worst(&self) -> f64 {
        self.hermitian
            .iter()
            .chain(&self.idempotent)
            .copied()
            .chain([self.orthogonality, self.sum])
            .fold(0.0, f64::max)
    }

    pub fn from_parts(
        dim: usize,
        count: usize,
        hermitian: Vec<f64>,
        idempotent: Vec<f64>,
        orthogonality: f64,
        sum: f64,
        tol: f64,
    ) -> FamilyReport {
        FamilyReport { dim, count, hermitian, idempotent, orthogonality, sum, tol, pass: true }.finish()
    }

    fn finish(mut self) -> Self {
        self.pass = self.worst() <= self.tol;
        self
    }

    /// Combines reports of the diagonal blocks of a block-diagonal family.
    /// Off-block entries are exactly zero, so every residual is the maximum
    /// of the blockwise residuals.
    pub fn merge_blocks(reports: &[FamilyReport], dim: usize, count: usize, tol: f64) -> FamilyReport {
        let mut out = FamilyReport {
            dim,
            count,
            hermitian: vec![0.0; count],
            idempotent: vec![0.0; count],
            orthogonality: 0.0,
            sum: 0.0,
            tol,
            pass: true,
        };
        for r in reports {
            for k in 0..count {
                out.hermitian[k] = out.hermitian[k].max(r.hermitian[k]);
                out.idempotent[k] = out.idempotent[k].max(r.idempotent[k]);
            }
            out.orthogonality = out.orthogonality.max(r.orthogonality);
            out.sum = out.sum.max(r.sum);
        }
        out.finish()
    }
}

/// Checks that `P` is a family of pairwise-orthogonal projections summing to
/// the identity.
pub fn verify_projection_family(p: &[ComplexMatrix], tol: f64) -> Result<FamilyReport> {
    let dim = p.first().map(|m| m.dim()).unwrap_or(0);
    if let Some(bad) = p.iter().find(|m| m.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let squares: Vec<ComplexMatrix> = p.iter().map(|m| m.matmul(m)).collect();
    let hermitian = p.iter().map(|m| m.hermitian_residual()).collect();
    let idempotent = p.iter().zip(&squares).map(|(m, s)| s.max_abs_diff(m)).collect();
    let mut orthogonality: f64 = 0.0;
    for j in 0..p.len() {
        for k in j + 1..p.len() {
            orthogonality = orthogonality.max(p[j].matmul(&p[k]).max_abs());
        }
    }
    let mut sum: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let total: Complex64 = p.iter().map(|m| m[(a, b)]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            sum = sum.max((total - target).norm());
        }
    }
    Ok(FamilyReport {
        dim,
        count: p.len(),
        hermitian,
        idempotent,
        orthogonality,
        sum,
        tol,
        pass: true,
    }
    .finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_family() {
        let r = verify_projection_family(&[ComplexMatrix::identity(2)], 1e-9).unwrap();
        assert!(r.pass);
        assert_eq!(r.worst(), 0.0);
    }

    #[test]
    fn diagonal_complements() {
        let p = [ComplexMatrix::from_real_diag(&[1.0, 0.0]), ComplexMatrix::from_real_diag(&[0.0, 1.0])];
        assert!(verify_projection_family(&p, 1e-9).unwrap().pass);
    }

    #[test]
    fn duplicated_projection_fails() {
        let p = [ComplexMatrix::from_real_diag(&[1.0, 0.0]), ComplexMatrix::from_real_diag(&[1.0, 0.0])];
        let r = verify_projection_family(&p, 1e-9).unwrap();
        assert!(!r.pass);
        assert_eq!(r.orthogonality, 1.0);
        assert_eq!(r.sum, 1.0);
    }

    #[test]
    fn orthogonality_is_max_entry_of_product() {
        let h = 0.5;
        let p = ComplexMatrix::from_rows(vec![vec![c(h), c(h)], vec![c(h), c(h)]]).unwrap();
        let q = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let r = verify_projection_family(&[p.clone(), q.clone()], 1e-9).unwrap();
        assert!((r.orthogonality - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions() {
        let p = [ComplexMatrix::identity(2), ComplexMatrix::identity(3)];
        assert!(matches!(verify_projection_family(&p, 1e-9), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn conditional_expectation_examples() {
        assert_eq!(conditional_expectation_diag(&ComplexMatrix::identity(3)), vec![c(1.0); 3]);
        let swap = ComplexMatrix::from_rows(vec![vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]).unwrap();
        assert_eq!(conditional_expectation_diag(&swap), vec![c(0.0); 2]);
    }
}

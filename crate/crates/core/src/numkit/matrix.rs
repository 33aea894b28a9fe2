use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data of length `dim * dim`.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        if n == 0 {
            return out;
        }
        let rs = n as isize;
        // SAFETY: all three buffers hold n*n contiguous Complex64 values, which
        // share the layout of [f64; 2]; the output does not alias the inputs.
        unsafe {
            matrixmultiply::zgemm(
                matrixmultiply::CGemmOption::Standard,
                matrixmultiply::CGemmOption::Standard,
                n,
                n,
                n,
                [1.0, 0.0],
                self.data.as_ptr() as *const [f64; 2],
                rs,
                1,
                other.data.as_ptr() as *const [f64; 2],
                rs,
                1,
                [0.0, 0.0],
                out.data.as_mut_ptr() as *mut [f64; 2],
                rs,
                1,
            );
        }
        out
    }

    /// Computes `U* self U`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.adjoint().matmul(&self.matmul(u))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.dim))
    }

    pub fn idempotence_residual(&self) -> f64 {
        self.matmul(self).max_abs_diff(self)
    }

    /// Max-norm of `N N* - N* N`.
    pub fn normality_residual(&self) -> f64 {
        let a = self.adjoint();
        self.matmul(&a).max_abs_diff(&a.matmul(self))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.idempotence_residual() <= tol
    }

    pub fn is_normal(&self, tol: f64) -> bool {
        self.normality_residual() <= tol
    }
}

/// Row-major product of an `m x k` matrix and a `k x n` matrix, where the
/// left factor is read through arbitrary strides.
pub(crate) fn gemm_strided(m: usize, k: usize, n: usize, a: &[Complex64], rsa: usize, csa: usize, b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; m * n];
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    assert!(b.len() >= k * n);
    assert!(a.len() > (m - 1) * rsa + (k - 1) * csa);
    // SAFETY: bounds are asserted above; Complex64 has the layout of [f64; 2]
    // and the output buffer is distinct from both inputs.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            rsa as isize,
            csa as isize,
            b.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    out
}

/// `A* A` for a row-major `r x s` matrix `A`, returned as an `s x s` matrix.
pub fn gram(r: usize, s: usize, a: &[Complex64]) -> ComplexMatrix {
    assert_eq!(a.len(), r * s);
    let conj: Vec<Complex64> = a.iter().map(|z| z.conj()).collect();
    // conj(A) read transposed: element (i, t) of A* sits at t*s + i.
    let data = gemm_strided(s, r, s, &conj, 1, s, a);
    ComplexMatrix { dim: s, data }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Complex64>>::deserialize(d)?;
        ComplexMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let n = a.dim();
        ComplexMatrix::from_fn(n, |i, j| (0..n).map(|k| a[(i, k)] * b[(k, j)]).sum())
    }

    #[test]
    fn matmul_matches_triple_loop() {
        for n in [1usize, 2, 3, 7, 17, 40] {
            let a = ComplexMatrix::from_fn(n, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64) - j as f64));
            let b = ComplexMatrix::from_fn(n, |i, j| c(((i + 2 * j) % 5) as f64, 0.5 * j as f64));
            let fast = a.matmul(&b);
            let slow = naive_mul(&a, &b);
            assert!(fast.max_abs_diff(&slow) < 1e-9 * (1.0 + slow.max_abs()));
        }
    }

    #[test]
    fn gram_matches_adjoint_product() {
        let rows = 3;
        let s = 5;
        let a: Vec<Complex64> = (0..rows * s).map(|t| c((t % 7) as f64 - 3.0, (t % 4) as f64 * 0.5)).collect();
        let g = gram(rows, s, &a);
        let naive = ComplexMatrix::from_fn(s, |i, j| (0..rows).map(|t| a[t * s + i].conj() * a[t * s + j]).sum());
        assert!(g.max_abs_diff(&naive) < 1e-12);
    }

    #[test]
    fn adjoint_is_conjugate_transpose() {
        let a = ComplexMatrix::from_rows(vec![vec![c(1.0, 2.0), c(3.0, -1.0)], vec![c(0.0, 1.0), c(5.0, 0.0)]]).unwrap();
        let h = a.adjoint();
        assert_eq!(h[(0, 1)], c(0.0, -1.0));
        assert_eq!(h[(1, 0)], c(3.0, 1.0));
        assert_eq!(h[(0, 0)], c(1.0, -2.0));
    }

    #[test]
    fn predicates() {
        let p = ComplexMatrix::from_rows(vec![vec![c(0.5, 0.0), c(0.5, 0.0)], vec![c(0.5, 0.0), c(0.5, 0.0)]]).unwrap();
        assert!(p.is_projection(1e-15));
        assert!(p.is_hermitian(0.0));
        assert!(!p.is_unitary(1e-3));
        let rot = ComplexMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(rot.is_unitary(1e-15));
        assert!(rot.is_normal(1e-15));
        let jordan = ComplexMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(!jordan.is_normal(0.5));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = ComplexMatrix::from_rows(vec![vec![c(1.0, 0.0)], vec![]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn json_round_trip() {
        let a = ComplexMatrix::from_rows(vec![vec![c(1.0, 2.0), c(3.0, -1.0)], vec![c(0.0, 1.0), c(5.0, 0.0)]]).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text, "[[[1.0,2.0],[3.0,-1.0]],[[0.0,1.0],[5.0,0.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
    }
}

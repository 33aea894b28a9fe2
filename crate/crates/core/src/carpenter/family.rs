use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{gemm_strided, gram, ComplexMatrix, FamilyReport};

/// One diagonal block of a block-diagonal projection family. On the listed
/// coordinates every projection has the form `P_k = U* Q_k U`, where `Q_k`
/// is the diagonal projection onto the rows of `U` colored `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyBlock {
    /// Global coordinates covered by this block, in block order.
    pub indices: Vec<usize>,
    pub unitary: ComplexMatrix,
    /// Color (projection index) of each row of `unitary`.
    pub colors: Vec<usize>,
}

impl FamilyBlock {
    pub fn new(indices: Vec<usize>, unitary: ComplexMatrix, colors: Vec<usize>) -> Self {
        debug_assert_eq!(indices.len(), unitary.dim());
        debug_assert_eq!(colors.len(), unitary.dim());
        FamilyBlock {
            indices,
            unitary,
            colors,
        }
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// Rank of `P_k` on this block.
    pub fn rank(&self, k: usize) -> usize {
        self.colors.iter().filter(|&&c| c == k).count()
    }

    /// Rows of `U` colored `k`, as an `r × s` row-major matrix `A_k`, so that
    /// `P_k = A_k* A_k` on the block.
    fn factor(&self, k: usize) -> (usize, Vec<Complex64>) {
        let rows: Vec<usize> = (0..self.size()).filter(|&r| self.colors[r] == k).collect();
        let mut a = Vec::with_capacity(rows.len() * self.size());
        for &r in &rows {
            a.extend_from_slice(self.unitary.row(r));
        }
        (rows.len(), a)
    }

    /// `P_k` restricted to the block.
    pub fn projection(&self, k: usize) -> ComplexMatrix {
        let (r, a) = self.factor(k);
        gram(r, self.size(), &a)
    }

    /// Projection-family residuals of the block.
    ///
    /// Dense unitaries are checked exactly through the row factors,
    /// `P_j P_k = A_j* (A_j A_k*) A_k`. When `U` is sparse (at most a quarter
    /// of its entries nonzero) the projections are accumulated from sparse
    /// rows and the product residuals are replaced by the rigorous bound
    /// `|A_j* E A_k|_max ≤ max‖A_j e_a‖ · ‖E‖_F · max‖A_k e_b‖` with
    /// `E = A_j A_k* - δ_jk I`, avoiding the cubic dense products.
    pub fn verify(&self, count: usize, tol: f64) -> FamilyReport {
        let s = self.size();
        let nnz = self.unitary.as_slice().iter().filter(|z| **z != Complex64::new(0.0, 0.0)).count();
        if s > 32 && 4 * nnz <= s * s {
            self.verify_sparse(count, tol)
        } else {
            self.verify_dense(count, tol)
        }
    }

    fn verify_sparse(&self, count: usize, tol: f64) -> FamilyReport {
        let s = self.size();
        let zero = Complex64::new(0.0, 0.0);
        let rows: Vec<Vec<(usize, Complex64)>> = (0..s)
            .map(|r| self.unitary.row(r).iter().enumerate().filter(|(_, z)| **z != zero).map(|(c, z)| (c, *z)).collect())
            .collect();
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); s];
        for (r, row) in rows.iter().enumerate() {
            for &(c, z) in row {
                cols[c].push((r, z));
            }
        }

        let mut hermitian = vec![0.0; count];
        let mut col_norm = vec![0.0f64; count];
        let mut total = vec![zero; s * s];
        let mut p = vec![zero; s * s];
        for k in 0..count {
            p.iter_mut().for_each(|z| *z = zero);
            for (r, row) in rows.iter().enumerate() {
                if self.colors[r] != k {
                    continue;
                }
                for &(a, ua) in row {
                    let ua = ua.conj();
                    let line = &mut p[a * s..(a + 1) * s];
                    for &(b, ub) in row {
                        line[b] += ua * ub;
                    }
                }
            }
            for a in 0..s {
                col_norm[k] = col_norm[k].max(p[a * s + a].re);
                for b in a..s {
                    hermitian[k] = f64::max(hermitian[k], (p[a * s + b] - p[b * s + a].conj()).norm());
                }
            }
            total.iter_mut().zip(&p).for_each(|(t, x)| *t += x);
        }
        let mut sum: f64 = 0.0;
        for a in 0..s {
            for b in 0..s {
                let target = if a == b { 1.0 } else { 0.0 };
                sum = sum.max((total[a * s + b] - target).norm());
            }
        }

        // Squared Frobenius norms of the color blocks of U U* - I, row by row.
        let mut frob = vec![vec![0.0f64; count]; count];
        let mut g = vec![zero; s];
        for (r, row) in rows.iter().enumerate() {
            g.iter_mut().for_each(|z| *z = zero);
            for &(c, u) in row {
                for &(r2, v) in &cols[c] {
                    g[r2] += u * v.conj();
                }
            }
            g[r] -= 1.0;
            let cr = self.colors[r];
            for (r2, z) in g.iter().enumerate() {
                frob[cr][self.colors[r2]] += z.norm_sqr();
            }
        }
        let mut idempotent = vec![0.0; count];
        let mut orthogonality: f64 = 0.0;
        for j in 0..count {
            for k in 0..count {
                let bound = (col_norm[j] * col_norm[k]).sqrt() * frob[j][k].sqrt();
                if j == k {
                    idempotent[k] = bound;
                } else {
                    orthogonality = orthogonality.max(bound);
                }
            }
        }
        FamilyReport::from_parts(s, count, hermitian, idempotent, orthogonality, sum, tol)
    }

    fn verify_dense(&self, count: usize, tol: f64) -> FamilyReport {
        let s = self.size();
        let factors: Vec<(usize, Vec<Complex64>)> = (0..count).map(|k| self.factor(k)).collect();
        let adjoints: Vec<Vec<Complex64>> = factors
            .iter()
            .map(|(r, a)| {
                let mut t = vec![Complex64::new(0.0, 0.0); s * r];
                for i in 0..*r {
                    for c in 0..s {
                        t[c * r + i] = a[i * s + c].conj();
                    }
                }
                t
            })
            .collect();
        let projections: Vec<ComplexMatrix> = factors.iter().map(|(r, a)| gram(*r, s, a)).collect();
        let mut idempotent = vec![0.0; count];
        let mut orthogonality: f64 = 0.0;
        for j in 0..count {
            let (rj, aj) = &factors[j];
            for k in j..count {
                let (rk, ak) = &factors[k];
                if *rj == 0 || *rk == 0 {
                    continue;
                }
                let g = gemm_strided(*rj, s, *rk, aj, s, 1, &adjoints[k]);
                let h = gemm_strided(s, *rj, *rk, &adjoints[j], *rj, 1, &g);
                let prod = gemm_strided(s, *rk, s, &h, *rk, 1, ak);
                if j == k {
                    let pk = projections[k].as_slice();
                    idempotent[k] = prod.iter().zip(pk).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                } else {
                    orthogonality = orthogonality.max(prod.iter().map(|z| z.norm()).fold(0.0, f64::max));
                }
            }
        }
        let mut total = ComplexMatrix::zeros(s);
        for p in &projections {
            total = &total + p;
        }
        FamilyReport::from_parts(
            s,
            count,
            projections.iter().map(|p| p.hermitian_residual()).collect(),
            idempotent,
            orthogonality,
            total.max_abs_diff(&ComplexMatrix::identity(s)),
            tol,
        )
    }

    /// Diagonal of `P_k` on the block: entry `a` is the sum over rows colored
    /// `k` of |U[r, a]|².
    pub fn projection_diag(&self, k: usize) -> Vec<f64> {
        let s = self.size();
        let mut d = vec![0.0; s];
        for r in 0..s {
            if self.colors[r] == k {
                for (a, z) in self.unitary.row(r).iter().enumerate() {
                    d[a] += z.norm_sqr();
                }
            }
        }
        d
    }

    /// Diagonal of `U* diag(values[color]) U`.
    pub fn weighted_diag(&self, values: &[Complex64]) -> Vec<Complex64> {
        let s = self.size();
        let mut d = vec![Complex64::new(0.0, 0.0); s];
        for r in 0..s {
            let v = values[self.colors[r]];
            for (a, z) in self.unitary.row(r).iter().enumerate() {
                d[a] += v * z.norm_sqr();
            }
        }
        d
    }
}

/// Block-diagonal family of pairwise-orthogonal projections summing to the
/// identity on `C^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionFamily {
    pub dim: usize,
    /// Number of projections.
    pub count: usize,
    pub blocks: Vec<FamilyBlock>,
}

impl ProjectionFamily {
    /// Validates that the blocks tile `0..dim` and that colors are in range.
    pub fn new(dim: usize, count: usize, blocks: Vec<FamilyBlock>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for b in &blocks {
            if b.unitary.dim() != b.indices.len() || b.colors.len() != b.indices.len() {
                return Err(Error::InvalidInput("block shape mismatch".into()));
            }
            if let Some(&c) = b.colors.iter().find(|&&c| c >= count) {
                return Err(Error::InvalidInput(format!("color {c} out of range for {count} projections")));
            }
            for &i in &b.indices {
                if i >= dim || seen[i] {
                    return Err(Error::InvalidInput(format!("coordinate {i} missing or covered twice")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!("coordinate {i} not covered by any block")));
        }
        Ok(ProjectionFamily { dim, count, blocks })
    }

    /// Family consisting of the identity alone.
    pub fn identity(dim: usize) -> Self {
        ProjectionFamily {
            dim,
            count: 1,
            blocks: vec![FamilyBlock::new((0..dim).collect(), ComplexMatrix::identity(dim), vec![0; dim])],
        }
    }

    /// Diagonals of all projections: `out[k][i]` is `diag(P_k)[i]`.
    pub fn diagonals(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; self.count];
        for b in &self.blocks {
            for (k, row) in out.iter_mut().enumerate() {
                if b.rank(k) == 0 {
                    continue;
                }
                for (a, v) in b.projection_diag(k).into_iter().enumerate() {
                    row[b.indices[a]] = v;
                }
            }
        }
        out
    }

    /// Diagonal of `W* diag(values[color]) W` where `W` is the block unitary.
    pub fn weighted_diag(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for b in &self.blocks {
            for (a, v) in b.weighted_diag(values).into_iter().enumerate() {
                out[b.indices[a]] = v;
            }
        }
        out
    }

    /// Ranks of every projection.
    pub fn ranks(&self) -> Vec<usize> {
        (0..self.count).map(|k| self.blocks.iter().map(|b| b.rank(k)).sum()).collect()
    }

    /// Verifies the family blockwise; off-block entries vanish identically,
    /// so the merged report equals the report on the dense matrices.
    pub fn verify(&self, tol: f64) -> FamilyReport {
        let reports: Vec<FamilyReport> = self
            .blocks
            .iter()
            .map(|b| b.verify(self.count, tol))
            .collect();
        FamilyReport::merge_blocks(&reports, self.dim, self.count, tol)
    }

    /// Dense projections on `C^dim`.
    pub fn to_dense(&self) -> Vec<ComplexMatrix> {
        let mut out = vec![ComplexMatrix::zeros(self.dim); self.count];
        for b in &self.blocks {
            for (k, p) in out.iter_mut().enumerate() {
                if b.rank(k) == 0 {
                    continue;
                }
                let local = b.projection(k);
                for (a, &ga) in b.indices.iter().enumerate() {
                    for (c, &gc) in b.indices.iter().enumerate() {
                        p[(ga, gc)] = local[(a, c)];
                    }
                }
            }
        }
        out
    }

    /// Dense unitary `W` with `P_k = W* Q_k W`, where `Q_k` is the diagonal
    /// projection onto the coordinates listed by [`Self::coloring`].
    pub fn unitary_dense(&self) -> ComplexMatrix {
        let mut w = ComplexMatrix::zeros(self.dim);
        for b in &self.blocks {
            for (r, &gr) in b.indices.iter().enumerate() {
                for (c, &gc) in b.indices.iter().enumerate() {
                    w[(gr, gc)] = b.unitary[(r, c)];
                }
            }
        }
        w
    }

    /// Color of every coordinate of the diagonal basis in which `Q_k` lives.
    pub fn coloring(&self) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for b in &self.blocks {
            for (r, &g) in b.indices.iter().enumerate() {
                out[g] = b.colors[r];
            }
        }
        out
    }

    /// Re-expresses a family built on a subset of projection indices in the
    /// full index range; missing indices become zero projections.
    pub fn expand_colors(mut self, kept: &[usize], count: usize) -> Self {
        for b in &mut self.blocks {
            for c in &mut b.colors {
                *c = kept[*c];
            }
        }
        self.count = count;
        self
    }
}

/// Per-projection comparison of spectrum and essential spectrum in the
/// truncation model: eigenvalue `e ∈ {0,1}` of `P_k` counts as essential when
/// it occurs in a block that is repeated indefinitely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecurrence {
    pub projection: usize,
    /// Eigenvalues of `P_k` over the whole truncation.
    pub spectrum: Vec<u8>,
    /// Eigenvalues of `P_k` on the repeated blocks.
    pub essential: Vec<u8>,
    pub equal: bool,
}

pub(crate) fn spectrum_recurrence(family: &ProjectionFamily, repeated: &[bool]) -> Vec<SpectrumRecurrence> {
    (0..family.count)
        .map(|k| {
            let mut all = [false; 2];
            let mut ess = [false; 2];
            for (b, &rep) in family.blocks.iter().zip(repeated) {
                let r = b.rank(k);
                let has = [r < b.size(), r > 0];
                for e in 0..2 {
                    all[e] |= has[e];
                    if rep {
                        ess[e] |= has[e];
                    }
                }
            }
            let collect = |f: [bool; 2]| (0..2u8).filter(|&e| f[e as usize]).collect::<Vec<_>>();
            let spectrum = collect(all);
            let essential = collect(ess);
            SpectrumRecurrence {
                projection: k,
                equal: spectrum == essential,
                spectrum,
                essential,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{dft_unitary, verify_projection_family};

    fn two_block_family() -> ProjectionFamily {
        let b0 = FamilyBlock::new(vec![0, 2], dft_unitary(2), vec![0, 1]);
        let b1 = FamilyBlock::new(vec![1, 3, 4], dft_unitary(3), vec![1, 1, 0]);
        ProjectionFamily::new(5, 2, vec![b0, b1]).unwrap()
    }

    #[test]
    fn blockwise_report_equals_dense_report() {
        let fam = two_block_family();
        let block = fam.verify(1e-9);
        let dense = verify_projection_family(&fam.to_dense(), 1e-9).unwrap();
        assert!(block.pass && dense.pass, "{block:?}\n{dense:?}");
        assert!((block.worst() - dense.worst()).abs() < 1e-14);
    }

    #[test]
    fn diagonals_match_dense() {
        let fam = two_block_family();
        let dense = fam.to_dense();
        for (k, row) in fam.diagonals().iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                assert!((dense[k][(i, i)].re - v).abs() < 1e-14);
            }
        }
        assert!((fam.diagonals()[0][1] - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(fam.ranks(), vec![2, 3]);
    }

    #[test]
    fn dense_unitary_conjugates_coloring() {
        let fam = two_block_family();
        let w = fam.unitary_dense();
        let colors = fam.coloring();
        for (k, p) in fam.to_dense().iter().enumerate() {
            let q: Vec<f64> = colors.iter().map(|&c| if c == k { 1.0 } else { 0.0 }).collect();
            let rebuilt = ComplexMatrix::from_real_diag(&q).conjugate_by(&w);
            assert!(rebuilt.max_abs_diff(p) < 1e-14);
        }
    }

    #[test]
    fn tiling_is_checked() {
        let b0 = FamilyBlock::new(vec![0, 0], dft_unitary(2), vec![0, 1]);
        assert!(ProjectionFamily::new(2, 2, vec![b0]).is_err());
        let b1 = FamilyBlock::new(vec![0], dft_unitary(1), vec![0]);
        assert!(ProjectionFamily::new(2, 1, vec![b1]).is_err());
    }

    #[test]
    fn sparse_bounds_dominate_exact_residuals() {
        let built = super::super::carpenter_block(&[0.3137, 0.6863], &[0.4129, 0.5871], 0.005).unwrap();
        let mut block = built.family.blocks[0].clone();
        assert!(block.size() > 32, "{}", block.size());
        // Perturb one entry so every residual is visibly nonzero.
        block.unitary[(0, 0)] += Complex64::new(1e-6, 0.0);
        let count = built.family.count;
        let sparse = block.verify(count, 1e-9);
        let dense = block.verify_dense(count, 1e-9);
        for k in 0..count {
            assert!((sparse.hermitian[k] - dense.hermitian[k]).abs() < 1e-15);
            assert!(sparse.idempotent[k] + 1e-15 >= dense.idempotent[k]);
            assert!(sparse.idempotent[k] < 1e-5);
        }
        assert!(sparse.orthogonality + 1e-15 >= dense.orthogonality);
        assert!((sparse.sum - dense.sum).abs() < 1e-15);
        assert!(!sparse.pass && !dense.pass);
    }
}

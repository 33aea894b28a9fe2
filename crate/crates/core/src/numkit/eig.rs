use std::cmp::Ordering;

use num_complex::Complex64;

use super::{dft_unitary, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns ascending real eigenvalues and a unitary whose
/// columns are the matching eigenvectors.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.dim();
    let mut a = h.clone();
    // Symmetrize exactly so rounding in the input cannot stall the sweeps.
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let m = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = m;
            a[(j, i)] = m.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vecs = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    (values, vecs)
}

/// One rotation J annihilating a[p][q]: a <- J* a J and v <- v J.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let n = a.dim();
    let phase = apq / r; // e^{iφ}
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e = phase.conj(); // e^{-iφ}
    // Columns: X = A J.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * e * s;
        a[(k, q)] = akp * s + akq * e * c;
    }
    // Rows: A' = J* X.
    for k in 0..n {
        let xpk = a[(p, k)];
        let xqk = a[(q, k)];
        a[(p, k)] = xpk * c - xqk * phase * s;
        a[(q, k)] = xpk * s + xqk * phase * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * e * s;
        v[(k, q)] = vkp * s + vkq * e * c;
    }
}

/// Unitary diagonalization of a normal matrix.
#[derive(Debug, Clone)]
pub struct NormalDecomposition {
    /// Columns are eigenvectors: `W* N W` is diagonal.
    pub w: ComplexMatrix,
    /// Eigenvalues in lexicographic (real, imaginary) order.
    pub eigenvalues: Vec<Complex64>,
}

/// Diagonalizes a normal matrix: the Hermitian part is diagonalized by
/// Jacobi sweeps, then the skew part is diagonalized inside each cluster of
/// numerically equal Hermitian eigenvalues.
pub fn diagonalize_normal(n_mat: &ComplexMatrix, tol: f64) -> Result<NormalDecomposition> {
    let residual = n_mat.normality_residual();
    if !(residual <= tol) {
        return Err(Error::NotNormal { residual, tol });
    }
    let dim = n_mat.dim();
    let adj = n_mat.adjoint();
    let herm = (n_mat + &adj).scale(Complex64::new(0.5, 0.0));
    let skew = (n_mat - &adj).scale(Complex64::new(0.0, -0.5));
    let (h_vals, mut w) = hermitian_eigen(&herm);
    let cluster_tol = 1e-8 * n_mat.frobenius();

    let mut start = 0;
    let mut clusters = Vec::new();
    while start < dim {
        let mut end = start + 1;
        while end < dim && h_vals[end] - h_vals[end - 1] <= cluster_tol {
            end += 1;
        }
        clusters.push(start..end);
        start = end;
    }

    for range in &clusters {
        let m = range.len();
        if m < 2 {
            continue;
        }
        let block = ComplexMatrix::from_fn(dim, |r, c| if c < m { w[(r, range.start + c)] } else { Complex64::new(0.0, 0.0) });
        // Restrict the skew part to the cluster: B* K B.
        let kb = skew.matmul(&block);
        let restricted = ComplexMatrix::from_fn(m, |i, j| (0..dim).map(|r| block[(r, i)].conj() * kb[(r, j)]).sum());
        let (_, y) = hermitian_eigen(&restricted);
        for r in 0..dim {
            let row: Vec<Complex64> = (0..m).map(|c| (0..m).map(|t| w[(r, range.start + t)] * y[(t, c)]).sum()).collect();
            for (c, z) in row.into_iter().enumerate() {
                w[(r, range.start + c)] = z;
            }
        }
    }

    // Rayleigh quotients give the eigenvalues to full accuracy.
    let nw = n_mat.matmul(&w);
    let mut eig: Vec<Complex64> = (0..dim).map(|c| (0..dim).map(|r| w[(r, c)].conj() * nw[(r, c)]).sum()).collect();

    // Clusters are already ascending in the real part; order by imaginary
    // part inside each cluster.
    let mut order = Vec::with_capacity(dim);
    for range in &clusters {
        let mut idx: Vec<usize> = range.clone().collect();
        idx.sort_by(|&i, &j| eig[i].im.partial_cmp(&eig[j].im).unwrap_or(Ordering::Equal));
        order.extend(idx);
    }
    let w_sorted = ComplexMatrix::from_fn(dim, |r, c| w[(r, order[c])]);
    eig = order.iter().map(|&i| eig[i]).collect();
    Ok(NormalDecomposition {
        w: w_sorted,
        eigenvalues: eig,
    })
}

/// Unitary `U = W V` (eigenbasis followed by the DFT) for which every
/// diagonal entry of `U* B U` equals the normalized trace of `B` for each
/// spectral projection `B` of `N`.
pub fn flatten_constant_diagonal(n_mat: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let dec = diagonalize_normal(n_mat, tol)?;
    Ok(dec.w.matmul(&dft_unitary(n_mat.dim())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        // Gram-Schmidt on a random complex matrix.
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        while cols.len() < n {
            let mut v: Vec<Complex64> = (0..n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            for u in &cols {
                let d: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= d * y;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                cols.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        ComplexMatrix::from_fn(n, |r, col| cols[col][r])
    }

    fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        // Greedy matching is exact enough for well-separated random spectra.
        let mut used = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for x in a {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn hermitian_jacobi_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 12] {
            let x = ComplexMatrix::from_fn(n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let h = (&x + &x.adjoint()).scale(c(0.5, 0.0));
            let (vals, v) = hermitian_eigen(&h);
            let d = h.conjugate_by(&v);
            assert!(d.max_abs_diff(&ComplexMatrix::from_real_diag(&vals)) < 1e-12);
            assert!(v.is_unitary(1e-12));
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn already_diagonal() {
        let n = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]);
        let dec = diagonalize_normal(&n, 1e-12).unwrap();
        let ev = &dec.eigenvalues;
        assert!((ev[0] - c(0.0, 0.0)).norm() < 1e-15);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((ev[2] - c(1.0, 0.0)).norm() < 1e-15);
        // Up to column phase and permutation, W is the identity.
        for z in dec.w.as_slice() {
            assert!(z.norm() < 1e-15 || (z.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_generator_has_eigenvalues_plus_minus_i() {
        let n = ComplexMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let dec = diagonalize_normal(&n, 1e-12).unwrap();
        assert!((dec.eigenvalues[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((dec.eigenvalues[1] - c(0.0, 1.0)).norm() < 1e-12);
        let d = n.conjugate_by(&dec.w);
        assert!(d.max_abs_diff(&ComplexMatrix::from_diag(&dec.eigenvalues)) < 1e-8);
    }

    #[test]
    fn round_trip_random_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 8, 16, 32] {
            let u = random_unitary(n, &mut rng);
            let d: Vec<Complex64> = (0..n).map(|_| c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)).collect();
            let nm = ComplexMatrix::from_diag(&d).conjugate_by(&u.adjoint());
            let dec = diagonalize_normal(&nm, 1e-10).unwrap();
            assert!(multiset_distance(&d, &dec.eigenvalues) < 1e-7);
            assert!(dec.w.is_unitary(1e-10));
            let back = nm.conjugate_by(&dec.w);
            assert!(back.max_abs_diff(&ComplexMatrix::from_diag(&dec.eigenvalues)) <= 1e-8 * nm.frobenius());
        }
    }

    #[test]
    fn repeated_real_parts_split_by_skew_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = vec![c(1.0, 0.0), c(1.0, 2.0), c(1.0, -1.0), c(0.0, 0.0), c(1.0, 2.0)];
        let u = random_unitary(5, &mut rng);
        let nm = ComplexMatrix::from_diag(&d).conjugate_by(&u.adjoint());
        let dec = diagonalize_normal(&nm, 1e-10).unwrap();
        let expected = [c(0.0, 0.0), c(1.0, -1.0), c(1.0, 0.0), c(1.0, 2.0), c(1.0, 2.0)];
        for (a, b) in dec.eigenvalues.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
        let back = nm.conjugate_by(&dec.w);
        assert!(back.max_abs_diff(&ComplexMatrix::from_diag(&dec.eigenvalues)) < 1e-8 * nm.frobenius());
    }

    #[test]
    fn non_normal_rejected() {
        let j = ComplexMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(matches!(diagonalize_normal(&j, 1e-9), Err(Error::NotNormal { .. })));
    }

    #[test]
    fn flatten_examples() {
        let n = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]);
        let u = flatten_constant_diagonal(&n, 1e-12).unwrap();
        for z in n.conjugate_by(&u).diag() {
            assert!((z - c(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-12);
        }
        let id = ComplexMatrix::identity(4);
        let u = flatten_constant_diagonal(&id, 1e-12).unwrap();
        assert!(id.conjugate_by(&u).max_abs_diff(&id) < 1e-12);
    }

    #[test]
    fn flatten_rank_one_against_explicit_dft() {
        let b = ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0]);
        let u = flatten_constant_diagonal(&b, 1e-12).unwrap();
        for z in b.conjugate_by(&u).diag() {
            assert!((z - c(0.25, 0.0)).norm() < 1e-12);
        }
        // Same matrix conjugated by the explicit DFT, entry by entry.
        let v = dft_unitary(4);
        for k in 0..4 {
            let entry = v[(0, k)].norm_sqr();
            assert!((entry - 0.25).abs() < 1e-15);
        }
    }
}

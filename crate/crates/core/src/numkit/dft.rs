use std::f64::consts::PI;

use num_complex::Complex64;

use super::ComplexMatrix;

/// Unitary DFT matrix of size `n`: entry (p, q) is ζ^{pq}/√n with
/// ζ = e^{2πi/n} and p, q counted from 1.
pub fn dft_unitary(n: usize) -> ComplexMatrix {
    assert!(n >= 1, "dft_unitary needs n >= 1");
    let scale = 1.0 / (n as f64).sqrt();
    let roots: Vec<Complex64> = (0..n)
        .map(|e| {
            let (s, c) = (2.0 * PI * e as f64 / n as f64).sin_cos();
            Complex64::new(c * scale, s * scale)
        })
        .collect();
    ComplexMatrix::from_fn(n, |i, j| roots[((i + 1) * (j + 1)) % n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_one_is_one() {
        let v = dft_unitary(1);
        assert_eq!(v.dim(), 1);
        assert!((v[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn size_two_matches_formula() {
        let v = dft_unitary(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[-h, h], [h, h]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((v[(i, j)] - Complex64::new(expected[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn entries_match_direct_exponential() {
        let n = 7;
        let v = dft_unitary(n);
        for p in 1..=n {
            for q in 1..=n {
                let direct = Complex64::from_polar(1.0, 2.0 * PI * (p * q) as f64 / n as f64) / (n as f64).sqrt();
                assert!((v[(p - 1, q - 1)] - direct).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn unitary_up_to_64() {
        for n in 1..=64 {
            let v = dft_unitary(n);
            let gram = v.adjoint().matmul(&v);
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn every_entry_has_modulus_one_over_sqrt_n() {
        let v = dft_unitary(12);
        for z in v.as_slice() {
            assert!((z.norm_sqr() - 1.0 / 12.0).abs() < 1e-15);
        }
    }
}

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{dft_unitary, ComplexMatrix};

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;

/// Restart schedule and seed of a search over the unitary group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { restarts: 200, iters: 2000, seed: 0 }
    }
}

/// Smallest `max_i |diag(U* N U)_i - a_i|` seen over every iterate of every
/// restart. It bounds the true minimum from above; read as a floor it is
/// evidence, not proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub method: String,
    pub config: SearchConfig,
    pub eigenvalues: Vec<Complex64>,
    pub target: Vec<Complex64>,
    pub min_residual: f64,
    pub best_restart: usize,
    pub best_unitary: ComplexMatrix,
    pub best_diagonal: Vec<Complex64>,
    /// Final max-norm residual of each restart.
    pub restart_finals: Vec<f64>,
}

/// Minimizes the max-norm distance between `diag(U* diag(eigenvalues) U)`
/// and `target` over `U(n)`.
///
/// Each restart runs gradient descent on `Σ_i |d_i - a_i|²` with steps
/// `U(I + tX)`, `X` the skew-Hermitian projected gradient, retracted to the
/// group by QR, and step length by Armijo backtracking. Restart 0 starts at
/// the identity, restart 1 at the DFT, later ones at Haar-random unitaries
/// drawn from `ChaCha8Rng` seeded with `seed` on stream `restart`, so the
/// reported minimum only decreases as restarts or iterations grow.
pub fn minimize_diagonal_residual(eigenvalues: &[Complex64], target: &[Complex64], config: SearchConfig) -> Result<SearchReport> {
    let n = eigenvalues.len();
    if n == 0 || target.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: target.len() });
    }
    if config.restarts == 0 {
        return Err(Error::InvalidInput("restarts must be positive".into()));
    }
    let mut best = (f64::INFINITY, 0, ComplexMatrix::identity(n));
    let mut restart_finals = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts {
        let start = match r {
            0 => ComplexMatrix::identity(n),
            1 => dft_unitary(n),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(r as u64);
                haar_unitary(n, &mut rng)
            }
        };
        let (min, arg, last) = descend(eigenvalues, target, start, config.iters);
        restart_finals.push(last);
        if min < best.0 {
            best = (min, r, arg);
        }
    }
    let best_diagonal = diagonal(eigenvalues, &best.2);
    Ok(SearchReport {
        method: "projected gradient descent on U(n), QR retraction, Armijo backtracking".into(),
        config,
        eigenvalues: eigenvalues.to_vec(),
        target: target.to_vec(),
        min_residual: best.0,
        best_restart: best.1,
        best_unitary: best.2,
        best_diagonal,
        restart_finals,
    })
}

/// The 3×3 instance `N = diag(0, 1, i)`, `A = diag(1/2, i/2, (1+i)/2)`: each
/// target entry is a convex combination of two eigenvalues, yet no unitary
/// realizes all three at once.
pub fn arveson_search(restarts: usize, iters: usize, seed: u64) -> Result<SearchReport> {
    minimize_diagonal_residual(&arveson_eigenvalues(), &arveson_target(), SearchConfig { restarts, iters, seed })
}

pub fn arveson_eigenvalues() -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]
}

pub fn arveson_target() -> Vec<Complex64> {
    vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5), Complex64::new(0.5, 0.5)]
}

/// `diag(U* diag(ν) U)_i = Σ_r ν_r |U_ri|²`.
pub(crate) fn diagonal(nu: &[Complex64], u: &ComplexMatrix) -> Vec<Complex64> {
    let n = nu.len();
    (0..n).map(|i| (0..n).map(|r| nu[r] * u[(r, i)].norm_sqr()).sum()).collect()
}

fn objective(nu: &[Complex64], a: &[Complex64], u: &ComplexMatrix) -> (f64, f64) {
    let d = diagonal(nu, u);
    let mut sq = 0.0;
    let mut max = 0.0f64;
    for (x, y) in d.iter().zip(a) {
        let e = (x - y).norm();
        sq += e * e;
        max = max.max(e);
    }
    (sq, max)
}

/// Returns (min max-norm residual over iterates, its unitary, final residual).
fn descend(nu: &[Complex64], a: &[Complex64], mut u: ComplexMatrix, iters: usize) -> (f64, ComplexMatrix, f64) {
    let n = nu.len();
    let (mut f, mut max) = objective(nu, a, &u);
    let mut best = (max, u.clone());
    let mut step = 1.0f64;
    for _ in 0..iters {
        // Euclidean gradient G_ri = 2 Re(ν_r conj(Δ_i)) U_ri (up to a factor 2).
        let d = diagonal(nu, &u);
        let g = ComplexMatrix::from_fn(n, |r, i| u[(r, i)] * (2.0 * (nu[r] * (d[i] - a[i]).conj()).re));
        let y = u.adjoint().matmul(&g);
        // X = -skew(U* G); the directional derivative along U X is -|X|².
        let x = ComplexMatrix::from_fn(n, |r, c| -(y[(r, c)] - y[(c, r)].conj()) * 0.5);
        let slope: f64 = x.as_slice().iter().map(|z| z.norm_sqr()).sum();
        if slope < 1e-30 {
            break;
        }
        let mut t = (step * 2.0).min(1e3);
        let accepted = loop {
            let trial = qr_unitary(&(&u + &u.matmul(&x).scale(Complex64::new(t, 0.0))));
            let (ft, mt) = objective(nu, a, &trial);
            if ft <= f - ARMIJO * t * slope {
                break Some((trial, ft, mt));
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((next, ft, mt)) = accepted else { break };
        u = next;
        f = ft;
        max = mt;
        step = t;
        if max < best.0 {
            best = (max, u.clone());
        }
    }
    (best.0, best.1, max)
}

/// Unitary factor `Q` of `M = QR` with positive diagonal `R`, by modified
/// Gram-Schmidt on the columns.
pub(crate) fn qr_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|c| (0..n).map(|r| m[(r, c)]).collect()).collect();
    for c in 0..n {
        let (done, rest) = cols.split_at_mut(c);
        let v = &mut rest[0];
        for q in done.iter() {
            let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(n, |r, c| cols[c][r])
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with positive
/// diagonal in `R`.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    qr_unitary(&g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_target_has_zero_residual() {
        let r = minimize_diagonal_residual(&arveson_eigenvalues(), &arveson_eigenvalues(), SearchConfig {
            restarts: 3,
            iters: 10,
            seed: 0,
        })
        .unwrap();
        assert_eq!(r.min_residual, 0.0);
        assert_eq!(r.best_restart, 0);
    }

    #[test]
    fn constant_target_is_reached() {
        let t = Complex64::new(1.0 / 3.0, 1.0 / 3.0);
        let r = minimize_diagonal_residual(&arveson_eigenvalues(), &[t; 3], SearchConfig { restarts: 2, iters: 5, seed: 0 })
            .unwrap();
        assert!(r.min_residual < 1e-15, "{}", r.min_residual);
    }

    #[test]
    fn haar_and_qr_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..6 {
            assert!(haar_unitary(n, &mut rng).unitarity_residual() < 1e-13);
        }
    }

    #[test]
    fn search_is_deterministic_and_monotone() {
        let a = arveson_search(6, 100, 3).unwrap();
        let b = arveson_search(6, 100, 3).unwrap();
        assert_eq!(a, b);
        let more_restarts = arveson_search(9, 100, 3).unwrap();
        let more_iters = arveson_search(6, 300, 3).unwrap();
        assert!(more_restarts.min_residual <= a.min_residual);
        assert!(more_iters.min_residual <= a.min_residual);
    }

    #[test]
    fn arveson_floor_is_positive() {
        let r = arveson_search(20, 500, 0).unwrap();
        assert!(r.min_residual > 0.05, "{}", r.min_residual);
        assert!(r.best_unitary.unitarity_residual() < 1e-12);
        let d = diagonal(&r.eigenvalues, &r.best_unitary);
        let dense = ComplexMatrix::from_diag(&r.eigenvalues).conjugate_by(&r.best_unitary).diag();
        for (x, y) in d.iter().zip(&dense) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}

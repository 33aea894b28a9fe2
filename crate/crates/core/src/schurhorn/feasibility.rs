use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::simplex::{is_farkas_certificate, solve_feasibility, LpOutcome, LpScalar};
use super::spectral::{TargetBlock, TracialSpectrum};
use crate::error::{Error, Result};
use crate::numkit::{barycentric_exact, ExactComplex, Rational};

/// Resolution at which floating inputs are rationalized.
pub const RATIONALIZE_TOL: f64 = 1e-12;

/// Exact linear system `A γ = b, γ ≥ 0` in the variables `γ[j][k]`
/// (flattened as `j * n + k`): row sums 1, trace marginals
/// `Σ_j w_j γ[j][k] = ω_k`, and the real and imaginary parts of
/// `Σ_k z_k γ[j][k] = β_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilitySystem {
    pub values: Vec<ExactComplex>,
    pub weights: Vec<Rational>,
    pub targets: Vec<ExactComplex>,
    pub block_weights: Vec<Rational>,
    pub labels: Vec<String>,
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<BigRational>,
}

impl FeasibilitySystem {
    pub fn new(
        values: Vec<ExactComplex>,
        weights: Vec<Rational>,
        targets: Vec<ExactComplex>,
        block_weights: Vec<Rational>,
    ) -> Result<Self> {
        let n = values.len();
        let m = targets.len();
        if n == 0 || m == 0 || weights.len() != n || block_weights.len() != m {
            return Err(Error::InvalidInput("spectrum and target blocks must be nonempty with matching weights".into()));
        }
        if block_weights.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::InvalidInput("block weights must sum to 1".into()));
        }
        if block_weights.iter().chain(&weights).any(|w| w.is_negative()) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        let zero = || vec![BigRational::zero(); m * n];
        let mut labels = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for j in 0..m {
            let mut row = zero();
            for k in 0..n {
                row[j * n + k] = BigRational::from_integer(1.into());
            }
            labels.push(format!("row_sum[{j}]"));
            a.push(row);
            b.push(BigRational::from_integer(1.into()));
        }
        for k in 0..n {
            let mut row = zero();
            for j in 0..m {
                row[j * n + k] = block_weights[j].0.clone();
            }
            labels.push(format!("trace[{k}]"));
            a.push(row);
            b.push(weights[k].0.clone());
        }
        for j in 0..m {
            let mut re = zero();
            let mut im = zero();
            for k in 0..n {
                re[j * n + k] = values[k].re().0.clone();
                im[j * n + k] = values[k].im().0.clone();
            }
            labels.push(format!("value_re[{j}]"));
            a.push(re);
            b.push(targets[j].re().0.clone());
            labels.push(format!("value_im[{j}]"));
            a.push(im);
            b.push(targets[j].im().0.clone());
        }
        Ok(FeasibilitySystem { values, weights, targets, block_weights, labels, a, b })
    }

    /// Rationalizes a tracial spectrum and target blocks at
    /// [`RATIONALIZE_TOL`].
    pub fn from_floats(spectrum: &TracialSpectrum, blocks: &[TargetBlock]) -> Result<Self> {
        spectrum.validate()?;
        let values = spectrum.values.iter().map(|&z| ExactComplex::approximate(z, RATIONALIZE_TOL)).collect::<Result<_>>()?;
        let targets = blocks.iter().map(|b| ExactComplex::approximate(b.value, RATIONALIZE_TOL)).collect::<Result<_>>()?;
        Self::new(values, spectrum.weights.clone(), targets, blocks.iter().map(|b| b.weight.clone()).collect())
    }

    pub fn blocks(&self) -> usize {
        self.targets.len()
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    /// Runs the simplex over any exact scalar; `convert` maps the stored
    /// big rationals into it.
    pub fn solve_with<T: LpScalar>(&self, convert: impl Fn(&BigRational) -> T) -> LpOutcome<T> {
        let a: Vec<Vec<T>> = self.a.iter().map(|r| r.iter().map(&convert).collect()).collect();
        let b: Vec<T> = self.b.iter().map(&convert).collect();
        solve_feasibility(&a, &b)
    }

    /// Feasibility decided with 128-bit rationals, for small grids. Returns
    /// `None` when an entry does not fit.
    pub fn is_feasible_small(&self) -> Option<bool> {
        let fits = self.a.iter().flatten().chain(&self.b).all(|x| x.numer().to_i64().is_some() && x.denom().to_i64().is_some());
        if !fits {
            return None;
        }
        let out = self.solve_with(|x| Ratio::<i128>::new(x.numer().to_i128().unwrap(), x.denom().to_i128().unwrap()));
        Some(matches!(out, LpOutcome::Feasible(_)))
    }

    /// Whether `γ` satisfies every row exactly and is nonnegative.
    pub fn check_witness(&self, gamma: &[Vec<Rational>]) -> bool {
        let n = self.points();
        let flat: Vec<&BigRational> = gamma.iter().flatten().map(|q| &q.0).collect();
        if gamma.len() != self.blocks() || gamma.iter().any(|r| r.len() != n) {
            return false;
        }
        flat.iter().all(|x| !x.is_negative())
            && self.a.iter().zip(&self.b).all(|(row, bi)| {
                row.iter().zip(&flat).fold(BigRational::zero(), |acc, (p, x)| acc + p * *x) == *bi
            })
    }
}

/// Coefficients `γ[j][k] ≥ 0` with `Σ_k γ[j][k] = 1`,
/// `Σ_j w_j γ[j][k] = ω_k` and `Σ_k z_k γ[j][k] = β_j`, all exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityWitness {
    pub gamma: Vec<Vec<Rational>>,
    /// Rationalized spectral values and targets the witness is exact for.
    pub values: Vec<ExactComplex>,
    pub targets: Vec<ExactComplex>,
}

/// Dual vector `y` proving `A γ = b, γ ≥ 0` has no solution:
/// `Aᵀy ≤ 0` entrywise and `bᵀy > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    /// Constraint names, aligned with `dual`.
    pub rows: Vec<String>,
    pub dual: Vec<Rational>,
    /// `bᵀy`.
    pub pairing: Rational,
    /// Largest entry of `Aᵀy` (nonpositive for a valid certificate).
    pub max_column_pairing: Rational,
}

impl FarkasCertificate {
    /// Re-checks the certificate against a system in exact arithmetic.
    pub fn verify(&self, system: &FeasibilitySystem) -> bool {
        let y: Vec<BigRational> = self.dual.iter().map(|q| q.0.clone()).collect();
        y.len() == system.b.len() && is_farkas_certificate(&system.a, &system.b, &y)
    }
}

fn certificate(system: &FeasibilitySystem, y: Vec<BigRational>) -> FarkasCertificate {
    let pairing: BigRational = system.b.iter().zip(&y).map(|(b, v)| b * v).sum();
    let cols = system.a.first().map_or(0, Vec::len);
    let max_col = (0..cols)
        .map(|j| system.a.iter().zip(&y).map(|(row, v)| &row[j] * v).sum::<BigRational>())
        .max()
        .unwrap_or_else(BigRational::zero);
    FarkasCertificate {
        rows: system.labels.clone(),
        dual: y.into_iter().map(Rational).collect(),
        pairing: Rational(pairing),
        max_column_pairing: Rational(max_col),
    }
}

/// Solves an exact system, returning the witness or an `Infeasible` error
/// carrying a verified Farkas certificate.
pub fn solve_system(system: &FeasibilitySystem) -> Result<FeasibilityWitness> {
    let n = system.points();
    match system.solve_with(|x| x.clone()) {
        LpOutcome::Feasible(x) => {
            let gamma: Vec<Vec<Rational>> = x.chunks(n).map(|r| r.iter().cloned().map(Rational).collect()).collect();
            debug_assert!(system.check_witness(&gamma));
            Ok(FeasibilityWitness { gamma, values: system.values.clone(), targets: system.targets.clone() })
        }
        LpOutcome::Infeasible(y) => {
            let cert = certificate(system, y);
            debug_assert!(cert.verify(system));
            Err(Error::Infeasible(Box::new(cert)))
        }
    }
}

/// Decides whether a step diagonal with blocks `(β_j, w_j)` is compatible
/// with a tracial spectrum: a basic feasible `γ` exists iff there are
/// projections `P_k` with `τ(P_k) = ω_k` whose compressions realize the
/// blocks.
pub fn feasibility_partition(spectrum: &TracialSpectrum, blocks: &[TargetBlock]) -> Result<FeasibilityWitness> {
    solve_system(&FeasibilitySystem::from_floats(spectrum, blocks)?)
}

/// For three non-collinear values: feasible iff the target trace matches
/// and every block value lies in the triangle; the witness is then the
/// barycentric coordinates of each block value. `Ok(None)` means
/// infeasible, `Err(DegenerateHull)` means collinear values.
pub fn three_point_witness(system: &FeasibilitySystem) -> Result<Option<Vec<Vec<Rational>>>> {
    if system.points() != 3 {
        return Err(Error::InvalidInput("three-point shortcut needs exactly three values".into()));
    }
    let v = &system.values;
    let tri = [&v[0], &v[1], &v[2]];
    let mut trace_target = ExactComplex::real(Rational::zero());
    let mut trace_spec = ExactComplex::real(Rational::zero());
    for (b, w) in system.targets.iter().zip(&system.block_weights) {
        trace_target = trace_target.add(&b.scale(w));
    }
    for (z, w) in v.iter().zip(&system.weights) {
        trace_spec = trace_spec.add(&z.scale(w));
    }
    let mut gamma = Vec::with_capacity(system.blocks());
    for b in &system.targets {
        let g = barycentric_exact(b, tri)?;
        if g.iter().any(|x| x.is_negative()) {
            return Ok(None);
        }
        gamma.push(g.to_vec());
    }
    if trace_target != trace_spec {
        return Ok(None);
    }
    Ok(Some(gamma))
}

/// Big-integer helper shared with callers that build grids.
pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn ex(re: (i64, i64), im: (i64, i64)) -> ExactComplex {
        ExactComplex(rational(re.0, re.1), rational(im.0, im.1))
    }

    fn square() -> Vec<ExactComplex> {
        vec![ex((0, 1), (0, 1)), ex((1, 1), (0, 1)), ex((0, 1), (1, 1)), ex((1, 1), (1, 1))]
    }

    #[test]
    fn constant_target_is_feasible_with_weights() {
        let z = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let w = vec![rational(1, 2), rational(1, 3), rational(1, 6)];
        let s = TracialSpectrum::new(z, w.clone()).unwrap();
        let blocks = vec![TargetBlock::new(s.trace(), rational(1, 1))];
        let wit = feasibility_partition(&s, &blocks).unwrap();
        assert_eq!(wit.gamma, vec![w]);
    }

    #[test]
    fn square_with_extreme_targets_is_infeasible() {
        let q = rational(1, 4);
        let sys = FeasibilitySystem::new(
            square(),
            vec![q.clone(), q.clone(), q.clone(), q],
            vec![ex((0, 1), (0, 1)), ex((1, 1), (1, 1))],
            vec![rational(1, 2), rational(1, 2)],
        )
        .unwrap();
        match solve_system(&sys) {
            Err(Error::Infeasible(cert)) => {
                assert!(cert.verify(&sys));
                assert!(cert.pairing.is_positive());
                assert!(!cert.max_column_pairing.is_positive());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interior_targets_on_square_are_feasible() {
        let q = rational(1, 4);
        let sys = FeasibilitySystem::new(
            square(),
            vec![q.clone(), q.clone(), q.clone(), q],
            vec![ex((1, 4), (1, 4)), ex((3, 4), (3, 4))],
            vec![rational(1, 2), rational(1, 2)],
        )
        .unwrap();
        let wit = solve_system(&sys).unwrap();
        assert!(sys.check_witness(&wit.gamma));
        assert_eq!(sys.is_feasible_small(), Some(true));
    }

    #[test]
    fn three_point_shortcut_matches_lp() {
        let tri = vec![ex((0, 1), (0, 1)), ex((1, 1), (0, 1)), ex((0, 1), (1, 1))];
        let third = rational(1, 3);
        let weights = vec![third.clone(), third.clone(), third];
        // Two blocks averaging to (1+i)/3.
        let sys = FeasibilitySystem::new(
            tri.clone(),
            weights.clone(),
            vec![ex((1, 2), (1, 6)), ex((1, 6), (1, 2))],
            vec![rational(1, 2), rational(1, 2)],
        )
        .unwrap();
        let short = three_point_witness(&sys).unwrap().unwrap();
        assert!(sys.check_witness(&short));
        assert_eq!(solve_system(&sys).unwrap().gamma, short);

        // Trace mismatch.
        let sys = FeasibilitySystem::new(tri, weights, vec![ex((1, 2), (0, 1)), ex((0, 1), (1, 2))], vec![rational(1, 2), rational(1, 2)]).unwrap();
        assert_eq!(three_point_witness(&sys).unwrap(), None);
        assert!(matches!(solve_system(&sys), Err(Error::Infeasible(_))));
    }

    #[test]
    fn weight_mismatch_is_invalid() {
        let s = TracialSpectrum::new(vec![Complex64::new(0.0, 0.0)], vec![rational(1, 1)]).unwrap();
        let blocks = vec![TargetBlock::new(Complex64::new(0.0, 0.0), rational(1, 2))];
        assert!(matches!(feasibility_partition(&s, &blocks), Err(Error::InvalidInput(_))));
    }
}

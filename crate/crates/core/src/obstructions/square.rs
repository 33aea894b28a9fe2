use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{convex_hull_exact, ExactComplex, Rational};
use crate::schurhorn::{rational, solve_system, FarkasCertificate, FeasibilitySystem, FeasibilityWitness};

/// A block whose target is an extreme point `z_k` of the spectrum forces
/// `γ[j] = e_k`, so its whole weight must come from `P_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremePointBound {
    pub point: ExactComplex,
    /// `Σ w_j` over blocks with target `z_k`: a lower bound on `τ(P_k)`.
    pub forced_trace: Rational,
    /// `ω_k = τ(P_k)`.
    pub available_trace: Rational,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareCertificate {
    pub certificate: FarkasCertificate,
    /// Re-checked in exact arithmetic against the system.
    pub certificate_valid: bool,
    pub extreme_points: Vec<ExtremePointBound>,
}

/// Four equally weighted corners of the unit square.
pub fn square_system(targets: Vec<ExactComplex>, block_weights: Vec<Rational>) -> Result<FeasibilitySystem> {
    let corner = |re, im| ExactComplex::new(rational(re, 1), rational(im, 1));
    let values = vec![corner(0, 0), corner(1, 0), corner(0, 1), corner(1, 1)];
    FeasibilitySystem::new(values, vec![rational(1, 4); 4], targets, block_weights)
}

/// The step diagonal `(1/2)(δ_0 + δ_{1+i})` against the spectral
/// distribution `(1/4)(δ_0 + δ_1 + δ_i + δ_{1+i})`: traces match, both values
/// lie in the square, and still no projections exist. Returns the exact
/// Farkas certificate together with the direct extreme-point bound
/// `τ(P_0) ≥ 1/2 > 1/4`.
pub fn square_infeasibility_certificate() -> Result<SquareCertificate> {
    let targets = vec![ExactComplex::new(rational(0, 1), rational(0, 1)), ExactComplex::new(rational(1, 1), rational(1, 1))];
    let system = square_system(targets, vec![rational(1, 2); 2])?;
    let certificate = match solve_system(&system) {
        Err(Error::Infeasible(cert)) => *cert,
        Err(e) => return Err(e),
        Ok(_) => return Err(Error::InvalidInput("square instance unexpectedly feasible".into())),
    };
    let certificate_valid = certificate.verify(&system) && certificate.pairing.is_positive();
    Ok(SquareCertificate { certificate, certificate_valid, extreme_points: extreme_point_bounds(&system) })
}

/// Perturbed instance with blocks at `c` and `1 + i - c`, `c = (1+i)/4`,
/// both interior; returns the LP witness.
pub fn square_interior_witness() -> Result<FeasibilityWitness> {
    let c = ExactComplex::new(rational(1, 4), rational(1, 4));
    let d = ExactComplex::new(rational(3, 4), rational(3, 4));
    solve_system(&square_system(vec![c, d], vec![rational(1, 2); 2])?)
}

/// Extreme-point bounds of every hull vertex of the system's values.
pub fn extreme_point_bounds(system: &FeasibilitySystem) -> Vec<ExtremePointBound> {
    let hull = convex_hull_exact(&system.values);
    let mut out = Vec::new();
    for (k, z) in system.values.iter().enumerate() {
        if !hull.contains(z) {
            continue;
        }
        let forced_trace: Rational = system
            .targets
            .iter()
            .zip(&system.block_weights)
            .filter(|(b, _)| *b == z)
            .map(|(_, w)| w.clone())
            .sum();
        let available_trace = system.weights[k].clone();
        let violated = forced_trace > available_trace;
        out.push(ExtremePointBound { point: z.clone(), forced_trace, available_trace, violated });
    }
    out
}

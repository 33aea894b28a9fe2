use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::search::{arveson_eigenvalues, arveson_search, arveson_target, SearchConfig};
use crate::carpenter::{carpenter_discrete, DiagonalSpec, JointPartitionSpec};
use crate::error::{Error, Result};
use crate::schurhorn::{synth_diagonal_discrete, DiscreteSpectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastSide {
    pub dim: usize,
    pub residual: f64,
    pub method: String,
}

/// Side-by-side comparison: the exact 3×3 problem against the
/// tail-extended problems that truncated constructions solve to `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub eps: f64,
    /// Empirical minimum of the 3×3 search (evidence, not proof).
    pub floor: f64,
    pub search: SearchConfig,
    pub partition: ContrastSide,
    pub synthesis: ContrastSide,
    pub synthesis_necessity_holds: bool,
    pub synthesis_spectrum_matches: bool,
    /// Both truncated residuals are below `eps`.
    pub within_eps: bool,
    /// The 3×3 floor exceeds both truncated residuals.
    pub floor_exceeds_residuals: bool,
}

/// Head `(1/2, i/2, (1+i)/2)` followed by the eigenvalues `(0, i, 1)`
/// repeated, over the essential spectrum `{0, 1, i}`.
pub fn contrast_target() -> Result<(DiscreteSpectrum, DiagonalSpec)> {
    let nu = arveson_eigenvalues();
    let tail = vec![nu[0], nu[2], nu[1]];
    Ok((DiscreteSpectrum::new(vec![], nu)?, DiagonalSpec::new(arveson_target(), tail)?))
}

/// Projection partition realizing the contrast target: the coefficients of
/// the head entries over `{0, 1, i}` are `(1/2, 1/2, 0)`, `(1/2, 0, 1/2)`,
/// `(0, 1/2, 1/2)`, each tail entry is a vertex.
pub fn contrast_partition() -> Result<JointPartitionSpec> {
    JointPartitionSpec::new(vec![
        DiagonalSpec::real(&[0.5, 0.5, 0.0], &[1.0, 0.0, 0.0])?,
        DiagonalSpec::real(&[0.5, 0.0, 0.5], &[0.0, 0.0, 1.0])?,
        DiagonalSpec::real(&[0.0, 0.5, 0.5], &[0.0, 1.0, 0.0])?,
    ])
}

/// Runs the 3×3 search and both truncated constructions on the contrast
/// target at tolerance `eps`.
pub fn contrast_demo(eps: f64, search: SearchConfig) -> Result<ContrastReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let floor = arveson_search(search.restarts, search.iters, search.seed)?.min_residual;
    let (spectrum, target) = contrast_target()?;

    let built = carpenter_discrete(&contrast_partition()?, eps / spread())?;
    let realized = built.family.weighted_diag(&arveson_eigenvalues());
    let partition_residual =
        realized.iter().enumerate().map(|(i, v)| (v - target.value_at(i)).norm()).fold(0.0, f64::max);
    let partition = ContrastSide { dim: built.dim, residual: partition_residual, method: built.report.method };

    let synth = synth_diagonal_discrete(&spectrum, &target, eps)?;
    let synthesis = ContrastSide { dim: synth.dim, residual: synth.diag_residual, method: synth.method };
    let within_eps = partition.residual < eps && synthesis.residual < eps;
    let floor_exceeds_residuals = floor > partition.residual && floor > synthesis.residual;
    Ok(ContrastReport {
        eps,
        floor,
        search,
        partition,
        synthesis,
        synthesis_necessity_holds: synth.necessity.holds,
        synthesis_spectrum_matches: synth.spectrum_matches,
        within_eps,
        floor_exceeds_residuals,
    })
}

/// `Σ_k |z_k - c|` for `{0, 1, i}` about its centroid: turns a partition
/// tolerance into a diagonal tolerance.
fn spread() -> f64 {
    let nu = arveson_eigenvalues();
    let c: Complex64 = nu.iter().sum::<Complex64>() / 3.0;
    nu.iter().map(|z| (z - c).norm()).sum()
}

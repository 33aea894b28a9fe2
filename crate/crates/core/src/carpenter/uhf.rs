use serde::{Deserialize, Serialize};

use super::block::{flat_block, validate_partition};
use super::family::ProjectionFamily;
use super::rounding::round_fractions;
use super::tracial::DEFAULT_MAX_DIM;
use crate::error::{Error, Result};
use crate::numkit::{FamilyReport, Rational, PROJECTION_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UhfReport {
    /// Tower level of the input columns (`2^m` atoms).
    pub base_level: usize,
    pub level: usize,
    /// Copies of each atom at the returned level, `2^(level - base_level)`.
    pub block_size: usize,
    /// Zero columns removed; the family lists only the remaining columns,
    /// in their original order.
    pub dropped_columns: Vec<usize>,
    pub kept_columns: Vec<usize>,
    /// Dyadic trace of each returned projection.
    pub traces: Vec<Rational>,
    pub diag_residual: f64,
    pub verification: FamilyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UhfConstruction {
    pub level: usize,
    pub dim: usize,
    pub family: ProjectionFamily,
    pub report: UhfReport,
}

/// [`carpenter_uhf_capped`] with the default dimension cap.
pub fn carpenter_uhf(columns: &[Vec<f64>], eps: f64) -> Result<UhfConstruction> {
    carpenter_uhf_capped(columns, eps, DEFAULT_MAX_DIM)
}

/// Nonzero projections in `M_{2^j}` whose diagonals approximate the columns
/// (given on the diagonal of `M_{2^m}`) within `eps`, each entry replicated
/// `2^(j-m)` times along the tower.
///
/// Each atom becomes a `2^(j-m)`-block holding a rounded count per
/// projection, flattened by the DFT. The smallest level that meets `eps`
/// and leaves every projection nonzero is returned; traces are dyadic.
pub fn carpenter_uhf_capped(columns: &[Vec<f64>], eps: f64, cap: usize) -> Result<UhfConstruction> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let n = columns.len();
    let atoms = columns.first().map_or(0, Vec::len);
    if n == 0 || atoms == 0 || !atoms.is_power_of_two() {
        return Err(Error::InvalidInput(format!("columns must be nonempty with power-of-two length, got {atoms}")));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != atoms) {
        return Err(Error::DimensionMismatch { expected: atoms, found: c.len() });
    }
    let rows: Vec<Vec<f64>> = (0..atoms)
        .map(|i| validate_partition(&columns.iter().map(|c| c[i]).collect::<Vec<_>>(), &format!("atom {i}")))
        .collect::<Result<_>>()?;
    let base_level = atoms.trailing_zeros() as usize;
    let kept: Vec<usize> = (0..n).filter(|&k| rows.iter().any(|r| r[k] != 0.0)).collect();
    let dropped: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| kept.iter().map(|&k| r[k]).collect()).collect();

    let mut level = base_level;
    let (block_size, counts) = loop {
        let dim = 1usize.checked_shl(level as u32).filter(|&d| d <= cap && level < usize::BITS as usize - 1);
        let Some(dim) = dim else {
            return Err(Error::ModelTooCoarse(format!("no tower level with 2^j ≤ {cap} meets eps = {eps}")));
        };
        let b = dim / atoms;
        let attempt: Option<Vec<Vec<usize>>> = rows
            .iter()
            .map(|r| round_fractions(r, b, false).filter(|(_, err)| *err < eps).map(|(c, _)| c))
            .collect();
        if let Some(c) = attempt {
            if (0..kept.len()).all(|k| c.iter().any(|row| row[k] > 0)) {
                break (b, c);
            }
        }
        level += 1;
    };

    let dim = atoms * block_size;
    let blocks = (0..atoms).map(|i| flat_block((i * block_size..(i + 1) * block_size).collect(), &counts[i])).collect();
    let family = ProjectionFamily::new(dim, kept.len(), blocks)?;
    let diag = family.diagonals();
    let mut diag_residual: f64 = 0.0;
    for (j, &k) in kept.iter().enumerate() {
        for (x, v) in diag[j].iter().enumerate() {
            diag_residual = diag_residual.max((v - columns[k][x / block_size]).abs());
        }
    }
    let traces = family.ranks().into_iter().map(|r| Rational::new(r as i64, dim as i64)).collect();
    let verification = family.verify(PROJECTION_TOL);
    Ok(UhfConstruction {
        level,
        dim,
        family,
        report: UhfReport {
            base_level,
            level,
            block_size,
            dropped_columns: dropped,
            kept_columns: kept,
            traces,
            diag_residual,
            verification,
        },
    })
}

use serde::{Deserialize, Serialize};

use super::family::{FamilyBlock, ProjectionFamily};
use super::rounding::{colors_from_counts, round_fractions, round_with_sum};
use crate::error::{Error, Result};
use crate::numkit::{dft_unitary, ComplexMatrix, FamilyReport, PROJECTION_TOL};

const SUM_TOL: f64 = 1e-12;
const FLOAT_MARGIN: f64 = 1e-10;

/// Parameters of one block `diag(α, β, β, …, β)` of size
/// `1 + (n1 - 1) * len`: `head_counts[k] / n1` approximates `α_k`, and each
/// of the `n1 - 1` sub-blocks of size `len` holds one head index plus
/// `fresh_counts` fresh coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub n1: usize,
    pub head_counts: Vec<usize>,
    pub len: usize,
    pub fresh_counts: Vec<usize>,
}

impl BlockPlan {
    pub fn dim(&self) -> usize {
        1 + (self.n1 - 1) * self.len
    }

    /// Diagonal value of `P_k` at the first coordinate.
    pub fn head_value(&self, k: usize) -> f64 {
        self.head_counts[k] as f64 / self.n1 as f64
    }

    /// Diagonal value of `P_k` at every other coordinate.
    pub fn tail_value(&self, k: usize) -> f64 {
        (self.head_value(k) + self.fresh_counts[k] as f64) / self.len as f64
    }

    pub fn max_error(&self, alpha: &[f64], beta: &[f64]) -> f64 {
        let mut err: f64 = 0.0;
        for k in 0..alpha.len() {
            err = err.max((self.head_value(k) - alpha[k]).abs());
            if self.dim() > 1 {
                err = err.max((self.tail_value(k) - beta[k]).abs());
            }
        }
        err
    }

    /// Unitary and row colors realizing the plan.
    ///
    /// Coordinates: 0 is head index 0; sub-block `j = 1..n1` occupies
    /// `1 + (j-1)*len ..` with head index `j` first. The unitary is
    /// `W1 W2`, where `W1` applies the `n1`-point DFT to the head indices and
    /// `W2` applies the `len`-point DFT to each sub-block.
    pub fn realize(&self) -> (ComplexMatrix, Vec<usize>) {
        let (n1, len) = (self.n1, self.len);
        let dim = self.dim();
        let f1 = dft_unitary(n1);
        let f2 = dft_unitary(len);
        let head_pos = |h: usize| if h == 0 { 0 } else { 1 + (h - 1) * len };
        let mut u = ComplexMatrix::zeros(dim);
        let mut colors = vec![0; dim];
        let head_colors = colors_from_counts(&self.head_counts);
        let fresh_colors = colors_from_counts(&self.fresh_counts);
        for h in 0..n1 {
            let row = head_pos(h);
            colors[row] = head_colors[h];
            u[(row, 0)] = f1[(h, 0)];
            for j in 1..n1 {
                let w = f1[(h, j)];
                let start = head_pos(j);
                for t in 0..len {
                    u[(row, start + t)] = w * f2[(0, t)];
                }
            }
        }
        for j in 1..n1 {
            let start = head_pos(j);
            for t in 1..len {
                colors[start + t] = fresh_colors[t - 1];
                for s in 0..len {
                    u[(start + t, start + s)] = f2[(t, s)];
                }
            }
        }
        (u, colors)
    }
}

/// Smallest block (by dimension) meeting `tol` strictly for both the head
/// value `α` and the repeated value `β`.
pub(crate) fn plan_block(alpha: &[f64], beta: &[f64], tol: f64) -> Option<BlockPlan> {
    let n = alpha.len();
    let cap = (4.0 / tol).ceil() as usize + 4;
    let mut best: Option<BlockPlan> = None;
    for n1 in 1..=cap {
        if let Some(b) = &best {
            if n1 >= b.dim() {
                break;
            }
        }
        let Some((head_counts, head_err)) = round_fractions(alpha, n1, false) else { continue };
        if head_err >= tol {
            continue;
        }
        if n1 == 1 {
            best = Some(BlockPlan {
                n1,
                head_counts,
                len: 1,
                fresh_counts: vec![0; n],
            });
            break;
        }
        let head: Vec<f64> = head_counts.iter().map(|&a| a as f64 / n1 as f64).collect();
        for len in 1..=cap {
            let dim = 1 + (n1 - 1) * len;
            if best.as_ref().is_some_and(|b| dim >= b.dim()) {
                break;
            }
            let t: Vec<f64> = (0..n).map(|k| len as f64 * beta[k] - head[k]).collect();
            let total = len as i64 - 1;
            let Some(c) = round_with_sum(&t, total, &vec![0; n], &vec![total; n]) else { continue };
            let plan = BlockPlan {
                n1,
                head_counts: head_counts.clone(),
                len,
                fresh_counts: c.into_iter().map(|x| x as usize).collect(),
            };
            if plan.max_error(alpha, beta) < tol {
                best = Some(plan);
                break;
            }
        }
    }
    best
}

/// Perturbation applied to the last coordinate of `β` when it sits outside
/// `[eps/5, 1 - eps/5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampRecord {
    pub coordinate: usize,
    pub donor: usize,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub dim: usize,
    pub plan: Option<BlockPlan>,
    pub dropped_columns: Vec<usize>,
    pub clamp: Option<ClampRecord>,
    /// Tolerance handed to the rounding search after the clamp.
    pub rounding_tol: f64,
    /// Largest |diag(P_k)[i] - target| over all k, i.
    pub diag_residual: f64,
    pub verification: FamilyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConstruction {
    pub dim: usize,
    pub family: ProjectionFamily,
    pub report: BlockReport,
}

pub(crate) fn validate_partition(v: &[f64], name: &str) -> Result<Vec<f64>> {
    if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < -SUM_TOL || **x > 1.0 + SUM_TOL) {
        return Err(Error::InfeasibleInput(format!("{name} entry {x} outside [0, 1]")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::InfeasibleInput(format!("{name} sums to {sum}, not 1")));
    }
    Ok(v.iter().map(|x| x.clamp(0.0, 1.0)).collect())
}

/// Moves the last coordinate of `beta` into `[margin, 1 - margin]`, taking
/// from (or giving to) the largest other coordinate.
pub(crate) fn clamp_last(beta: &mut [f64], margin: f64) -> Option<ClampRecord> {
    let n = beta.len();
    if n < 2 {
        return None;
    }
    let last = n - 1;
    let donor = (0..last).max_by(|&i, &j| beta[i].total_cmp(&beta[j]).then(j.cmp(&i)))?;
    if beta[last] < margin {
        let shift = (margin - beta[last]).min(beta[donor]);
        beta[last] += shift;
        beta[donor] -= shift;
        Some(ClampRecord { coordinate: last, donor, shift })
    } else if beta[last] > 1.0 - margin {
        let shift = (beta[last] - (1.0 - margin)).min(beta[last]);
        beta[last] -= shift;
        beta[donor] += shift;
        Some(ClampRecord { coordinate: last, donor, shift })
    } else {
        None
    }
}

/// Projections `P_1..P_n` on `C^ℓ` with `diag(P_k) ≈ (α_k, β_k, …, β_k)`
/// within `eps`.
pub fn carpenter_block(alpha: &[f64], beta: &[f64], eps: f64) -> Result<BlockConstruction> {
    if alpha.len() != beta.len() || alpha.is_empty() {
        return Err(Error::InvalidInput("alpha and beta must be nonempty and of equal length".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let alpha = validate_partition(alpha, "alpha")?;
    let beta = validate_partition(beta, "beta")?;
    let n = alpha.len();
    let kept: Vec<usize> = (0..n).filter(|&k| alpha[k] != 0.0 || beta[k] != 0.0).collect();
    let dropped: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
    let a: Vec<f64> = kept.iter().map(|&k| alpha[k]).collect();
    let mut b: Vec<f64> = kept.iter().map(|&k| beta[k]).collect();

    let clamp = if b.len() >= 2 && (b[b.len() - 1] == 0.0 || b[b.len() - 1] == 1.0) {
        clamp_last(&mut b, eps / 5.0)
    } else {
        None
    };
    let shift = clamp.as_ref().map_or(0.0, |c| c.shift);
    // Margin keeps the realized residual strictly below eps in floating point.
    let rounding_tol = eps - shift - FLOAT_MARGIN;

    let (family, plan) = if kept.len() == 1 {
        (ProjectionFamily::identity(1), None)
    } else {
        let plan = plan_block(&a, &b, rounding_tol).ok_or_else(|| {
            Error::ToleranceUnreachable(format!("no block meets tolerance {rounding_tol}"))
        })?;
        let (u, colors) = plan.realize();
        let dim = plan.dim();
        let fam = ProjectionFamily::new(dim, kept.len(), vec![FamilyBlock::new((0..dim).collect(), u, colors)])?;
        (fam, Some(plan))
    };
    let family = family.expand_colors(&kept, n);
    let dim = family.dim;
    let diag = family.diagonals();
    let mut diag_residual: f64 = 0.0;
    for k in 0..n {
        for (i, v) in diag[k].iter().enumerate() {
            let target = if i == 0 { alpha[k] } else { beta[k] };
            diag_residual = diag_residual.max((v - target).abs());
        }
    }
    let verification = family.verify(PROJECTION_TOL);
    Ok(BlockConstruction {
        dim,
        family,
        report: BlockReport {
            dim,
            plan,
            dropped_columns: dropped,
            clamp,
            rounding_tol,
            diag_residual,
            verification,
        },
    })
}

/// Family on `C^size` whose projections all have constant diagonal
/// `counts[k] / size`, obtained by flattening a diagonal coloring with the
/// DFT.
pub(crate) fn flat_block(indices: Vec<usize>, counts: &[usize]) -> FamilyBlock {
    let size = indices.len();
    FamilyBlock::new(indices, dft_unitary(size), colors_from_counts(counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_is_identity() {
        let out = carpenter_block(&[1.0], &[1.0], 0.1).unwrap();
        assert_eq!(out.dim, 1);
        assert_eq!(out.report.diag_residual, 0.0);
        assert!(out.report.verification.pass);
    }

    #[test]
    fn halves_use_two_by_two_averaging() {
        let out = carpenter_block(&[0.5, 0.5], &[0.5, 0.5], 0.1).unwrap();
        assert_eq!(out.dim, 2);
        assert!(out.report.diag_residual < 1e-15);
        let dense = out.family.to_dense();
        for p in &dense {
            for z in p.as_slice() {
                assert!((z.norm() - 0.5).abs() < 1e-15);
            }
        }
        assert!(crate::numkit::verify_projection_family(&dense, 1e-12).unwrap().pass);
    }

    #[test]
    fn uneven_example() {
        let out = carpenter_block(&[0.3, 0.7], &[0.5, 0.5], 0.05).unwrap();
        assert!(out.report.verification.pass);
        assert!(out.report.diag_residual < 0.05);
        let dense = out.family.to_dense();
        assert!(crate::numkit::verify_projection_family(&dense, 1e-9).unwrap().pass);
        // Independent diagonal check from the dense matrices.
        for (k, p) in dense.iter().enumerate() {
            assert!((p[(0, 0)].re - [0.3, 0.7][k]).abs() < 0.05);
            for i in 1..out.dim {
                assert!((p[(i, i)].re - 0.5).abs() < 0.05);
            }
        }
    }

    #[test]
    fn realize_matches_explicit_product() {
        let plan = BlockPlan {
            n1: 3,
            head_counts: vec![1, 2],
            len: 4,
            fresh_counts: vec![1, 2],
        };
        let (u, _) = plan.realize();
        let dim = plan.dim();
        let f1 = dft_unitary(3);
        let f2 = dft_unitary(4);
        let heads = [0usize, 1, 5];
        let mut w1 = ComplexMatrix::identity(dim);
        for (a, &ha) in heads.iter().enumerate() {
            for (b, &hb) in heads.iter().enumerate() {
                w1[(ha, hb)] = f1[(a, b)];
            }
        }
        let mut w2 = ComplexMatrix::identity(dim);
        for start in [1usize, 5] {
            for s in 0..4 {
                for t in 0..4 {
                    w2[(start + s, start + t)] = f2[(s, t)];
                }
            }
        }
        assert!(u.max_abs_diff(&w1.matmul(&w2)) < 1e-14);
        assert!(u.is_unitary(1e-12));
    }

    #[test]
    fn endpoint_beta_is_clamped() {
        let out = carpenter_block(&[0.5, 0.5], &[1.0, 0.0], 0.1).unwrap();
        let c = out.report.clamp.clone().unwrap();
        assert_eq!(c.coordinate, 1);
        assert!((c.shift - 0.02).abs() < 1e-15);
        assert!(out.report.diag_residual < 0.1);
        assert!(out.report.verification.pass);
    }

    #[test]
    fn zero_column_reinserted() {
        let out = carpenter_block(&[0.5, 0.0, 0.5], &[0.25, 0.0, 0.75], 0.1).unwrap();
        assert_eq!(out.report.dropped_columns, vec![1]);
        assert_eq!(out.family.count, 3);
        assert_eq!(out.family.ranks()[1], 0);
        assert!(out.report.diag_residual < 0.1);
    }

    #[test]
    fn mismatched_sums_rejected() {
        assert!(matches!(carpenter_block(&[0.5, 0.6], &[0.5, 0.5], 0.1), Err(Error::InfeasibleInput(_))));
    }

    #[test]
    fn vertex_alpha_gives_one_dimensional_block() {
        let out = carpenter_block(&[1.0, 0.0], &[0.5, 0.5], 0.1).unwrap();
        assert_eq!(out.dim, 1);
        assert!(out.report.diag_residual < 0.1);
    }
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use petgraph::algo::dinics;
use petgraph::graph::Graph;
use serde::{Deserialize, Serialize};

use super::approx::{approx_rationals_table, depth_for, RationalTable};
use super::block::{flat_block, validate_partition};
use super::family::ProjectionFamily;
use crate::error::{Error, Result};
use crate::numkit::{common_denominator, FamilyReport, Rational, PROJECTION_TOL};

/// Default cap on the model dimension `D`.
pub const DEFAULT_MAX_DIM: usize = 4096;
/// Tolerance used to recognize rational entries and integer counts.
const RATIONAL_TOL: f64 = 1e-12;
/// Allowed gap between a trace target and the mean of its column.
const TRACE_CONSISTENCY_TOL: f64 = 1e-9;

/// Partition of unity in the diagonal of `M_d` with normalized trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracialPartition {
    pub dim: usize,
    /// `columns[k][i]` is the `i`-th diagonal entry of `A_k`.
    pub columns: Vec<Vec<f64>>,
    pub trace_targets: Vec<Rational>,
}

impl TracialPartition {
    /// Partition whose trace targets are the column means, rationalized.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let dim = columns.first().map_or(0, Vec::len);
        let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / dim.max(1) as f64).collect();
        let mut targets: Vec<Rational> =
            means.iter().map(|&m| Rational::approximate(m, RATIONAL_TOL)).collect::<Result<_>>()?;
        // Absorb rounding into the largest target so the sum is exactly 1.
        let sum: Rational = targets.iter().sum();
        if let Some(big) = (0..targets.len()).max_by(|&a, &b| targets[a].cmp(&targets[b]).then(b.cmp(&a))) {
            targets[big] = &targets[big] + &(Rational::one() - sum);
        }
        let part = TracialPartition { dim, columns, trace_targets: targets };
        part.validate()?;
        Ok(part)
    }

    pub fn count(&self) -> usize {
        self.columns.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.columns.len();
        if n == 0 || self.dim == 0 {
            return Err(Error::InvalidInput("partition needs at least one column and dim ≥ 1".into()));
        }
        if self.trace_targets.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.trace_targets.len() });
        }
        if let Some(c) = self.columns.iter().find(|c| c.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: c.len() });
        }
        for i in 0..self.dim {
            let row: Vec<f64> = self.columns.iter().map(|c| c[i]).collect();
            validate_partition(&row, &format!("atom {i}"))?;
        }
        let total: Rational = self.trace_targets.iter().sum();
        if total != Rational::one() {
            return Err(Error::InfeasibleInput(format!("trace targets sum to {total}, not 1")));
        }
        for (k, (c, t)) in self.columns.iter().zip(&self.trace_targets).enumerate() {
            let mean = c.iter().sum::<f64>() / self.dim as f64;
            if t.is_negative() || (mean - t.to_f64()).abs() > TRACE_CONSISTENCY_TOL {
                return Err(Error::InfeasibleInput(format!(
                    "trace target {t} of column {k} differs from the column mean {mean}"
                )));
            }
        }
        Ok(())
    }
}

/// Trace bookkeeping for one projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub projection: usize,
    pub target: Rational,
    pub rank: usize,
    /// `rank / D`.
    pub trace: Rational,
    /// Whether `trace` is a nearest multiple of `1/D` to `target`.
    pub nearest: bool,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracialReport {
    /// Model dimension `D = dim · block_size`.
    pub model_dim: usize,
    pub block_size: usize,
    /// `"exact"` when all counts are exact rationals, `"rounded"` otherwise.
    pub mode: String,
    pub dropped_columns: Vec<usize>,
    /// `counts[i][k]`: rank of `P_k` inside the block of atom `i`.
    pub counts: Vec<Vec<usize>>,
    pub ledger: Vec<TraceEntry>,
    /// Rational surrogates for the targets, for reference.
    pub surrogates: Option<RationalTable>,
    pub diag_residual: f64,
    pub trace_residual: f64,
    pub verification: FamilyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracialConstruction {
    pub dim: usize,
    pub family: ProjectionFamily,
    pub report: TracialReport,
}

/// [`carpenter_tracial_capped`] with the default dimension cap.
pub fn carpenter_tracial(part: &TracialPartition, eps: f64) -> Result<TracialConstruction> {
    carpenter_tracial_capped(part, eps, DEFAULT_MAX_DIM)
}

/// Projections in `M_D = M_d ⊗ M_m` whose diagonals are within `eps` of the
/// partition columns and whose traces are multiples of `1/D` adjacent to the
/// targets.
///
/// Atom `i` gets an `m`-block in which `P_k` has rank `c_ik` and, after DFT
/// flattening, constant diagonal `c_ik / m`. When every entry is rational
/// with a common denominator `m` and `D ≤ cap`, the counts are exact.
/// Otherwise `m` is searched upward and the counts are a controlled
/// rounding of `m · A`: row sums `m`, column sums the nearest integers to
/// `D · τ_k`, found by max-flow.
pub fn carpenter_tracial_capped(part: &TracialPartition, eps: f64, cap: usize) -> Result<TracialConstruction> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    part.validate()?;
    let n = part.count();
    let d = part.dim;
    let kept: Vec<usize> = (0..n).filter(|&k| part.columns[k].iter().any(|&x| x != 0.0)).collect();
    let dropped: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
    let cols: Vec<&Vec<f64>> = kept.iter().map(|&k| &part.columns[k]).collect();
    let targets: Vec<BigRational> = kept.iter().map(|&k| part.trace_targets[k].0.clone()).collect();

    let (m, counts, mode) = match exact_counts(&cols, &targets, d, cap) {
        Some((m, counts)) => (m, counts, "exact"),
        None => {
            let mut found = None;
            for m in 1..=cap / d {
                if let Some(c) = rounded_counts(&cols, &targets, d, m, eps) {
                    found = Some((m, c));
                    break;
                }
            }
            let (m, c) = found.ok_or_else(|| {
                Error::ModelTooCoarse(format!("no model dimension up to {cap} meets eps = {eps}"))
            })?;
            (m, c, "rounded")
        }
    };
    let model_dim = d * m;
    let blocks = (0..d).map(|i| flat_block((i * m..(i + 1) * m).collect(), &counts[i])).collect();
    let family = ProjectionFamily::new(model_dim, kept.len(), blocks)?.expand_colors(&kept, n);

    let diag = family.diagonals();
    let mut diag_residual: f64 = 0.0;
    for k in 0..n {
        for (j, v) in diag[k].iter().enumerate() {
            diag_residual = diag_residual.max((v - part.columns[k][j / m]).abs());
        }
    }
    let ranks = family.ranks();
    let dim_big = BigInt::from(model_dim);
    let mut trace_residual: f64 = 0.0;
    let ledger: Vec<TraceEntry> = (0..n)
        .map(|k| {
            let target = part.trace_targets[k].clone();
            let trace = Rational(BigRational::new(BigInt::from(ranks[k]), dim_big.clone()));
            let gap = (&trace - &target).abs();
            trace_residual = trace_residual.max(gap.to_f64());
            let half_step = Rational(BigRational::new(1.into(), &dim_big * 2));
            TraceEntry {
                projection: k,
                nearest: gap <= half_step,
                exact: gap.is_zero(),
                target,
                rank: ranks[k],
                trace,
            }
        })
        .collect();
    let surrogate_input: Vec<f64> = kept.iter().map(|&k| part.trace_targets[k].to_f64()).collect();
    let surrogates = approx_rationals_table(&surrogate_input, eps, depth_for(eps)).ok();
    let full_counts = counts
        .iter()
        .map(|row| {
            let mut full = vec![0; n];
            for (j, &k) in kept.iter().enumerate() {
                full[k] = row[j];
            }
            full
        })
        .collect();
    let verification = family.verify(PROJECTION_TOL);
    Ok(TracialConstruction {
        dim: model_dim,
        family,
        report: TracialReport {
            model_dim,
            block_size: m,
            mode: mode.into(),
            dropped_columns: dropped,
            counts: full_counts,
            ledger,
            surrogates,
            diag_residual,
            trace_residual,
            verification,
        },
    })
}

/// Exact counts `m · A` when every entry is rational with a small enough
/// common denominator and the resulting traces are nearest to the targets.
fn exact_counts(cols: &[&Vec<f64>], targets: &[BigRational], d: usize, cap: usize) -> Option<(usize, Vec<Vec<usize>>)> {
    let rat: Vec<Vec<Rational>> = (0..d)
        .map(|i| cols.iter().map(|c| Rational::approximate(c[i], RATIONAL_TOL)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()
        .ok()?;
    if rat.iter().any(|row| row.iter().sum::<Rational>() != Rational::one()) {
        return None;
    }
    let m = common_denominator(rat.iter().flatten()).to_usize()?;
    if m.checked_mul(d)? > cap {
        return None;
    }
    let mb = BigInt::from(m);
    let counts: Vec<Vec<usize>> =
        rat.iter().map(|row| row.iter().map(|q| (&q.0 * &mb).to_integer().to_usize().unwrap()).collect()).collect();
    let dim = BigRational::from_integer(BigInt::from(d * m));
    let half = BigRational::new(1.into(), 2.into());
    for (k, t) in targets.iter().enumerate() {
        let total: usize = counts.iter().map(|row| row[k]).sum();
        let gap = BigRational::from_integer(total.into()) - t * &dim;
        if gap.abs() > half {
            return None;
        }
    }
    Some((m, counts))
}

/// Column totals summing to `dim`, each the floor or ceiling of
/// `dim · t_k`, chosen by largest remainder.
fn nearest_totals(targets: &[BigRational], dim: usize) -> Vec<usize> {
    let scale = BigRational::from_integer(dim.into());
    let scaled: Vec<BigRational> = targets.iter().map(|t| t * &scale).collect();
    let mut totals: Vec<usize> = scaled.iter().map(|x| x.floor().to_integer().to_usize().unwrap_or(0)).collect();
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| scaled[b].fract().cmp(&scaled[a].fract()).then(a.cmp(&b)));
    let missing = dim.saturating_sub(totals.iter().sum());
    for &k in order.iter().take(missing) {
        totals[k] += 1;
    }
    totals
}

/// Controlled rounding of `m · A` with row sums `m` and column sums from
/// [`nearest_totals`], accepted when every entry is within `eps`.
fn rounded_counts(cols: &[&Vec<f64>], targets: &[BigRational], d: usize, m: usize, eps: f64) -> Option<Vec<Vec<usize>>> {
    let n = cols.len();
    let mf = m as f64;
    let mut base = vec![vec![0usize; n]; d];
    let mut free = vec![vec![false; n]; d];
    for i in 0..d {
        for k in 0..n {
            let x = cols[k][i] * mf;
            let r = x.round();
            if (x - r).abs() <= RATIONAL_TOL * mf {
                base[i][k] = r as usize;
            } else {
                // Either rounding that meets eps is allowed; a free cell lets
                // the flow choose.
                let lo_ok = cols[k][i] - x.floor() / mf < eps;
                let hi_ok = x.ceil() / mf - cols[k][i] < eps;
                match (lo_ok, hi_ok) {
                    (true, true) => {
                        base[i][k] = x.floor() as usize;
                        free[i][k] = true;
                    }
                    (true, false) => base[i][k] = x.floor() as usize,
                    (false, true) => base[i][k] = x.ceil() as usize,
                    (false, false) => return None,
                }
            }
        }
    }
    let totals = nearest_totals(targets, d * m);
    let row_need: Vec<usize> = base.iter().map(|row| m.checked_sub(row.iter().sum())).collect::<Option<_>>()?;
    let col_need: Vec<usize> =
        (0..n).map(|k| totals[k].checked_sub(base.iter().map(|row| row[k]).sum())).collect::<Option<_>>()?;
    let need: usize = row_need.iter().sum();
    if need != col_need.iter().sum::<usize>() {
        return None;
    }
    if need == 0 {
        return Some(base);
    }

    let mut g: Graph<(), u64> = Graph::new();
    let source = g.add_node(());
    let sink = g.add_node(());
    let rows: Vec<_> = (0..d).map(|_| g.add_node(())).collect();
    let colsn: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..d {
        g.add_edge(source, rows[i], row_need[i] as u64);
    }
    let mut cells = Vec::new();
    for i in 0..d {
        for k in 0..n {
            if free[i][k] {
                cells.push((i, k, g.add_edge(rows[i], colsn[k], 1)));
            }
        }
    }
    for k in 0..n {
        g.add_edge(colsn[k], sink, col_need[k] as u64);
    }
    let (flow, edge_flows) = dinics(&g, source, sink);
    if flow as usize != need {
        return None;
    }
    for (i, k, e) in cells {
        base[i][k] += edge_flows[e.index()] as usize;
    }
    Some(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(columns: Vec<Vec<f64>>, targets: &[&str]) -> TracialPartition {
        TracialPartition {
            dim: columns[0].len(),
            columns,
            trace_targets: targets.iter().map(|s| s.parse().unwrap()).collect(),
        }
    }

    #[test]
    fn single_column_is_identity() {
        let out = carpenter_tracial(&part(vec![vec![1.0, 1.0]], &["1"]), 0.1).unwrap();
        assert_eq!(out.dim, 2);
        assert!(out.report.ledger[0].exact);
        assert_eq!(out.report.diag_residual, 0.0);
    }

    #[test]
    fn halves_are_exact_in_dimension_two() {
        let out = carpenter_tracial(&part(vec![vec![0.5], vec![0.5]], &["1/2", "1/2"]), 0.01).unwrap();
        assert_eq!(out.dim, 2);
        assert_eq!(out.report.mode, "exact");
        assert!(out.report.diag_residual < 1e-15);
        assert!(out.report.ledger.iter().all(|e| e.exact && e.trace == Rational::new(1, 2)));
        assert!(out.report.verification.pass);
    }

    #[test]
    fn irrational_scalar_is_rounded() {
        let a = 1.0 / 2f64.sqrt();
        let p = TracialPartition::from_columns(vec![vec![a], vec![1.0 - a]]).unwrap();
        let out = carpenter_tracial(&p, 0.01).unwrap();
        assert_eq!(out.report.mode, "rounded");
        assert!(out.report.diag_residual < 0.01);
        assert!(out.report.trace_residual <= 1.0 / out.dim as f64);
        assert!(out.report.ledger.iter().all(|e| e.nearest));
        assert!(out.report.surrogates.is_some());
        // Smallest m with a count within 0.01 of 1/√2 is 7 (5/7).
        assert_eq!(out.dim, 7);
        assert_eq!(out.report.counts[0], vec![5, 2]);
    }

    #[test]
    fn mixed_atoms_respect_rows_and_columns() {
        let p = TracialPartition::from_columns(vec![vec![0.31, 0.77, 0.12], vec![0.69, 0.23, 0.88]]).unwrap();
        let out = carpenter_tracial(&p, 0.03).unwrap();
        assert!(out.report.diag_residual < 0.03);
        for row in &out.report.counts {
            assert_eq!(row.iter().sum::<usize>(), out.report.block_size);
        }
        assert!(out.report.ledger.iter().all(|e| e.nearest));
        assert!(out.report.verification.pass);
    }

    #[test]
    fn cap_is_enforced() {
        let a = 1.0 / 2f64.sqrt();
        let p = TracialPartition::from_columns(vec![vec![a], vec![1.0 - a]]).unwrap();
        assert!(matches!(carpenter_tracial_capped(&p, 1e-4, 64), Err(Error::ModelTooCoarse(_))));
    }

    #[test]
    fn inconsistent_targets_rejected() {
        let p = part(vec![vec![0.5], vec![0.5]], &["1/3", "2/3"]);
        assert!(matches!(carpenter_tracial(&p, 0.1), Err(Error::InfeasibleInput(_))));
    }

    #[test]
    fn zero_column_becomes_zero_projection() {
        let p = part(vec![vec![0.25, 0.75], vec![0.0, 0.0], vec![0.75, 0.25]], &["1/2", "0", "1/2"]);
        let out = carpenter_tracial(&p, 0.01).unwrap();
        assert_eq!(out.report.dropped_columns, vec![1]);
        assert_eq!(out.report.ledger[1].rank, 0);
        assert!(out.report.ledger.iter().all(|e| e.exact));
    }
}

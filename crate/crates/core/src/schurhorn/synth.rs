use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::feasibility::{feasibility_partition, FeasibilityWitness};
use super::necessity::{check_necessity, NecessityReport};
use super::spectral::{DiscreteSpectrum, TargetBlock, TracialSpectrum};
use crate::carpenter::{
    carpenter_discrete, carpenter_tracial_capped, colors_from_counts, round_with_sum, DiagonalSpec, DiscreteReport,
    FamilyBlock, JointPartitionSpec, ProjectionFamily, TracialPartition, TracialReport, DEFAULT_MAX_DIM,
};
use crate::error::{Error, Result};
use crate::numkit::{barycentric_coordinates, common_denominator, convex_hull, dft_unitary, hull_distance, ComplexMatrix};

/// Tolerance of the hull precondition on target entries.
const HULL_TOL: f64 = 1e-9;
/// Slack kept back from each tolerance for floating-point error.
const FLOAT_MARGIN: f64 = 1e-10;
/// Cap on the size of a finite-eigenvalue absorption block.
const MAX_ABSORPTION: usize = 1_000_000;

/// Diagonal block of a unitary `U`: `U[sources[r], targets[c]] = unitary[r][c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryBlock {
    pub targets: Vec<usize>,
    pub sources: Vec<usize>,
    pub unitary: ComplexMatrix,
}

/// A diagonal normal `N = diag(eigenvalues)` together with a unitary `U`,
/// stored as a permuted direct sum of blocks, such that `diag(U* N U)` is
/// the synthesized diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesizedUnitary {
    pub dim: usize,
    pub eigenvalues: Vec<Complex64>,
    pub blocks: Vec<UnitaryBlock>,
}

impl SynthesizedUnitary {
    /// Checks that targets and sources each cover `0..dim` exactly once.
    pub fn validate(&self) -> Result<()> {
        let mut seen_t = vec![false; self.dim];
        let mut seen_s = vec![false; self.dim];
        for b in &self.blocks {
            if b.targets.len() != b.unitary.dim() || b.sources.len() != b.unitary.dim() {
                return Err(Error::InvalidInput("unitary block shape mismatch".into()));
            }
            for (&t, &s) in b.targets.iter().zip(&b.sources) {
                if t >= self.dim || s >= self.dim || seen_t[t] || seen_s[s] {
                    return Err(Error::InvalidInput("unitary blocks must tile the coordinates".into()));
                }
                seen_t[t] = true;
                seen_s[s] = true;
            }
        }
        if self.eigenvalues.len() != self.dim || seen_t.contains(&false) {
            return Err(Error::InvalidInput("unitary blocks must tile the coordinates".into()));
        }
        Ok(())
    }

    /// `diag(U* N U)`, computed blockwise.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for b in &self.blocks {
            for (c, &t) in b.targets.iter().enumerate() {
                out[t] = b.sources.iter().enumerate().map(|(r, &s)| self.eigenvalues[s] * b.unitary[(r, c)].norm_sqr()).sum();
            }
        }
        out
    }

    /// Largest `|V*V - I|` entry over the blocks.
    pub fn unitarity_residual(&self) -> f64 {
        self.blocks.iter().map(|b| b.unitary.unitarity_residual()).fold(0.0, f64::max)
    }

    pub fn unitary_dense(&self) -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(self.dim);
        for b in &self.blocks {
            for (r, &s) in b.sources.iter().enumerate() {
                for (c, &t) in b.targets.iter().enumerate() {
                    u[(s, t)] = b.unitary[(r, c)];
                }
            }
        }
        u
    }

    pub fn normal_dense(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&self.eigenvalues)
    }

    /// Distinct eigenvalues `z_k` and the spectral projections
    /// `U* χ_{z_k}(N) U` as a block family on the target coordinates.
    pub fn spectral_family(&self) -> Result<(Vec<Complex64>, ProjectionFamily)> {
        let mut values: Vec<Complex64> = Vec::new();
        let color: Vec<usize> = self
            .eigenvalues
            .iter()
            .map(|z| {
                values.iter().position(|v| v == z).unwrap_or_else(|| {
                    values.push(*z);
                    values.len() - 1
                })
            })
            .collect();
        let blocks = self
            .blocks
            .iter()
            .map(|b| FamilyBlock::new(b.targets.clone(), b.unitary.clone(), b.sources.iter().map(|&s| color[s]).collect()))
            .collect();
        let family = ProjectionFamily::new(self.dim, values.len(), blocks)?;
        Ok((values, family))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracialSynthesis {
    pub model_dim: usize,
    pub unitary: SynthesizedUnitary,
    pub witness: FeasibilityWitness,
    /// Tolerance handed to the projection construction.
    pub partition_eps: f64,
    pub partition: TracialReport,
    /// Largest residual inside each target block.
    pub block_residuals: Vec<f64>,
    pub diag_residual: f64,
    /// Rank of each spectral projection of `N'`.
    pub multiplicities: Vec<usize>,
    pub necessity: NecessityReport,
}

/// [`synth_diagonal_tracial_capped`] with the default dimension cap.
pub fn synth_diagonal_tracial(spectrum: &TracialSpectrum, blocks: &[TargetBlock], eps: f64) -> Result<TracialSynthesis> {
    synth_diagonal_tracial_capped(spectrum, blocks, eps, DEFAULT_MAX_DIM)
}

/// In a matrix model `M_D`, a normal `N' = Σ z_k P_k` with `τ(P_k)` matching
/// `ω_k` to `1/D` and a unitary whose conjugate of `N'` has diagonal within
/// `eps` of the step target.
///
/// The exact witness `γ` gives each target block a partition of unity
/// `γ[j][·]`; the blocks are laid out as atoms of `M_d`, `d` the common
/// denominator of the block weights, and realized by projections. Since
/// `Σ_k (z_k - c) δ_k` bounds the diagonal error for perturbations `δ` of
/// `γ` summing to zero, the projections are built to accuracy
/// `eps / Σ_k |z_k - c|` with `c` the mean of the `z_k`.
pub fn synth_diagonal_tracial_capped(
    spectrum: &TracialSpectrum,
    blocks: &[TargetBlock],
    eps: f64,
    cap: usize,
) -> Result<TracialSynthesis> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let witness = feasibility_partition(spectrum, blocks)?;
    let z = &spectrum.values;
    let n = z.len();
    let d = common_denominator(blocks.iter().map(|b| &b.weight))
        .to_usize()
        .filter(|&d| d <= cap)
        .ok_or_else(|| Error::ModelTooCoarse(format!("block weights need more than {cap} atoms")))?;
    let mut atom_block = Vec::with_capacity(d);
    for (j, b) in blocks.iter().enumerate() {
        let count = (&b.weight.0 * num_bigint::BigInt::from(d)).to_integer().to_usize().unwrap_or(0);
        atom_block.extend(std::iter::repeat(j).take(count));
    }
    let columns: Vec<Vec<f64>> =
        (0..n).map(|k| atom_block.iter().map(|&j| witness.gamma[j][k].to_f64()).collect()).collect();
    let part = TracialPartition { dim: d, columns, trace_targets: spectrum.weights.clone() };
    let spread = spread(z);
    let partition_eps = if spread > 0.0 { (eps - FLOAT_MARGIN) / spread } else { eps };
    let built = carpenter_tracial_capped(&part, partition_eps, cap)?;

    let model_dim = built.dim;
    let eigenvalues: Vec<Complex64> = built.family.coloring().iter().map(|&k| z[k]).collect();
    let unitary = SynthesizedUnitary {
        dim: model_dim,
        eigenvalues,
        blocks: built.family.blocks.iter().map(|b| same_coordinates(b)).collect(),
    };
    let diag = unitary.diagonal();
    let m = built.report.block_size;
    let mut block_residuals = vec![0.0f64; blocks.len()];
    for (x, v) in diag.iter().enumerate() {
        let j = atom_block[x / m];
        block_residuals[j] = block_residuals[j].max((v - blocks[j].value).norm());
    }
    let diag_residual = block_residuals.iter().copied().fold(0.0, f64::max);
    let necessity = check_necessity(&diag, z, 1e-8 + eps);
    Ok(TracialSynthesis {
        model_dim,
        unitary,
        witness,
        partition_eps,
        multiplicities: built.family.ranks(),
        partition: built.report,
        block_residuals,
        diag_residual,
        necessity,
    })
}

fn same_coordinates(b: &FamilyBlock) -> UnitaryBlock {
    UnitaryBlock { targets: b.indices.clone(), sources: b.indices.clone(), unitary: b.unitary.clone() }
}

/// `Σ_k |z_k - c|` with `c` the mean.
fn spread(z: &[Complex64]) -> f64 {
    let c: Complex64 = z.iter().sum::<Complex64>() / z.len() as f64;
    z.iter().map(|w| (w - c).norm()).sum()
}

/// Convex coefficients of `p` over `points`: barycentric coordinates in a
/// fan triangulation of the hull (or the segment / point it degenerates
/// to). Slightly negative coordinates are clipped and renormalized.
pub(crate) fn convex_coefficients(p: Complex64, points: &[Complex64]) -> Vec<f64> {
    let hull = convex_hull(points);
    let idx = |v: Complex64| points.iter().position(|&q| q == v).expect("hull vertex comes from the points");
    let mut out = vec![0.0; points.len()];
    match hull.len() {
        1 => out[idx(hull[0])] = 1.0,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let ab = b - a;
            let t = (((p - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
            out[idx(a)] += 1.0 - t;
            out[idx(b)] += t;
        }
        h => {
            let mut best: Option<([f64; 3], [usize; 3])> = None;
            for i in 1..h - 1 {
                let tri = [hull[0], hull[i], hull[i + 1]];
                let Ok(g) = barycentric_coordinates(p, tri) else { continue };
                let score = g.iter().copied().fold(f64::INFINITY, f64::min);
                if best.as_ref().map_or(true, |(bg, _)| score > bg.iter().copied().fold(f64::INFINITY, f64::min)) {
                    best = Some((g, [idx(tri[0]), idx(tri[1]), idx(tri[2])]));
                }
            }
            let (g, ids) = best.expect("a hull with three vertices has a nondegenerate triangle");
            let g: Vec<f64> = g.iter().map(|x| x.max(0.0)).collect();
            let s: f64 = g.iter().sum();
            for (x, &i) in g.iter().zip(&ids) {
                out[i] += x / s;
            }
        }
    }
    out
}

/// One finite eigenvalue spread over `size` coordinates by the DFT, together
/// with `counts[k]` copies of each essential value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionBlock {
    pub eigenvalue: Complex64,
    pub size: usize,
    pub counts: Vec<usize>,
    /// Target value of the coordinates the block occupies.
    pub anchor: Complex64,
    /// `|(λ + Σ counts_k z_k) / size - anchor|`.
    pub error: f64,
    pub coordinates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapReport {
    pub mesh: f64,
    pub representatives: usize,
    /// Largest distance from a target value to its representative.
    pub realized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSynthesis {
    pub dim: usize,
    pub method: String,
    pub unitary: SynthesizedUnitary,
    pub snap: Option<SnapReport>,
    pub absorption: Vec<AbsorptionBlock>,
    /// Periods of the tail set aside for absorption blocks.
    pub reserved_periods: usize,
    pub partition_eps: Option<f64>,
    pub partition: Option<DiscreteReport>,
    pub diag_residual: f64,
    pub necessity: NecessityReport,
    /// Whether `N_M` has each finite eigenvalue at its multiplicity and
    /// only essential values elsewhere.
    pub spectrum_matches: bool,
}

/// A truncation `N_M` of a normal operator with the given spectrum and a
/// unitary `U` with `|diag(U* N_M U)[i] - A[i]| < eps` for `i < M`.
///
/// Target values are snapped to representatives on a grid of mesh
/// `eps / (5n)` and written as convex combinations of the essential values.
/// Each finite eigenvalue `λ` is absorbed with essential values into a DFT
/// block of size `t + 1` whose constant diagonal
/// `(λ + Σ c_k z_k) / (t + 1)` approximates a recurring tail value; the
/// remaining coordinates get projections from [`carpenter_discrete`] and
/// `N' = Σ z_k P_k`. `N_M` lists the finite eigenvalues first.
pub fn synth_diagonal_discrete(spectrum: &DiscreteSpectrum, target: &DiagonalSpec, eps: f64) -> Result<DiscreteSynthesis> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    spectrum.validate()?;
    target.validate()?;
    let ess = spectrum.essential_distinct();
    let h = target.head.len();
    let p = target.period();
    let values: Vec<Complex64> = target.head.iter().chain(&target.tail_pattern).copied().collect();
    let pre = check_necessity(&values, &ess, HULL_TOL);
    if let Some(v) = pre.violation {
        return Err(Error::NecessityViolated { index: v.index, point: v.point, distance: v.distance });
    }
    for &(lambda, _) in &spectrum.finite_eigs {
        let distance = hull_distance(lambda, &ess);
        if distance > HULL_TOL {
            return Err(Error::InfeasibleInput(format!(
                "finite eigenvalue {lambda} lies {distance:e} outside the hull of the essential spectrum"
            )));
        }
    }

    let finish = |unitary: SynthesizedUnitary, method: &str, snap, absorption, reserved, partition_eps, partition| {
        unitary.validate()?;
        let dim = unitary.dim;
        let diag = unitary.diagonal();
        let diag_residual = diag.iter().enumerate().map(|(i, v)| (v - target.value_at(i)).norm()).fold(0.0, f64::max);
        let necessity = check_necessity(&diag, &spectrum.points(), 1e-8 + eps);
        let spectrum_matches = spectrum_matches(spectrum, &unitary.eigenvalues);
        Ok(DiscreteSynthesis {
            dim,
            method: method.into(),
            unitary,
            snap,
            absorption,
            reserved_periods: reserved,
            partition_eps,
            partition,
            diag_residual,
            necessity,
            spectrum_matches,
        })
    };

    if let Some(u) = direct_assignment(spectrum, target, eps) {
        return finish(u, "direct", None, Vec::new(), 0, None, None);
    }

    // Snap target values to representatives.
    let n = ess.len();
    let mesh = eps / (5.0 * n as f64);
    let mut cells: HashMap<(i64, i64), Complex64> = HashMap::new();
    let mut rep = Vec::with_capacity(values.len());
    let mut reps: Vec<Complex64> = Vec::new();
    for &v in &values {
        let key = ((v.re / mesh).floor() as i64, (v.im / mesh).floor() as i64);
        let r = *cells.entry(key).or_insert_with(|| {
            reps.push(v);
            v
        });
        rep.push(r);
    }
    let snapped = values.iter().zip(&rep).map(|(v, r)| (v - r).norm()).fold(0.0, f64::max);
    let snap = SnapReport { mesh, representatives: reps.len(), realized: snapped };
    let tol = eps - snapped - FLOAT_MARGIN;
    let coeffs: Vec<Vec<f64>> = rep.iter().map(|&r| convex_coefficients(r, &ess)).collect();

    // Absorb finite eigenvalues into blocks anchored at a recurring tail value.
    let tail_rep = &rep[h..];
    let anchor = (0..p)
        .max_by_key(|&i| (tail_rep.iter().filter(|&&r| r == tail_rep[i]).count(), std::cmp::Reverse(i)))
        .map(|i| tail_rep[i])
        .expect("tail pattern is nonempty");
    let anchor_positions: Vec<usize> = (0..p).filter(|&i| tail_rep[i] == anchor).collect();
    let mut plans = Vec::new();
    for &(lambda, mult) in &spectrum.finite_eigs {
        let plan = absorption_plan(lambda, anchor, &ess, tol).ok_or_else(|| {
            Error::ToleranceUnreachable(format!("no absorption block up to size {MAX_ABSORPTION} for eigenvalue {lambda}"))
        })?;
        for _ in 0..mult {
            plans.push((lambda, plan.clone()));
        }
    }
    let needed: usize = plans.iter().map(|(_, (size, _, _))| size).sum();
    let reserved = needed.div_ceil(anchor_positions.len());
    let mut anchor_coords =
        (0..reserved).flat_map(|period| anchor_positions.iter().map(move |&i| h + period * p + i)).take(needed);
    let mut absorption = Vec::with_capacity(plans.len());
    for (lambda, (size, counts, error)) in plans {
        let coordinates: Vec<usize> = anchor_coords.by_ref().take(size).collect();
        absorption.push(AbsorptionBlock { eigenvalue: lambda, size, counts, anchor, error, coordinates });
    }
    let used: std::collections::HashSet<usize> = absorption.iter().flat_map(|b| b.coordinates.iter().copied()).collect();

    // Remaining coordinates form a relabeled spec: head and unused reserved
    // coordinates first, then the periodic tail from period `reserved` on.
    let relabeled_head: Vec<usize> = (0..h + reserved * p).filter(|i| !used.contains(i)).collect();
    let coeff_at = |i: usize| -> &Vec<f64> { if i < h { &coeffs[i] } else { &coeffs[h + (i - h) % p] } };
    let specs = (0..n)
        .map(|k| {
            let head: Vec<f64> = relabeled_head.iter().map(|&i| coeff_at(i)[k]).collect();
            let tail: Vec<f64> = (0..p).map(|i| coeffs[h + i][k]).collect();
            DiagonalSpec::real(&head, &tail)
        })
        .collect::<Result<Vec<_>>>()?;
    let joint = JointPartitionSpec::new(specs)?;
    let spread = spread(&ess);
    let partition_eps = if spread > 0.0 { tol / spread } else { tol };
    let built = carpenter_discrete(&joint, partition_eps)?;
    let h2 = relabeled_head.len();
    let to_original = |i: usize| if i < h2 { relabeled_head[i] } else { h + reserved * p + (i - h2) };
    let dim = h + reserved * p + (built.dim - h2);

    // Finite eigenvalues occupy the first coordinates of N_M.
    let mut eigenvalues = vec![Complex64::new(0.0, 0.0); dim];
    let mut next = absorption.len();
    let mut blocks = Vec::new();
    for (j, b) in absorption.iter().enumerate() {
        eigenvalues[j] = b.eigenvalue;
        let mut sources = vec![j];
        for k in colors_from_counts(&b.counts) {
            eigenvalues[next] = ess[k];
            sources.push(next);
            next += 1;
        }
        blocks.push(UnitaryBlock { targets: b.coordinates.clone(), sources, unitary: dft_unitary(b.size) });
    }
    for fb in &built.family.blocks {
        let mut sources = Vec::with_capacity(fb.size());
        for &k in &fb.colors {
            eigenvalues[next] = ess[k];
            sources.push(next);
            next += 1;
        }
        blocks.push(UnitaryBlock {
            targets: fb.indices.iter().map(|&i| to_original(i)).collect(),
            sources,
            unitary: fb.unitary.clone(),
        });
    }
    let unitary = SynthesizedUnitary { dim, eigenvalues, blocks };
    finish(unitary, "blocks", Some(snap), absorption, reserved, Some(partition_eps), Some(built.report))
}

/// Smallest `t` with counts `c` (`Σ c = t`) such that
/// `|(λ + Σ c_k z_k) / (t + 1) - anchor| < tol`.
fn absorption_plan(lambda: Complex64, anchor: Complex64, ess: &[Complex64], tol: f64) -> Option<(usize, Vec<usize>, f64)> {
    let n = ess.len();
    for t in 1..MAX_ABSORPTION {
        let q = (anchor * (t + 1) as f64 - lambda) / t as f64;
        let g = convex_coefficients(q, ess);
        let scaled: Vec<f64> = g.iter().map(|x| x * t as f64).collect();
        let counts = round_with_sum(&scaled, t as i64, &vec![0; n], &vec![t as i64; n])?;
        let sum: Complex64 = lambda + counts.iter().zip(ess).map(|(&c, z)| z * c as f64).sum::<Complex64>();
        let err = (sum / (t + 1) as f64 - anchor).norm();
        if err < tol {
            return Some((t + 1, counts.into_iter().map(|c| c as usize).collect(), err));
        }
    }
    None
}

/// Permutation synthesis: every coordinate of a short truncation is given
/// a spectral value within `eps` of its target.
fn direct_assignment(spectrum: &DiscreteSpectrum, target: &DiagonalSpec, eps: f64) -> Option<SynthesizedUnitary> {
    let copies: Vec<Complex64> = spectrum.finite_eigs.iter().flat_map(|&(l, m)| std::iter::repeat(l).take(m)).collect();
    let ess = spectrum.essential_distinct();
    let h = target.head.len();
    let p = target.period();
    for periods in 1..=copies.len() + 1 {
        let dim = h + periods * p;
        let mut value: Vec<Option<Complex64>> = vec![None; dim];
        let mut source = vec![usize::MAX; dim];
        let mut ok = true;
        for (j, &l) in copies.iter().enumerate() {
            let best = (0..dim)
                .filter(|&i| value[i].is_none())
                .map(|i| (i, (target.value_at(i) - l).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((i, d)) if d < eps => {
                    value[i] = Some(l);
                    source[i] = j;
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut next = copies.len();
        for i in 0..dim {
            if value[i].is_some() {
                continue;
            }
            let a = target.value_at(i);
            let z = ess.iter().copied().min_by(|x, y| (x - a).norm().total_cmp(&(y - a).norm()))?;
            if (z - a).norm() >= eps {
                return None;
            }
            value[i] = Some(z);
            source[i] = next;
            next += 1;
        }
        let mut eigenvalues = vec![Complex64::new(0.0, 0.0); dim];
        let blocks = (0..dim)
            .map(|i| {
                eigenvalues[source[i]] = value[i].unwrap();
                UnitaryBlock { targets: vec![i], sources: vec![source[i]], unitary: ComplexMatrix::identity(1) }
            })
            .collect();
        return Some(SynthesizedUnitary { dim, eigenvalues, blocks });
    }
    None
}

fn spectrum_matches(spectrum: &DiscreteSpectrum, eigenvalues: &[Complex64]) -> bool {
    let mut remaining: Vec<(Complex64, usize)> = spectrum.finite_eigs.clone();
    let ess = &spectrum.essential;
    for z in eigenvalues {
        if let Some(slot) = remaining.iter_mut().find(|(l, m)| l == z && *m > 0) {
            slot.1 -= 1;
        } else if !ess.contains(z) {
            return false;
        }
    }
    remaining.iter().all(|(_, m)| *m == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Rational;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn triangle() -> Vec<Complex64> {
        vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]
    }

    #[test]
    fn convex_coefficients_reproduce_points() {
        let square = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)];
        for p in [c(0.3, 0.2), c(0.9, 0.9), c(0.5, 0.0), c(1.0, 1.0)] {
            let g = convex_coefficients(p, &square);
            assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!(g.iter().all(|&x| x >= 0.0));
            let back: Complex64 = g.iter().zip(&square).map(|(x, z)| z * x).sum();
            assert!((back - p).norm() < 1e-14);
        }
        let seg = vec![c(0.0, 0.0), c(2.0, 0.0)];
        assert_eq!(convex_coefficients(c(0.5, 0.0), &seg), vec![0.75, 0.25]);
    }

    #[test]
    fn tracial_constant_diagonal() {
        let s = TracialSpectrum::new(triangle(), vec![Rational::new(1, 3); 3]).unwrap();
        let blocks = vec![TargetBlock::new(s.trace(), Rational::one())];
        let out = synth_diagonal_tracial(&s, &blocks, 0.02).unwrap();
        assert!(out.diag_residual < 0.02);
        assert!(out.necessity.holds);
        assert!(out.unitary.unitarity_residual() < 1e-12);
    }

    #[test]
    fn tracial_two_blocks() {
        let s = TracialSpectrum::new(triangle(), vec![Rational::new(1, 3); 3]).unwrap();
        let blocks = vec![
            TargetBlock::new(c(0.5, 1.0 / 6.0), Rational::new(1, 2)),
            TargetBlock::new(c(1.0 / 6.0, 0.5), Rational::new(1, 2)),
        ];
        let out = synth_diagonal_tracial(&s, &blocks, 0.01).unwrap();
        assert!(out.diag_residual < 0.01, "{}", out.diag_residual);
        assert_eq!(out.block_residuals.len(), 2);
    }

    #[test]
    fn discrete_identity_synthesis() {
        let s = DiscreteSpectrum::new(vec![(c(0.5, 0.5), 1)], triangle()).unwrap();
        let a = DiagonalSpec::new(vec![c(0.5, 0.5)], triangle()).unwrap();
        let out = synth_diagonal_discrete(&s, &a, 0.01).unwrap();
        assert_eq!(out.method, "direct");
        assert_eq!(out.diag_residual, 0.0);
        assert!(out.spectrum_matches);
    }

    #[test]
    fn discrete_midpoint_head_with_vertex_tail() {
        let s = DiscreteSpectrum::new(vec![], triangle()).unwrap();
        let a = DiagonalSpec::new(vec![c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.5)], vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        for eps in [0.2, 0.05] {
            let out = synth_diagonal_discrete(&s, &a, eps).unwrap();
            assert!(out.diag_residual < eps, "eps {eps}: {}", out.diag_residual);
            assert!(out.necessity.holds);
            assert!(out.spectrum_matches);
            assert!(out.unitary.unitarity_residual() < 1e-12);
        }
    }

    #[test]
    fn discrete_constant_target_is_flattened() {
        let s = DiscreteSpectrum::new(vec![], triangle()).unwrap();
        let a = DiagonalSpec::new(vec![], vec![c(1.0 / 3.0, 1.0 / 3.0)]).unwrap();
        let out = synth_diagonal_discrete(&s, &a, 0.05).unwrap();
        assert!(out.diag_residual < 0.05);
    }

    #[test]
    fn finite_eigenvalue_is_absorbed() {
        let s = DiscreteSpectrum::new(vec![(c(0.2, 0.2), 2), (c(1.0, 0.0), 1)], triangle()).unwrap();
        let a = DiagonalSpec::new(vec![c(0.3, 0.1)], vec![c(0.25, 0.25), c(0.5, 0.2)]).unwrap();
        let out = synth_diagonal_discrete(&s, &a, 0.05).unwrap();
        assert_eq!(out.method, "blocks");
        assert_eq!(out.absorption.len(), 3);
        assert!(out.diag_residual < 0.05, "{}", out.diag_residual);
        assert!(out.spectrum_matches);
        assert_eq!(out.unitary.eigenvalues[..3], [c(0.2, 0.2), c(0.2, 0.2), c(1.0, 0.0)]);
        let (values, family) = out.unitary.spectral_family().unwrap();
        assert_eq!(values.len(), 4);
        assert!(family.verify(1e-9).pass);
        let via_family = family.weighted_diag(&values);
        for (x, y) in via_family.iter().zip(out.unitary.diagonal()) {
            assert!((x - y).norm() < 1e-12);
        }
        // Independent dense check of diag(U* N U).
        let u = out.unitary.unitary_dense();
        let conj = out.unitary.normal_dense().conjugate_by(&u);
        for i in 0..out.dim {
            assert!((conj[(i, i)] - a.value_at(i)).norm() < 0.05);
        }
    }

    #[test]
    fn target_outside_hull_is_rejected() {
        let s = DiscreteSpectrum::new(vec![], triangle()).unwrap();
        let a = DiagonalSpec::new(vec![c(2.0, 0.0)], vec![c(0.0, 0.0)]).unwrap();
        assert!(matches!(synth_diagonal_discrete(&s, &a, 0.1), Err(Error::NecessityViolated { index: 0, .. })));
    }
}

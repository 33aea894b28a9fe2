use serde::{Deserialize, Serialize};

use super::block::{clamp_last, flat_block, plan_block, BlockPlan};
use super::family::{spectrum_recurrence, FamilyBlock, ProjectionFamily, SpectrumRecurrence};
use super::rounding::round_fractions;
use super::spec::JointPartitionSpec;
use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, FamilyReport, PROJECTION_TOL};

/// Truncations longer than this are reported as unreachable.
const MAX_TRUNCATION: usize = 1_000_000;
/// Slack kept back from the block tolerance to absorb floating-point error.
const FLOAT_MARGIN: f64 = 1e-10;

/// One stage of the error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetStage {
    pub stage: String,
    /// Nominal share of the caller's eps.
    pub allotted: f64,
    /// Perturbation actually introduced (for the block stage: the rounding
    /// tolerance it was granted).
    pub realized: f64,
}

/// What a truncated coordinate is used for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum IndexRole {
    /// Coordinate carries its own one-dimensional block.
    Direct,
    /// First coordinate of a block built for a head index.
    HeadBlock { class: usize },
    /// Coordinate of a tail class absorbed into a head block.
    HeadBlockFill { class: usize },
    /// Coordinate of a repeated flattening block of a tail class.
    ClassCopy { class: usize, copy: usize },
    /// Coordinate of the single non-repeated flattening block of a class.
    ClassRemainder { class: usize },
}

/// Relation between a truncated coordinate and the spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    /// Coordinate in both the truncation and the spec.
    pub index: usize,
    /// Position in the tail pattern, for tail coordinates.
    pub pattern_position: Option<usize>,
    pub block: usize,
    #[serde(flatten)]
    pub role: IndexRole,
}

/// Distinct tail tuple together with the pattern positions that carry it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailClass {
    pub value: Vec<f64>,
    pub positions: Vec<usize>,
    /// Size of the repeated flattening block.
    pub copy_size: usize,
    pub copy_counts: Vec<usize>,
    pub copies: usize,
    pub remainder_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadAssignment {
    pub head_index: usize,
    pub class: usize,
    /// `None` when the head tuple equals the class tuple and the index simply
    /// joins the class.
    pub plan: Option<BlockPlan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteReport {
    pub dim: usize,
    pub periods: usize,
    pub method: String,
    pub dropped_columns: Vec<usize>,
    pub budget: Vec<BudgetStage>,
    pub classes: Vec<TailClass>,
    pub heads: Vec<HeadAssignment>,
    pub diag_residual: f64,
    pub verification: FamilyReport,
    pub spectrum: Vec<SpectrumRecurrence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteConstruction {
    pub dim: usize,
    pub family: ProjectionFamily,
    pub index_map: Vec<IndexEntry>,
    pub report: DiscreteReport,
}

struct Layout {
    blocks: Vec<FamilyBlock>,
    repeated: Vec<bool>,
    roles: Vec<(usize, IndexRole)>,
}

impl Layout {
    fn new(dim: usize) -> Self {
        Layout {
            blocks: Vec::new(),
            repeated: Vec::new(),
            roles: vec![(usize::MAX, IndexRole::Direct); dim],
        }
    }

    fn push(&mut self, block: FamilyBlock, repeated: bool, role: impl Fn(usize) -> IndexRole) {
        let id = self.blocks.len();
        for (pos, &i) in block.indices.iter().enumerate() {
            self.roles[i] = (id, role(pos));
        }
        self.blocks.push(block);
        self.repeated.push(repeated);
    }
}

/// Projections on a truncation `C^M` of `ℓ²` whose diagonals approximate a
/// joint partition of unity given by head-plus-periodic-tail specs.
///
/// The tail is bucketed into classes of equal value tuples. Each class is
/// covered by repeated flattening blocks whose counts keep every projection
/// nontrivial, so each eigenvalue recurs in every repetition. Each head
/// index is paired with a class through a [`carpenter_block`] construction
/// that absorbs a few class coordinates. `M` is the shortest head-plus-whole-
/// periods truncation whose class coordinates can be tiled this way.
///
/// [`carpenter_block`]: super::carpenter_block
pub fn carpenter_discrete(joint: &JointPartitionSpec, eps: f64) -> Result<DiscreteConstruction> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let tuples = joint.tuples()?;
    let n = joint.count();
    let h = joint.head_len();
    let p = joint.period();

    let nonzero = |k: usize| tuples.head.iter().chain(&tuples.tail).any(|t| t[k] != 0.0);
    let kept: Vec<usize> = (0..n).filter(|&k| nonzero(k)).collect();
    let dropped: Vec<usize> = (0..n).filter(|&k| !nonzero(k)).collect();
    let project = |t: &Vec<f64>| kept.iter().map(|&k| t[k]).collect::<Vec<f64>>();
    let mut head: Vec<Vec<f64>> = tuples.head.iter().map(project).collect();
    let mut tail: Vec<Vec<f64>> = tuples.tail.iter().map(project).collect();
    let stage = eps / 5.0;

    // Clamp the last coordinate into [eps/5, 1 - eps/5].
    let mut clamp_realized: f64 = 0.0;
    if kept.len() >= 2 {
        for t in head.iter_mut().chain(tail.iter_mut()) {
            if let Some(c) = clamp_last(t, stage) {
                clamp_realized = clamp_realized.max(c.shift);
            }
        }
    }
    let block_tol = eps - clamp_realized - FLOAT_MARGIN;
    let budget = vec![
        BudgetStage { stage: "clamp".into(), allotted: stage, realized: clamp_realized },
        BudgetStage { stage: "essential_snap".into(), allotted: stage, realized: 0.0 },
        BudgetStage { stage: "cover_snap".into(), allotted: stage, realized: 0.0 },
        BudgetStage { stage: "block".into(), allotted: stage, realized: block_tol.max(0.0) },
        BudgetStage { stage: "assembly".into(), allotted: stage, realized: 0.0 },
    ];
    if block_tol <= 0.0 {
        return Err(Error::ToleranceUnreachable(format!("eps = {eps} leaves no room for rounding")));
    }

    let finish = |dim: usize, layout: Layout, method: &str, periods: usize, classes: Vec<TailClass>, heads: Vec<HeadAssignment>| {
        let family = ProjectionFamily::new(dim, kept.len(), layout.blocks)?.expand_colors(&kept, n);
        let diag = family.diagonals();
        let mut diag_residual: f64 = 0.0;
        for i in 0..dim {
            let t = if i < h { &tuples.head[i] } else { &tuples.tail[(i - h) % p] };
            for k in 0..n {
                diag_residual = diag_residual.max((diag[k][i] - t[k]).abs());
            }
        }
        let verification = family.verify(PROJECTION_TOL);
        let spectrum = spectrum_recurrence(&family, &layout.repeated);
        let index_map = layout
            .roles
            .into_iter()
            .enumerate()
            .map(|(i, (block, role))| IndexEntry {
                index: i,
                pattern_position: (i >= h).then(|| (i - h) % p),
                block,
                role,
            })
            .collect();
        Ok(DiscreteConstruction {
            dim,
            family,
            index_map,
            report: DiscreteReport {
                dim,
                periods,
                method: method.into(),
                dropped_columns: dropped.clone(),
                budget: budget.clone(),
                classes,
                heads,
                diag_residual,
                verification,
                spectrum,
            },
        })
    };

    if let Some(layout) = direct_layout(&head, &tail, block_tol) {
        return finish(h + p, layout, "direct", 1, Vec::new(), Vec::new());
    }

    // Tail classes.
    let mut class_values: Vec<Vec<f64>> = Vec::new();
    let mut class_positions: Vec<Vec<usize>> = Vec::new();
    for (pos, t) in tail.iter().enumerate() {
        match class_values.iter().position(|v| v == t) {
            Some(c) => class_positions[c].push(pos),
            None => {
                class_values.push(t.clone());
                class_positions.push(vec![pos]);
            }
        }
    }
    let nc = class_values.len();
    let mut copy_plan = Vec::with_capacity(nc);
    for v in &class_values {
        let (size, counts) = smallest_flat(v, block_tol, 1)
            .ok_or_else(|| Error::ToleranceUnreachable(format!("no flattening block meets tolerance {block_tol}")))?;
        copy_plan.push((size, counts));
    }

    // Pair head indices with classes.
    let mut heads = Vec::with_capacity(h);
    let mut joined = vec![0usize; nc];
    let mut consumed = vec![0usize; nc];
    for (i, t) in head.iter().enumerate() {
        if let Some(c) = class_values.iter().position(|v| v == t) {
            joined[c] += 1;
            heads.push(HeadAssignment { head_index: i, class: c, plan: None });
            continue;
        }
        let best = (0..nc)
            .filter_map(|c| plan_block(t, &class_values[c], block_tol).map(|pl| (c, pl)))
            .min_by_key(|(c, pl)| (pl.dim(), *c))
            .ok_or_else(|| Error::ToleranceUnreachable(format!("head index {i} admits no block at tolerance {block_tol}")))?;
        consumed[best.0] += best.1.dim() - 1;
        heads.push(HeadAssignment { head_index: i, class: best.0, plan: Some(best.1) });
    }

    // Shortest truncation whose class coordinates tile into flattening blocks.
    let mut periods = 1;
    let tiling = loop {
        if h + periods * p > MAX_TRUNCATION {
            return Err(Error::ToleranceUnreachable(format!("no truncation up to {MAX_TRUNCATION} tiles the classes")));
        }
        let attempt: Option<Vec<(usize, Option<(usize, Vec<usize>)>)>> = (0..nc)
            .map(|c| {
                let pool = joined[c] + periods * class_positions[c].len();
                let rest = pool.checked_sub(consumed[c])?;
                tile_class(rest, &copy_plan[c], &class_values[c], block_tol)
            })
            .collect();
        if let Some(t) = attempt {
            break t;
        }
        periods += 1;
    };
    let dim = h + periods * p;

    // Member coordinates of each class, in increasing order.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nc];
    for (i, a) in heads.iter().enumerate() {
        if a.plan.is_none() {
            members[a.class].push(i);
        }
    }
    let class_of_pos: Vec<usize> = (0..p).map(|pos| class_positions.iter().position(|ps| ps.contains(&pos)).unwrap()).collect();
    for i in h..dim {
        members[class_of_pos[(i - h) % p]].push(i);
    }
    for m in &mut members {
        m.sort_unstable();
    }
    let mut cursor = vec![0usize; nc];
    let mut layout = Layout::new(dim);

    for a in &heads {
        let Some(plan) = &a.plan else { continue };
        let c = a.class;
        let take = plan.dim() - 1;
        let mut indices = vec![a.head_index];
        indices.extend_from_slice(&members[c][cursor[c]..cursor[c] + take]);
        cursor[c] += take;
        let (u, colors) = plan.realize();
        layout.push(FamilyBlock::new(indices, u, colors), false, |pos| {
            if pos == 0 {
                IndexRole::HeadBlock { class: c }
            } else {
                IndexRole::HeadBlockFill { class: c }
            }
        });
    }

    let mut classes = Vec::with_capacity(nc);
    for c in 0..nc {
        let (size, counts) = &copy_plan[c];
        let (copies, remainder) = &tiling[c];
        for copy in 0..*copies {
            let indices = members[c][cursor[c]..cursor[c] + size].to_vec();
            cursor[c] += size;
            layout.push(flat_block(indices, counts), true, |_| IndexRole::ClassCopy { class: c, copy });
        }
        let mut remainder_size = 0;
        if let Some((rsize, rcounts)) = remainder {
            let indices = members[c][cursor[c]..cursor[c] + rsize].to_vec();
            cursor[c] += rsize;
            remainder_size = *rsize;
            layout.push(flat_block(indices, rcounts), false, |_| IndexRole::ClassRemainder { class: c });
        }
        debug_assert_eq!(cursor[c], members[c].len());
        classes.push(TailClass {
            value: class_values[c].clone(),
            positions: class_positions[c].clone(),
            copy_size: *size,
            copy_counts: counts.clone(),
            copies: *copies,
            remainder_size,
        });
    }
    finish(dim, layout, "blocks", periods, classes, heads)
}

/// Smallest size `s ≥ min_size` of a flattening block whose constant
/// diagonal `counts / s` is within `tol` of `value` with every count in
/// `[1, s-1]`.
fn smallest_flat(value: &[f64], tol: f64, min_size: usize) -> Option<(usize, Vec<usize>)> {
    let cap = (4.0 / tol).ceil() as usize + 4 + value.len();
    (min_size..=cap).find_map(|s| flat_counts(value, s, tol).map(|c| (s, c)))
}

fn flat_counts(value: &[f64], size: usize, tol: f64) -> Option<Vec<usize>> {
    let (counts, err) = round_fractions(value, size, true)?;
    (err < tol).then_some(counts)
}

/// Splits `rest` class coordinates into at least one copy of the repeated
/// block plus at most one extra flattening block.
fn tile_class(rest: usize, copy: &(usize, Vec<usize>), value: &[f64], tol: f64) -> Option<(usize, Option<(usize, Vec<usize>)>)> {
    let size = copy.0;
    let q = rest / size;
    let r = rest % size;
    if q == 0 {
        return None;
    }
    if r == 0 {
        return Some((q, None));
    }
    for t in 0..q {
        let extra = r + t * size;
        if let Some(counts) = flat_counts(value, extra, tol) {
            return Some((q - t, Some((extra, counts))));
        }
    }
    None
}

/// One coordinate per block with a single projection equal to 1 there, when
/// such a diagonal choice meets `tol` and keeps spectrum equal to essential
/// spectrum for every projection.
fn direct_layout(head: &[Vec<f64>], tail: &[Vec<f64>], tol: f64) -> Option<Layout> {
    let n = tail[0].len();
    let admissible = |t: &Vec<f64>| -> Vec<usize> {
        let mut ks: Vec<usize> = (0..n)
            .filter(|&k| (0..n).all(|j| ((j == k) as u8 as f64 - t[j]).abs() < tol))
            .collect();
        ks.sort_by(|&a, &b| t[b].total_cmp(&t[a]).then(a.cmp(&b)));
        ks
    };
    let mut covered = vec![false; n];
    let mut tail_colors = Vec::with_capacity(tail.len());
    for t in tail {
        let ks = admissible(t);
        let pick = *ks.iter().find(|&&k| !covered[k]).or(ks.first())?;
        covered[pick] = true;
        tail_colors.push(pick);
    }
    let mut head_colors = Vec::with_capacity(head.len());
    for t in head {
        let ks = admissible(t);
        let pick = *ks.iter().find(|&&k| covered[k])?;
        head_colors.push(pick);
    }
    // Eigenvalue 0 of P_k recurs when some tail coordinate has another color.
    let distinct_tail = tail_colors.iter().collect::<std::collections::BTreeSet<_>>().len();
    for k in 0..n {
        let zero_in_head = head_colors.iter().any(|&c| c != k);
        let zero_in_tail = tail_colors.iter().any(|&c| c != k);
        if zero_in_head && !zero_in_tail && distinct_tail == 1 {
            return None;
        }
    }
    let dim = head.len() + tail.len();
    let mut layout = Layout::new(dim);
    for (i, &k) in head_colors.iter().chain(&tail_colors).enumerate() {
        layout.push(FamilyBlock::new(vec![i], ComplexMatrix::identity(1), vec![k]), i >= head.len(), |_| IndexRole::Direct);
    }
    Some(layout)
}

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{simplest_in, Rational};

const MAX_HALVINGS: usize = 64;

fn exact(x: f64, what: &str) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("{what} is not finite: {x}")))
}

/// Rational `q_k ∈ [r_k/2, r_k)` such that both `q/Σq` and `(r-q)/Σ(r-q)`
/// stay within `eps` of `r/Σr`, componentwise.
///
/// Each `q_k` is the smallest-denominator rational in `[r_k/2, r_k/2 + δ)`,
/// with `δ` starting at `min r_k / 2` and halved until the ratio bounds hold.
pub fn approx_rationals_step(r: &[f64], eps: f64) -> Result<Vec<Rational>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let r: Vec<BigRational> = r.iter().map(|&x| exact(x, "entry")).collect::<Result<_>>()?;
    let eps = exact(eps, "eps")?;
    step_exact(&r, &eps)
}

pub(crate) fn step_exact(r: &[BigRational], eps: &BigRational) -> Result<Vec<Rational>> {
    if r.is_empty() {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    if let Some(x) = r.iter().find(|x| !x.is_positive()) {
        return Err(Error::InvalidInput(format!("entries must be positive, got {x}")));
    }
    let two = BigRational::from_integer(2.into());
    let total: BigRational = r.iter().sum();
    let mut delta = r.iter().min().unwrap() / &two;
    for _ in 0..=MAX_HALVINGS {
        let q: Vec<BigRational> = r
            .iter()
            .map(|x| {
                let lo = x / &two;
                let hi = &lo + &delta;
                simplest_in(&lo, true, &hi, false).0
            })
            .collect();
        let q_total: BigRational = q.iter().sum();
        let rest_total = &total - &q_total;
        let ok = r.iter().zip(&q).all(|(x, y)| {
            let target = x / &total;
            let first = (&target - y / &q_total).abs();
            let second = (&target - (x - y) / &rest_total).abs();
            &first < eps && &second < eps
        });
        if ok {
            return Ok(q.into_iter().map(Rational).collect());
        }
        delta /= &two;
    }
    Err(Error::ToleranceUnreachable(format!(
        "rational step did not meet eps = {eps} after {MAX_HALVINGS} halvings"
    )))
}

/// Rows of rational vectors whose column sums approach `p` from below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTable {
    /// `p` made exact: the rational value of each float, rescaled to sum 1.
    pub target: Vec<Rational>,
    /// `rows[j][k]`, for `j < depth`.
    pub rows: Vec<Vec<Rational>>,
    /// `target_k` minus the column sums of `rows`; strictly positive.
    pub remainder: Vec<Rational>,
}

impl RationalTable {
    /// Rows followed by the remainder as a final row, so that column sums
    /// equal the target exactly.
    pub fn rows_with_remainder(&self) -> Vec<Vec<Rational>> {
        let mut rows = self.rows.clone();
        rows.push(self.remainder.clone());
        rows
    }
}

/// Table `q[j][k]` (rows `j = 1..=depth`) with every row ratio
/// `q[j][k] / Σ_k q[j][k]` within `eps` of `p_k` and partial column sums in
/// `[(1 - 2^{-ℓ}) p_k, p_k)`.
///
/// Row `ℓ` applies [`approx_rationals_step`] to the current remainder at
/// tolerance `eps / 2^ℓ`, so the drift of the remainder ratios stays below
/// `eps` and the remainder itself is a valid final row.
pub fn approx_rationals_table(p: &[f64], eps: f64, depth: usize) -> Result<RationalTable> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let sum: f64 = p.iter().sum();
    if p.is_empty() || (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("entries must sum to 1, got {sum}")));
    }
    let raw: Vec<BigRational> = p.iter().map(|&x| exact(x, "entry")).collect::<Result<_>>()?;
    if let Some(x) = raw.iter().find(|x| !x.is_positive()) {
        return Err(Error::InvalidInput(format!("entries must be positive, got {x}")));
    }
    let raw_total: BigRational = raw.iter().sum();
    let target: Vec<BigRational> = raw.iter().map(|x| x / &raw_total).collect();
    let mut eps_row = exact(eps, "eps")?;
    let two = BigRational::from_integer(2.into());
    let mut remainder = target.clone();
    let mut rows = Vec::with_capacity(depth);
    for _ in 0..depth {
        eps_row /= &two;
        let q = step_exact(&remainder, &eps_row)?;
        for (r, x) in remainder.iter_mut().zip(&q) {
            *r -= &x.0;
        }
        rows.push(q);
    }
    Ok(RationalTable {
        target: target.into_iter().map(Rational).collect(),
        rows,
        remainder: remainder.into_iter().map(Rational).collect(),
    })
}

/// Smallest depth `J` with `2^{-J} < eps / 2`.
pub fn depth_for(eps: f64) -> usize {
    let mut j = 1;
    while 0.5f64.powi(j as i32) >= eps / 2.0 && j < 1000 {
        j += 1;
    }
    j
}

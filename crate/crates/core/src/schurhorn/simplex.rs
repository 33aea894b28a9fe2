use num_traits::{Num, Signed};

/// Exact ordered field usable by the simplex method.
pub trait LpScalar: Clone + Num + Signed + PartialOrd {}

impl<T: Clone + Num + Signed + PartialOrd> LpScalar for T {}

/// Result of a Phase-I feasibility solve of `A x = b, x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    /// A basic feasible solution.
    Feasible(Vec<T>),
    /// A vector `y` with `Aᵀy ≤ 0` and `bᵀy > 0`.
    Infeasible(Vec<T>),
}

/// Phase-I simplex with Bland's rule in exact arithmetic.
///
/// Rows are sign-normalized so that `b ≥ 0`, one artificial variable is
/// added per row, and their sum is minimized. A positive optimum yields the
/// Farkas vector from the optimal duals: the reduced cost of artificial `i`
/// is `1 - y_i`.
pub fn solve_feasibility<T: LpScalar>(a: &[Vec<T>], b: &[T]) -> LpOutcome<T> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    assert_eq!(b.len(), m, "one right-hand side per row");
    let width = n + m + 1;
    let sign: Vec<T> = b.iter().map(|x| if x.is_negative() { -T::one() } else { T::one() }).collect();

    let mut tab: Vec<Vec<T>> = (0..m)
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            row.extend(a[i].iter().map(|x| x.clone() * sign[i].clone()));
            row.extend((0..m).map(|j| if i == j { T::one() } else { T::zero() }));
            row.push(b[i].clone() * sign[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of the Phase-I objective, with -objective in the last slot.
    let mut cost: Vec<T> = vec![T::zero(); width];
    for row in &tab {
        for j in 0..n {
            cost[j] = cost[j].clone() - row[j].clone();
        }
        cost[width - 1] = cost[width - 1].clone() - row[width - 1].clone();
    }

    loop {
        let Some(enter) = (0..n + m).find(|&j| cost[j].is_negative()) else { break };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let ratio = tab[i][width - 1].clone() / tab[i][enter].clone();
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase I is bounded below by zero, so an entering column always has
        // a positive entry.
        let (r, _) = leave.expect("phase-one objective is bounded");
        pivot(&mut tab, &mut cost, r, enter);
        basis[r] = enter;
    }

    if cost[width - 1].is_zero() {
        let mut x = vec![T::zero(); n];
        for (i, &v) in basis.iter().enumerate() {
            if v < n {
                x[v] = tab[i][width - 1].clone();
            }
        }
        LpOutcome::Feasible(x)
    } else {
        let y = (0..m).map(|i| (T::one() - cost[n + i].clone()) * sign[i].clone()).collect();
        LpOutcome::Infeasible(y)
    }
}

fn pivot<T: LpScalar>(tab: &mut [Vec<T>], cost: &mut [T], r: usize, c: usize) {
    let p = tab[r][c].clone();
    for x in tab[r].iter_mut() {
        *x = x.clone() / p.clone();
    }
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * y.clone();
            }
        }
    }
    if !cost[c].is_zero() {
        let f = cost[c].clone();
        for (x, y) in cost.iter_mut().zip(&pivot_row) {
            *x = x.clone() - f.clone() * y.clone();
        }
    }
}

/// Checks `Aᵀy ≤ 0` and `bᵀy > 0` exactly.
pub fn is_farkas_certificate<T: LpScalar>(a: &[Vec<T>], b: &[T], y: &[T]) -> bool {
    let n = a.first().map_or(0, Vec::len);
    let pairing = b.iter().zip(y).fold(T::zero(), |acc, (bi, yi)| acc + bi.clone() * yi.clone());
    pairing.is_positive()
        && (0..n).all(|j| {
            let col = a.iter().zip(y).fold(T::zero(), |acc, (row, yi)| acc + row[j].clone() * yi.clone());
            !col.is_positive()
        })
}

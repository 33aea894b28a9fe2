/// Integers `a_k ∈ [lo_k, hi_k]` with `Σ a_k = total` minimizing the largest
/// deviation `|a_k - t_k|`; `None` when the bounds cannot meet the total.
pub(crate) fn round_with_sum(t: &[f64], total: i64, lo: &[i64], hi: &[i64]) -> Option<Vec<i64>> {
    if lo.iter().sum::<i64>() > total || hi.iter().sum::<i64>() < total {
        return None;
    }
    let mut a: Vec<i64> = t
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(&x, (&l, &h))| (x.round() as i64).clamp(l, h))
        .collect();
    let mut sum: i64 = a.iter().sum();
    while sum < total {
        // Raise the entry furthest below its target.
        let k = (0..a.len())
            .filter(|&k| a[k] < hi[k])
            .max_by(|&i, &j| (t[i] - a[i] as f64).total_cmp(&(t[j] - a[j] as f64)).then(j.cmp(&i)))?;
        a[k] += 1;
        sum += 1;
    }
    while sum > total {
        let k = (0..a.len())
            .filter(|&k| a[k] > lo[k])
            .max_by(|&i, &j| (a[i] as f64 - t[i]).total_cmp(&(a[j] as f64 - t[j])).then(j.cmp(&i)))?;
        a[k] -= 1;
        sum -= 1;
    }
    Some(a)
}

/// Counts `a_k ≥ 0` summing to `size` whose ratios `a_k / size` best match
/// `target`. With `nontrivial`, every count lies in `[1, size - 1]`.
pub(crate) fn round_fractions(target: &[f64], size: usize, nontrivial: bool) -> Option<(Vec<usize>, f64)> {
    let n = target.len();
    let s = size as i64;
    let (lo, hi) = if nontrivial && n > 1 { (vec![1; n], vec![s - 1; n]) } else { (vec![0; n], vec![s; n]) };
    let t: Vec<f64> = target.iter().map(|x| x * size as f64).collect();
    let a = round_with_sum(&t, s, &lo, &hi)?;
    let err = a
        .iter()
        .zip(target)
        .map(|(&c, &x)| (c as f64 / size as f64 - x).abs())
        .fold(0.0, f64::max);
    Some((a.into_iter().map(|c| c as usize).collect(), err))
}

/// Expands counts into a color list: `counts[k]` copies of `k`, in order.
pub(crate) fn colors_from_counts(counts: &[usize]) -> Vec<usize> {
    counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat(k).take(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_and_bounds_respected() {
        let a = round_with_sum(&[0.4, 0.4, 0.4, 1.8], 3, &[0; 4], &[3; 4]).unwrap();
        assert_eq!(a.iter().sum::<i64>(), 3);
        let worst = a.iter().zip([0.4, 0.4, 0.4, 1.8]).map(|(&x, t)| (x as f64 - t).abs()).fold(0.0, f64::max);
        assert!(worst <= 0.6 + 1e-12);
        assert!(round_with_sum(&[0.0, 0.0], 5, &[0, 0], &[2, 2]).is_none());
    }

    #[test]
    fn matches_exhaustive_minimum() {
        let t = [0.33, 1.27, 2.9, 0.5];
        let total = 5;
        let best = round_with_sum(&t, total, &[0; 4], &[5; 4]).unwrap();
        let err = |a: &[i64]| a.iter().zip(&t).map(|(&x, y)| (x as f64 - y).abs()).fold(0.0, f64::max);
        let mut brute = f64::INFINITY;
        for a in 0..=5i64 {
            for b in 0..=5 - a {
                for c in 0..=5 - a - b {
                    let d = 5 - a - b - c;
                    brute = brute.min(err(&[a, b, c, d]));
                }
            }
        }
        assert!((err(&best) - brute).abs() < 1e-12);
    }

    #[test]
    fn nontrivial_keeps_every_color() {
        let (a, _) = round_fractions(&[0.0, 1.0], 10, true).unwrap();
        assert_eq!(a, vec![1, 9]);
        assert_eq!(colors_from_counts(&[2, 0, 1]), vec![0, 0, 2]);
    }
}

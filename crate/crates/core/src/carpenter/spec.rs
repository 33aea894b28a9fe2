use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ENTRY_TOL: f64 = 1e-12;

/// Diagonal operator given by a finite head followed by a tail pattern
/// repeated forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSpec {
    pub head: Vec<Complex64>,
    pub tail_pattern: Vec<Complex64>,
}

impl DiagonalSpec {
    pub fn new(head: Vec<Complex64>, tail_pattern: Vec<Complex64>) -> Result<Self> {
        let spec = DiagonalSpec { head, tail_pattern };
        spec.validate()?;
        Ok(spec)
    }

    pub fn real(head: &[f64], tail_pattern: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(c(head), c(tail_pattern))
    }

    pub fn validate(&self) -> Result<()> {
        if self.tail_pattern.is_empty() {
            return Err(Error::InvalidInput("tail_pattern must be nonempty".into()));
        }
        if self.head.iter().chain(&self.tail_pattern).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("entries must be finite".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.tail_pattern.len()
    }

    /// Entry at coordinate `i` (0-based).
    pub fn value_at(&self, i: usize) -> Complex64 {
        if i < self.head.len() {
            self.head[i]
        } else {
            self.tail_pattern[(i - self.head.len()) % self.tail_pattern.len()]
        }
    }

    /// Head followed by cyclic repetitions of the tail pattern, `m` entries.
    pub fn truncate(&self, m: usize) -> Result<Vec<Complex64>> {
        if m < self.head.len() {
            return Err(Error::InvalidInput(format!("truncation {m} shorter than head {}", self.head.len())));
        }
        Ok((0..m).map(|i| self.value_at(i)).collect())
    }

    /// Distinct tail values in order of first appearance.
    pub fn essential_values(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for z in &self.tail_pattern {
            if !out.contains(z) {
                out.push(*z);
            }
        }
        out
    }
}

/// `n` diagonal specs of equal shape forming a partition of unity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPartitionSpec {
    pub specs: Vec<DiagonalSpec>,
}

/// Real tuples of a validated joint spec: `head[i][k]`, `tail[p][k]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct JointTuples {
    pub head: Vec<Vec<f64>>,
    pub tail: Vec<Vec<f64>>,
}

impl JointPartitionSpec {
    pub fn new(specs: Vec<DiagonalSpec>) -> Result<Self> {
        let j = JointPartitionSpec { specs };
        j.tuples()?;
        Ok(j)
    }

    pub fn count(&self) -> usize {
        self.specs.len()
    }

    pub fn head_len(&self) -> usize {
        self.specs.first().map_or(0, |s| s.head.len())
    }

    pub fn period(&self) -> usize {
        self.specs.first().map_or(0, |s| s.period())
    }

    pub(crate) fn tuples(&self) -> Result<JointTuples> {
        let bad = |m: String| Error::InfeasibleInput(m);
        let first = self.specs.first().ok_or_else(|| bad("no specs".into()))?;
        let (h, p) = (first.head.len(), first.tail_pattern.len());
        for s in &self.specs {
            s.validate()?;
            if s.head.len() != h || s.tail_pattern.len() != p {
                return Err(bad("specs must share head length and pattern length".into()));
            }
        }
        let real = |z: Complex64| -> Result<f64> {
            if z.im.abs() > ENTRY_TOL || z.re < -ENTRY_TOL || z.re > 1.0 + ENTRY_TOL {
                return Err(bad(format!("entry {z} is not a real number in [0, 1]")));
            }
            Ok(z.re.clamp(0.0, 1.0))
        };
        let gather = |idx: usize, tail: bool| -> Result<Vec<f64>> {
            let v: Vec<f64> = self
                .specs
                .iter()
                .map(|s| real(if tail { s.tail_pattern[idx] } else { s.head[idx] }))
                .collect::<Result<_>>()?;
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > ENTRY_TOL {
                return Err(bad(format!("entries at {} {idx} sum to {sum}", if tail { "pattern position" } else { "head index" })));
            }
            Ok(v)
        };
        Ok(JointTuples {
            head: (0..h).map(|i| gather(i, false)).collect::<Result<_>>()?,
            tail: (0..p).map(|i| gather(i, true)).collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn truncation_cycles_the_pattern() {
        let s = DiagonalSpec::real(&[9.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.truncate(6).unwrap(), vec![c(9.0), c(1.0), c(2.0), c(3.0), c(1.0), c(2.0)]);
        assert!(s.truncate(0).is_err());
        assert_eq!(s.value_at(100), c(1.0));
        assert_eq!(s.value_at(99), c(3.0));
    }

    #[test]
    fn essential_values_are_distinct_tail_entries() {
        let s = DiagonalSpec::real(&[5.0], &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.essential_values(), vec![c(1.0), c(2.0)]);
    }

    #[test]
    fn joint_validation() {
        let a = DiagonalSpec::real(&[0.25], &[0.5]).unwrap();
        let b = DiagonalSpec::real(&[0.75], &[0.5]).unwrap();
        assert!(JointPartitionSpec::new(vec![a.clone(), b.clone()]).is_ok());
        let bad = DiagonalSpec::real(&[0.7], &[0.5]).unwrap();
        assert!(JointPartitionSpec::new(vec![a.clone(), bad]).is_err());
        let short = DiagonalSpec::real(&[], &[0.5]).unwrap();
        assert!(JointPartitionSpec::new(vec![a, short]).is_err());
        assert!(DiagonalSpec::real(&[], &[]).is_err());
    }
}

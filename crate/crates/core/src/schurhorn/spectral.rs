use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Rational;

/// Normal operator on `ℓ²` with a finite list of finite-multiplicity
/// eigenvalues and a nonempty set of essential values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpectrum {
    /// `(λ, multiplicity)` pairs.
    #[serde(default)]
    pub finite_eigs: Vec<(Complex64, usize)>,
    pub essential: Vec<Complex64>,
}

impl DiscreteSpectrum {
    pub fn new(finite_eigs: Vec<(Complex64, usize)>, essential: Vec<Complex64>) -> Result<Self> {
        let s = DiscreteSpectrum { finite_eigs, essential };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.essential.is_empty() {
            return Err(Error::InvalidInput("essential spectrum must be nonempty".into()));
        }
        if self.finite_eigs.iter().any(|(_, m)| *m == 0) {
            return Err(Error::InvalidInput("multiplicities must be positive".into()));
        }
        if self.finite_eigs.iter().map(|p| p.0).chain(self.essential.iter().copied()).any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("spectral values must be finite".into()));
        }
        Ok(())
    }

    /// Every point of σ(N): finite eigenvalues followed by essential values.
    pub fn points(&self) -> Vec<Complex64> {
        self.finite_eigs.iter().map(|p| p.0).chain(self.essential.iter().copied()).collect()
    }

    /// Distinct essential values, in order of first appearance.
    pub fn essential_distinct(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for &z in &self.essential {
            if !out.contains(&z) {
                out.push(z);
            }
        }
        out
    }
}

/// Normal element of a II₁ factor with finite spectrum `{z_k}` and trace
/// weights `ω_k = τ(χ_{z_k}(N))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracialSpectrum {
    pub values: Vec<Complex64>,
    pub weights: Vec<Rational>,
}

impl TracialSpectrum {
    pub fn new(values: Vec<Complex64>, weights: Vec<Rational>) -> Result<Self> {
        let s = TracialSpectrum { values, weights };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.values.len() != self.weights.len() {
            return Err(Error::InvalidInput("values and weights must be nonempty and of equal length".into()));
        }
        if self.weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        if self.weights.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::InvalidInput("weights must sum to 1".into()));
        }
        if self.values.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("spectral values must be finite".into()));
        }
        Ok(())
    }

    /// `τ(N) = Σ ω_k z_k`.
    pub fn trace(&self) -> Complex64 {
        self.values.iter().zip(&self.weights).map(|(z, w)| z * w.to_f64()).sum()
    }
}

/// Either spectral model; the JSON shape selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectralData {
    Discrete(DiscreteSpectrum),
    Tracial(TracialSpectrum),
}

/// One block `β_j · P_j` of a target step diagonal, with `τ(P_j) = w_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetBlock {
    pub value: Complex64,
    pub weight: Rational,
}

impl TargetBlock {
    pub fn new(value: Complex64, weight: Rational) -> Self {
        TargetBlock { value, weight }
    }
}

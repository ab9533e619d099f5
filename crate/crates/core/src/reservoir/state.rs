use serde::{Deserialize, Serialize};

use crate::{Error, Result, MAX_EXACT_BITS};

const SUM_TOL: f64 = 1e-12;

/// Probability vector over the 2^n bitstrings; index = bitstring read as a
/// binary integer with bit `i` of the index holding bit `i` of the register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitstringDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl BitstringDistribution {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if n > MAX_EXACT_BITS {
            return Err(Error::ExactModeOverflow { n, max: MAX_EXACT_BITS });
        }
        if probs.len() != 1 << n {
            return Err(Error::InvalidDistribution(format!(
                "length {} for n = {n}, expected {}",
                probs.len(),
                1usize << n
            )));
        }
        let dist = Self { n, probs };
        dist.validate()?;
        Ok(dist)
    }

    pub fn point(n: usize, bitstring: usize) -> Result<Self> {
        if n > MAX_EXACT_BITS {
            return Err(Error::ExactModeOverflow { n, max: MAX_EXACT_BITS });
        }
        if bitstring >= 1 << n {
            return Err(Error::InvalidDistribution(format!("bitstring {bitstring} needs more than {n} bits")));
        }
        let mut probs = vec![0.0; 1 << n];
        probs[bitstring] = 1.0;
        Ok(Self { n, probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n > MAX_EXACT_BITS {
            return Err(Error::ExactModeOverflow { n, max: MAX_EXACT_BITS });
        }
        let d = 1usize << n;
        Ok(Self { n, probs: vec![1.0 / d as f64; d] })
    }

    pub(crate) fn from_raw(n: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), 1 << n);
        Self { n, probs }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((k, p)) = self.probs.iter().enumerate().find(|(_, p)| !(**p >= -SUM_TOL)) {
            return Err(Error::InvalidDistribution(format!("entry {k} is {p}")));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// Marginal probability that bit `bit` reads 1.
    pub fn bit_marginal(&self, bit: usize) -> f64 {
        self.probs.iter().enumerate().filter(|(k, _)| k >> bit & 1 == 1).map(|(_, p)| p).sum()
    }
}

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{oracle_threshold, NoiseModel};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignPolicy {
    /// Independent uniform signs.
    #[default]
    Rademacher,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PositionPolicy {
    /// Support drawn uniformly among all size-`s` subsets.
    #[default]
    Uniform,
    /// Support `{0, …, s-1}`.
    Leading,
}

/// A member of the class of `s`-sparse vectors whose nonzero magnitudes are
/// `a* + b_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    pub n: usize,
    pub s: usize,
    pub b: Vec<f64>,
    pub noise: NoiseModel,
    pub signs: SignPolicy,
    pub positions: PositionPolicy,
}

impl SignalConfig {
    pub fn new(n: usize, s: usize, b: Vec<f64>, noise: NoiseModel) -> Result<Self> {
        let cfg = Self {
            n,
            s,
            b,
            noise,
            signs: SignPolicy::default(),
            positions: PositionPolicy::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// All `s` signals share the offset `b`.
    pub fn constant(n: usize, s: usize, b: f64, noise: NoiseModel) -> Result<Self> {
        Self::new(n, s, vec![b; s], noise)
    }

    /// First `⌈s/2⌉` signals at offset `b1`, the rest at `b2`.
    pub fn two_group(n: usize, s: usize, b1: f64, b2: f64, noise: NoiseModel) -> Result<Self> {
        let first = s.div_ceil(2);
        let b = (0..s).map(|j| if j < first { b1 } else { b2 }).collect();
        Self::new(n, s, b, noise)
    }

    pub fn threshold(&self) -> Result<f64> {
        oracle_threshold(self.n, self.s, &self.noise)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 || self.s >= self.n {
            return domain(format!("need 1 <= s < n, got n={}, s={}", self.n, self.s));
        }
        if self.b.len() != self.s {
            return domain(format!("b has {} entries but s={}", self.b.len(), self.s));
        }
        let a = self.threshold()?;
        if let Some(bad) = self.b.iter().find(|b| !(a + **b > 0.0)) {
            return domain(format!("signal magnitude a*+b = {} is not positive (b={bad})", a + bad));
        }
        Ok(())
    }

    /// Magnitudes `a* + b_j`.
    pub fn magnitudes(&self) -> Result<Vec<f64>> {
        let a = self.threshold()?;
        Ok(self.b.iter().map(|b| a + b).collect())
    }

    /// Draw `(θ, X)` with `X = θ + ε`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
        let mags = self.magnitudes()?;
        let mut theta = vec![0.0; self.n];
        let support: Vec<usize> = match self.positions {
            PositionPolicy::Uniform => sample_indices(rng, self.n, self.s).into_vec(),
            PositionPolicy::Leading => (0..self.s).collect(),
        };
        for (&i, &m) in support.iter().zip(&mags) {
            theta[i] = match self.signs {
                SignPolicy::Rademacher if rng.random::<bool>() => -m,
                _ => m,
            };
        }
        let x = theta.iter().map(|t| t + self.noise.sample(rng)).collect();
        Ok((theta, x))
    }
}

use serde::{Deserialize, Serialize};

use crate::distributions::SlabSpec;
use crate::eb::beta_binomial_dim_prior;
use crate::error::{domain, Result};
use crate::stats::{ln_binomial, log_sum_exp};

/// Subset-selection prior on `ℝ^p`: dimension `k ~ π_p`, a uniform support
/// of size `k`, and i.i.d. slab values on the support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionPrior {
    /// Normalized `log π_p(k)`, `k = 0..=p`.
    pub dim_log_weights: Vec<f64>,
    pub slab: SlabSpec,
}

impl RegressionPrior {
    pub fn new(dim_log_weights: Vec<f64>, slab: SlabSpec) -> Result<Self> {
        if dim_log_weights.len() < 2 {
            return domain("dimension prior needs weights for k = 0..=p with p >= 1");
        }
        if dim_log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return domain("dimension log-weights must be finite or -inf");
        }
        let z = log_sum_exp(&dim_log_weights);
        if z == f64::NEG_INFINITY {
            return domain("dimension prior has no mass");
        }
        Ok(Self { dim_log_weights: dim_log_weights.into_iter().map(|w| w - z).collect(), slab })
    }

    /// `π_p` from `k | α ~ Bin(p, α)`, `α ~ Beta(1, p^u)`.
    pub fn beta_binomial(p: usize, u: f64, slab: SlabSpec) -> Result<Self> {
        Self::new(beta_binomial_dim_prior(p, 1.0, (p as f64).powf(u))?, slab)
    }

    pub fn p(&self) -> usize {
        self.dim_log_weights.len() - 1
    }

    /// `log w(k) = log π_p(k) - log C(p, k)`: the prior log-mass of one
    /// particular support of size `k`.
    pub fn log_support_weights(&self) -> Vec<f64> {
        let p = self.p();
        self.dim_log_weights
            .iter()
            .enumerate()
            .map(|(k, w)| w - ln_binomial(p, k))
            .collect()
    }

    /// Range `(min, max)` of `log(π_p(k)/π_p(k-1))` over `k = 1..=p`.
    pub fn log_ratio_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for pair in self.dim_log_weights.windows(2) {
            let r = pair[1] - pair[0];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }

    /// `A₁p^{-A₃} ≤ π_p(k)/π_p(k-1) ≤ A₂p^{-A₄}` for every `k ≥ 1`.
    pub fn satisfies_sandwich(&self, a1: f64, a2: f64, a3: f64, a4: f64) -> bool {
        let lp = (self.p() as f64).ln();
        let (lo, hi) = self.log_ratio_range();
        lo >= a1.ln() - a3 * lp - 1e-12 && hi <= a2.ln() - a4 * lp + 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_normalized() {
        let prior = RegressionPrior::beta_binomial(30, 2.0, SlabSpec::laplace(1.0).unwrap()).unwrap();
        let total: f64 = prior.dim_log_weights.iter().map(|w| w.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(prior.satisfies_sandwich(1.0, 1.0, 2.0, 1.0));
    }
}

//! Empirical-Bayes selection of the spike-and-slab weight and hierarchical
//! dimension priors.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::distributions::{ConvolvedMarginal, SlabSpec};
use crate::error::{domain, ensure_finite, Result};
use crate::stats::{ln_binomial, log_add_exp, log_sum_exp};

pub const MMLE_TOL: f64 = 1e-12;
pub const MMLE_MAX_ITER: usize = 200;

/// Marginal likelihood `α ↦ Σ log((1-α)φ(X_i) + αg(X_i)) - Σ log φ(X_i)`.
#[derive(Debug, Clone)]
pub struct MarginalLikelihood {
    pub slab: SlabSpec,
    /// `log(g/φ)(X_i)`.
    log_ratio: Vec<f64>,
}

impl MarginalLikelihood {
    pub fn new(x: &[f64], slab: SlabSpec) -> Result<Self> {
        if x.is_empty() {
            return domain("marginal likelihood needs at least one observation");
        }
        for &xi in x {
            ensure_finite(xi, "x")?;
        }
        let m = ConvolvedMarginal::new(slab);
        Ok(Self {
            slab,
            log_ratio: x.iter().map(|&xi| m.log_ratio(xi)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.log_ratio.len()
    }

    pub fn log_ratios(&self) -> &[f64] {
        &self.log_ratio
    }

    /// Product-prior ℓ-values `1 - a(X_i)` at weight `alpha`, reusing the
    /// cached ratios.
    pub fn l_values(&self, alpha: f64) -> Vec<f64> {
        if alpha <= 0.0 {
            return vec![1.0; self.n()];
        }
        if alpha >= 1.0 {
            return vec![0.0; self.n()];
        }
        let logit = alpha.ln() - (-alpha).ln_1p();
        self.log_ratio
            .iter()
            .map(|lr| 1.0 - 1.0 / (1.0 + (-(logit + lr)).exp()))
            .collect()
    }

    /// `β_i = g(X_i)/φ(X_i) - 1`, possibly `+∞` for extreme observations.
    pub fn betas(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_ratio.iter().map(|lr| lr.exp_m1())
    }

    /// `L(α) = Σ log(1 + αβ_i)`.
    pub fn log_likelihood(&self, alpha: f64) -> f64 {
        let la = alpha.ln();
        let lc = (-alpha).ln_1p();
        self.log_ratio.iter().map(|lr| log_add_exp(lc, la + lr)).sum()
    }

    /// Score `S(α) = Σ β_i / (1 + αβ_i)`, strictly decreasing in `α`.
    pub fn score(&self, alpha: f64) -> f64 {
        self.betas()
            .map(|b| if b == 0.0 { 0.0 } else { 1.0 / (alpha + 1.0 / b) })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmleFit {
    pub alpha: f64,
    pub log_likelihood: f64,
    /// Set when the score keeps one sign on the whole interval.
    pub boundary: Option<Boundary>,
    pub iterations: usize,
}

/// MMLE over `[1/n, 1]`.
pub fn mmle_alpha(ml: &MarginalLikelihood) -> Result<f64> {
    Ok(mmle_fit(ml, None)?.alpha)
}

/// MMLE over `interval` (default `[1/n, 1]`) by bisection on the score.
pub fn mmle_fit(ml: &MarginalLikelihood, interval: Option<(f64, f64)>) -> Result<MmleFit> {
    let (mut lo, mut hi) = interval.unwrap_or((1.0 / ml.n() as f64, 1.0));
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return domain(format!("MMLE interval [{lo}, {hi}] must lie in (0, 1]"));
    }
    let fit = |alpha: f64, boundary, iterations| MmleFit {
        alpha,
        log_likelihood: ml.log_likelihood(alpha),
        boundary,
        iterations,
    };
    let s_lo = ml.score(lo);
    let s_hi = ml.score(hi);
    if s_lo == 0.0 && s_hi == 0.0 {
        return Ok(fit(0.5 * (lo + hi), None, 0));
    }
    if s_lo <= 0.0 {
        return Ok(fit(lo, Some(Boundary::Lower), 0));
    }
    if s_hi >= 0.0 {
        return Ok(fit(hi, Some(Boundary::Upper), 0));
    }
    let mut iterations = 0;
    while hi - lo > MMLE_TOL && iterations < MMLE_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if ml.score(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(fit(0.5 * (lo + hi), None, iterations))
}

/// Normalized `log π(k)`, `k = 0..=n`, for `k | α ~ Bin(n, α)`, `α ~ Beta(a, b)`.
pub fn beta_binomial_dim_prior(n: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return domain(format!("beta parameters must be positive, got a={a}, b={b}"));
    }
    let base = ln_beta(a, b);
    let w: Vec<f64> = (0..=n)
        .map(|k| ln_binomial(n, k) + ln_beta(a + k as f64, b + (n - k) as f64) - base)
        .collect();
    let z = log_sum_exp(&w);
    Ok(w.into_iter().map(|v| v - z).collect())
}

/// Smallest `D` with `π(k) ≤ D π(k-1)` for all `k ≥ 1`, returned only when
/// `D < 1`.
pub fn exp_decrease_check(log_weights: &[f64]) -> Option<f64> {
    if log_weights.len() < 2 {
        return None;
    }
    let mut worst = f64::NEG_INFINITY;
    for pair in log_weights.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        if cur == f64::NEG_INFINITY {
            continue;
        }
        if prev == f64::NEG_INFINITY {
            return None;
        }
        worst = worst.max(cur - prev);
    }
    let d = worst.exp();
    (d < 1.0).then_some(d)
}

//! Conjugate (tempered) posteriors for Gaussian series priors in the
//! sequence model `X_k = θ_k + n^{-1/2} Z_k`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng::stream;
use crate::stats::{mean_and_se, norm_quantile};

/// Prior `θ_k ~ N(0, σ_k²)` independently, `σ_k² = k^{-1-2α}`, for
/// `k = 1..=K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPrior {
    pub alpha_prior: f64,
    pub truncation: usize,
}

impl SeriesPrior {
    pub fn new(alpha_prior: f64, truncation: usize) -> Result<Self> {
        if !(alpha_prior > 0.0 && alpha_prior.is_finite()) {
            return domain(format!("prior smoothness must be positive, got {alpha_prior}"));
        }
        if truncation == 0 {
            return domain("truncation must be at least 1");
        }
        Ok(Self { alpha_prior, truncation })
    }

    /// `σ_k²` for the 1-based frequency `k`.
    pub fn variance(&self, k: usize) -> f64 {
        (k as f64).powf(-1.0 - 2.0 * self.alpha_prior)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePosterior {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub alpha_temper: f64,
    pub n: usize,
}

fn check_temper(alpha_temper: f64) -> Result<()> {
    if alpha_temper > 0.0 && alpha_temper <= 1.0 {
        Ok(())
    } else {
        domain(format!("temper exponent must lie in (0,1], got {alpha_temper}"))
    }
}

/// `v_k = 1/(nα + σ_k⁻²)`, `m_k = nα X_k v_k`.
pub fn posterior_moments(
    x: &[f64],
    prior: &SeriesPrior,
    n: usize,
    alpha_temper: f64,
) -> Result<ConjugatePosterior> {
    if x.len() != prior.truncation {
        return domain(format!("expected {} observations, got {}", prior.truncation, x.len()));
    }
    if n == 0 {
        return domain("n must be at least 1");
    }
    check_temper(alpha_temper)?;
    let na = n as f64 * alpha_temper;
    let (means, variances) = x
        .iter()
        .enumerate()
        .map(|(i, &xk)| {
            let v = 1.0 / (na + 1.0 / prior.variance(i + 1));
            (na * xk * v, v)
        })
        .unzip();
    Ok(ConjugatePosterior { means, variances, alpha_temper, n })
}

/// Expected posterior spread `(a) = Σ v_k` and expected squared bias of the
/// posterior mean `(b) = Σ (σ_k⁻⁴θ₀ₖ² + n)/(n + σ_k⁻²)²` at `α = 1`.
pub fn risk_terms(theta0: &[f64], prior: &SeriesPrior, n: usize) -> Result<(f64, f64)> {
    if theta0.len() > prior.truncation {
        return domain("truth is longer than the prior truncation");
    }
    if n == 0 {
        return domain("n must be at least 1");
    }
    let nf = n as f64;
    let mut a = 0.0;
    let mut b = 0.0;
    for k in 1..=prior.truncation {
        let inv = 1.0 / prior.variance(k);
        let t = theta0.get(k - 1).copied().unwrap_or(0.0);
        a += 1.0 / (nf + inv);
        b += (inv * inv * t * t + nf) / (nf + inv).powi(2);
    }
    Ok((a, b))
}

/// Integral bound `Σ_{k>K} k^{-1-2β} ≤ K^{-2β}/(2β)` on the squared bias
/// contributed by truth coefficients `k^{-1/2-β}` above the truncation.
pub fn power_law_tail(beta: f64, truncation: usize) -> f64 {
    (truncation as f64).powf(-2.0 * beta) / (2.0 * beta)
}

/// Power-law truth, representer and prior for a linear functional
/// `ψ(f) = Σ a_k f_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSpec {
    /// `f₀ₖ = k^{-1/2-β}`.
    pub beta: f64,
    /// `a_k = k^{-1/2-μ}`.
    pub mu: f64,
    /// `λ_k = k^{-1-2γ}`.
    pub gamma: f64,
    /// Number of frequencies; `None` uses `K = n`.
    pub truncation: Option<usize>,
}

impl FunctionalSpec {
    pub fn new(beta: f64, mu: f64, gamma: f64, truncation: Option<usize>) -> Result<Self> {
        for (name, v) in [("beta", beta), ("mu", mu), ("gamma", gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        if truncation == Some(0) {
            return domain("truncation must be at least 1");
        }
        Ok(Self { beta, mu, gamma, truncation })
    }

    pub fn k_for(&self, n: usize) -> usize {
        self.truncation.unwrap_or(n).max(1)
    }

    pub fn truth(&self, k: usize) -> f64 {
        (k as f64).powf(-0.5 - self.beta)
    }

    pub fn representer(&self, k: usize) -> f64 {
        (k as f64).powf(-0.5 - self.mu)
    }

    pub fn prior_variance(&self, k: usize) -> f64 {
        (k as f64).powf(-1.0 - 2.0 * self.gamma)
    }

    /// `ψ(f₀)` over the first `K` frequencies plus an integral estimate of
    /// the remainder `∫_{K+1/2}^∞ x^{-1-β-μ} dx`.
    pub fn functional_of_truth(&self, truncation: usize) -> f64 {
        let head: f64 = (1..=truncation).map(|k| self.representer(k) * self.truth(k)).sum();
        let e = self.beta + self.mu;
        head + (truncation as f64 + 0.5).powf(-e) / e
    }
}

/// Center `Σ nαλ_k/(1+nαλ_k) a_k X_k` and standard deviation
/// `(Σ λ_k a_k²/(1+nαλ_k))^{1/2}` of the posterior of `ψ(f)`.
pub fn functional_posterior(
    x: &[f64],
    spec: &FunctionalSpec,
    n: usize,
    alpha_temper: f64,
) -> Result<(f64, f64)> {
    check_temper(alpha_temper)?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    let na = n as f64 * alpha_temper;
    let mut center = 0.0;
    let mut var = 0.0;
    for (i, &xk) in x.iter().enumerate() {
        let k = i + 1;
        let lam = spec.prior_variance(k);
        let a = spec.representer(k);
        let denom = 1.0 + na * lam;
        center += na * lam / denom * a * xk;
        var += lam * a * a / denom;
    }
    Ok((center, var.sqrt()))
}

/// Shift the quantile interval `(lo, hi]` to `center_bar` and shrink it by
/// `√α`.
pub fn shift_rescale_interval(center_bar: f64, lo: f64, hi: f64, alpha_temper: f64) -> Result<(f64, f64)> {
    if lo > hi {
        return domain(format!("interval endpoints out of order: {lo} > {hi}"));
    }
    check_temper(alpha_temper)?;
    let r = alpha_temper.sqrt();
    Ok((r * (lo - center_bar) + center_bar, r * (hi - center_bar) + center_bar))
}

/// Temper exponent as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum AlphaRule {
    Constant { value: f64 },
    /// `α_n = n^{-exponent} (log n)^{log_power}`, capped at 1.
    Power { exponent: f64, log_power: f64 },
}

impl AlphaRule {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            AlphaRule::Constant { value } => value,
            AlphaRule::Power { exponent, log_power } => {
                let nf = n as f64;
                (nf.powf(-exponent) * nf.ln().powf(log_power)).min(1.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub n: usize,
    pub alpha_n: f64,
    pub coverage: f64,
    pub std_error: f64,
    /// Width of the rescaled interval (identical across replicates).
    pub width: f64,
    pub replicates: usize,
}

/// Empirical coverage of the shift-and-rescale interval for `ψ(f₀)` at
/// nominal level `1 - delta`, one row per `n`.
pub fn coverage_mc(
    spec: &FunctionalSpec,
    ns: &[usize],
    rule: &AlphaRule,
    delta: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<CoverageRow>> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0,1), got {delta}"));
    }
    if replicates == 0 {
        return domain("replicates must be at least 1");
    }
    let z = norm_quantile(1.0 - delta / 2.0);
    ns.iter()
        .enumerate()
        .map(|(idx, &n)| {
            let alpha = rule.at(n);
            check_temper(alpha)?;
            let k = spec.k_for(n);
            let target = spec.functional_of_truth(k);
            let noise_sd = 1.0 / (n as f64).sqrt();
            let hits: Vec<(f64, f64)> = (0..replicates as u64)
                .into_par_iter()
                .map(|r| -> Result<(f64, f64)> {
                    let mut rng = stream(seed, ((idx as u64) << 32) | r);
                    let x: Vec<f64> = (1..=k)
                        .map(|j| spec.truth(j) + noise_sd * rng.sample::<f64, _>(StandardNormal))
                        .collect();
                    let (center, sd) = functional_posterior(&x, spec, n, alpha)?;
                    let (lo, hi) = shift_rescale_interval(center, center - z * sd, center + z * sd, alpha)?;
                    Ok((((lo < target) && (target <= hi)) as u8 as f64, hi - lo))
                })
                .collect::<Result<_>>()?;
            let cover: Vec<f64> = hits.iter().map(|h| h.0).collect();
            let (coverage, std_error) = mean_and_se(&cover);
            Ok(CoverageRow { n, alpha_n: alpha, coverage, std_error, width: hits[0].1, replicates })
        })
        .collect()
}

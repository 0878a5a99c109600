use serde::{Deserialize, Serialize};

use crate::distributions::SlabSpec;
use crate::error::{domain, Result};
use crate::stats::{norm_cdf, phi, LN_SQRT_2PI};

use super::design::RegressionInstance;
use super::prior::RegressionPrior;

/// Member of the mean-field family
/// `⊗_i (1-γ_i)δ₀ + γ_i N(μ_i, σ_i²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub gamma: Vec<f64>,
    pub mu: Vec<f64>,
    pub sd: Vec<f64>,
    /// ELBO after initialization and after every sweep.
    pub elbo_trace: Vec<f64>,
}

impl MeanFieldState {
    pub fn new(gamma: Vec<f64>, mu: Vec<f64>, sd: Vec<f64>) -> Result<Self> {
        let s = Self { gamma, mu, sd, elbo_trace: Vec::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn p(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.gamma.len();
        if self.mu.len() != p || self.sd.len() != p {
            return domain("gamma, mu and sd must have equal lengths");
        }
        if self.gamma.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return domain("inclusion probabilities must lie in [0,1]");
        }
        if self.mu.iter().any(|m| !m.is_finite()) {
            return domain("means must be finite");
        }
        if self.sd.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return domain("standard deviations must be positive and finite");
        }
        Ok(())
    }

    /// `E_Q θ_i = γ_i μ_i`.
    pub fn mean(&self) -> Vec<f64> {
        self.gamma.iter().zip(&self.mu).map(|(g, m)| g * m).collect()
    }

    /// `Var_Q θ_i = γ_i(μ_i² + σ_i²) - γ_i²μ_i²`.
    pub fn variance(&self) -> Vec<f64> {
        (0..self.p())
            .map(|i| {
                let (g, m, s) = (self.gamma[i], self.mu[i], self.sd[i]);
                g * (m * m + s * s) - g * g * m * m
            })
            .collect()
    }

    /// Coordinates reordered so that new coordinate `j` is old `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let pick = |v: &[f64]| perm.iter().map(|&j| v[j]).collect();
        Self {
            gamma: pick(&self.gamma),
            mu: pick(&self.mu),
            sd: pick(&self.sd),
            elbo_trace: self.elbo_trace.clone(),
        }
    }
}

/// `E|θ|` for `θ ~ N(μ, σ²)`.
pub fn gaussian_abs_mean(mu: f64, sd: f64) -> f64 {
    let z = mu / sd;
    2.0 * sd * phi(z) + mu * (2.0 * norm_cdf(z) - 1.0)
}

/// Distribution of `Σ_i B_i` for independent `B_i ~ Bernoulli(γ_i)`.
pub fn poisson_binomial_pmf(gamma: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; gamma.len() + 1];
    pmf[0] = 1.0;
    for (j, &g) in gamma.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - g) + pmf[k - 1] * g;
        }
        pmf[0] *= 1.0 - g;
    }
    pmf
}

/// Distribution of `Σ_{j≠i} B_j`.
pub fn poisson_binomial_pmf_excluding(gamma: &[f64], i: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; gamma.len()];
    pmf[0] = 1.0;
    let mut len = 0;
    for (j, &g) in gamma.iter().enumerate() {
        if j == i {
            continue;
        }
        len += 1;
        for k in (1..=len).rev() {
            pmf[k] = pmf[k] * (1.0 - g) + pmf[k - 1] * g;
        }
        pmf[0] *= 1.0 - g;
    }
    pmf
}

/// Bound on the factor by which [`deflate_pmf`] can amplify an existing
/// error in the pmf (in ℓ¹): `1/|1 - 2g|`.
pub fn deflation_amplification(g: f64) -> f64 {
    1.0 / (1.0 - 2.0 * g).abs()
}

/// Remove one Bernoulli(`g`) component from a Poisson-binomial pmf. The
/// recursion runs upward for `g ≤ 1/2` and downward otherwise, which keeps
/// the division by the larger of `g`, `1-g`.
pub fn deflate_pmf(pmf: &[f64], g: f64) -> Vec<f64> {
    let m = pmf.len() - 1;
    let mut out = vec![0.0; m];
    if m == 0 {
        return out;
    }
    if g <= 0.5 {
        let q = 1.0 - g;
        let mut prev = 0.0;
        for k in 0..m {
            let v = ((pmf[k] - g * prev) / q).max(0.0);
            out[k] = v;
            prev = v;
        }
    } else {
        let q = 1.0 - g;
        let mut next = 0.0;
        for k in (0..m).rev() {
            let v = ((pmf[k + 1] - q * next) / g).max(0.0);
            out[k] = v;
            next = v;
        }
    }
    out
}

/// Add one Bernoulli(`g`) component to a pmf.
pub fn inflate_pmf(pmf: &[f64], g: f64) -> Vec<f64> {
    let mut out = vec![0.0; pmf.len() + 1];
    for (k, &v) in pmf.iter().enumerate() {
        out[k] += v * (1.0 - g);
        out[k + 1] += v * g;
    }
    out
}

/// `E[f(R)]` over a pmf, treating `0·(-∞)` as zero.
pub(crate) fn expect(pmf: &[f64], f: &[f64]) -> f64 {
    pmf.iter()
        .zip(f)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, v)| p * v)
        .sum()
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// The three pieces of the ELBO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElboParts {
    /// `E_Q log p(Y | θ)`.
    pub expected_loglik: f64,
    /// `E_Q log π(θ)`, densities relative to `∏(δ₀ + Lebesgue)`.
    pub expected_log_prior: f64,
    /// `E_Q log q(θ)`.
    pub expected_log_q: f64,
}

impl ElboParts {
    pub fn elbo(&self) -> f64 {
        self.expected_loglik + self.expected_log_prior - self.expected_log_q
    }

    /// `K(Q, Π)`.
    pub fn kl_to_prior(&self) -> f64 {
        self.expected_log_q - self.expected_log_prior
    }
}

pub(crate) fn laplace_lambda(prior: &RegressionPrior) -> Result<f64> {
    match prior.slab {
        SlabSpec::Laplace { lambda } => Ok(lambda),
        SlabSpec::Cauchy { .. } => domain("mean-field updates require a Laplace slab"),
    }
}

/// `½[‖Y - Xm‖² + Σ‖X_i‖² Var_i]`, i.e. `E_Q ½‖Y - Xθ‖²`.
pub(crate) fn expected_half_rss(state: &MeanFieldState, instance: &RegressionInstance) -> f64 {
    let fit = instance.design.mul(&state.mean());
    let rss: f64 = instance.response.iter().zip(&fit).map(|(y, f)| (y - f).powi(2)).sum();
    let norms = instance.design.column_sq_norms();
    let spread: f64 = norms.iter().zip(state.variance()).map(|(n, v)| n * v).sum();
    0.5 * (rss + spread)
}

pub fn elbo_parts(
    state: &MeanFieldState,
    instance: &RegressionInstance,
    prior: &RegressionPrior,
) -> Result<ElboParts> {
    state.validate()?;
    if state.p() != instance.p() || prior.p() != instance.p() {
        return domain("state, instance and prior dimensions disagree");
    }
    let lambda = laplace_lambda(prior)?;
    let n = instance.n() as f64;
    let expected_loglik = -n * LN_SQRT_2PI - expected_half_rss(state, instance);

    let log_w = prior.log_support_weights();
    let pmf = poisson_binomial_pmf(&state.gamma);
    let mut expected_log_prior = expect(&pmf, &log_w);
    let mut expected_log_q = 0.0;
    let log_half_lambda = (0.5 * lambda).ln();
    for i in 0..state.p() {
        let (g, m, s) = (state.gamma[i], state.mu[i], state.sd[i]);
        expected_log_q += xlogx(g) + xlogx(1.0 - g);
        if g > 0.0 {
            expected_log_prior += g * (log_half_lambda - lambda * gaussian_abs_mean(m, s));
            expected_log_q += g * (-LN_SQRT_2PI - s.ln() - 0.5);
        }
    }
    Ok(ElboParts { expected_loglik, expected_log_prior, expected_log_q })
}

/// Evidence lower bound `E_Q log p(Y|θ) + E_Q log π(θ) - E_Q log q(θ)`.
pub fn elbo(state: &MeanFieldState, instance: &RegressionInstance, prior: &RegressionPrior) -> Result<f64> {
    Ok(elbo_parts(state, instance, prior)?.elbo())
}

/// `K(Q, Π) + E_Q K(P_θ₀, P_θ)` for the unit-variance Gaussian regression
/// likelihood, where `E_Q K = ½[‖X(m - θ₀)‖² + Σ‖X_i‖² Var_i]`.
pub fn kl_upper_bound(
    state: &MeanFieldState,
    instance: &RegressionInstance,
    prior: &RegressionPrior,
    theta0: &[f64],
) -> Result<f64> {
    if theta0.len() != instance.p() {
        return domain("truth length does not match the number of columns");
    }
    let parts = elbo_parts(state, instance, prior)?;
    let design = &instance.design;
    let diff: Vec<f64> = state.mean().iter().zip(theta0).map(|(m, t)| m - t).collect();
    let fit = design.mul(&diff);
    let norms = design.column_sq_norms();
    let spread: f64 = norms.iter().zip(state.variance()).map(|(n, v)| n * v).sum();
    let data_term = 0.5 * (fit.iter().map(|v| v * v).sum::<f64>() + spread);
    Ok(parts.kl_to_prior() + data_term)
}

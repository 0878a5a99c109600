use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::stats::{norm_cdf, phi, LN_SQRT_2PI};

use super::design::{dot, RegressionInstance};
use super::prior::RegressionPrior;
use super::state::{
    deflate_pmf, deflation_amplification, elbo, expect, gaussian_abs_mean, inflate_pmf,
    laplace_lambda, poisson_binomial_pmf, poisson_binomial_pmf_excluding, MeanFieldState,
};

pub const GAMMA_MIN: f64 = 1e-10;
pub const GAMMA_MAX: f64 = 1.0 - 1e-10;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 500;
/// Error growth allowed in the running dimension pmf before it is rebuilt.
const MAX_PMF_AMPLIFICATION: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum InitPolicy {
    /// Inclusion from the rank of `|X_iᵀY|` mapped linearly onto
    /// `[0.05, 0.5]`, means from unit-penalty ridge regression and
    /// `σ_i = (‖X_i‖² + λ²)^{-1/2}`.
    #[default]
    Screening,
    Given(MeanFieldState),
}

/// Ridge solution `(XᵀX + I)⁻¹XᵀY`, via the smaller of the two Gram systems.
pub fn ridge(instance: &RegressionInstance) -> Vec<f64> {
    let (n, p) = (instance.n(), instance.p());
    let x = DMatrix::from_column_slice(n, p, instance.design.as_slice());
    let y = DVector::from_column_slice(&instance.response);
    let sol = if p <= n {
        let gram = x.transpose() * &x + DMatrix::identity(p, p);
        gram.cholesky().expect("ridge Gram matrix is positive definite").solve(&(x.transpose() * y))
    } else {
        let gram = &x * x.transpose() + DMatrix::identity(n, n);
        x.transpose() * gram.cholesky().expect("ridge Gram matrix is positive definite").solve(&y)
    };
    sol.iter().copied().collect()
}

pub fn screening_init(instance: &RegressionInstance, prior: &RegressionPrior) -> Result<MeanFieldState> {
    let lambda = laplace_lambda(prior)?;
    let p = instance.p();
    let score: Vec<f64> = instance.design.tmul(&instance.response).iter().map(|v| v.abs()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    let mut gamma = vec![0.5; p];
    if p > 1 {
        for (rank, &i) in order.iter().enumerate() {
            gamma[i] = 0.05 + 0.45 * rank as f64 / (p - 1) as f64;
        }
    }
    let sd = instance
        .design
        .column_sq_norms()
        .iter()
        .map(|d| 1.0 / (d + lambda * lambda).sqrt())
        .collect();
    MeanFieldState::new(gamma, ridge(instance), sd)
}

/// Root of a decreasing function on `[lo, hi]` with `f(lo) ≥ 0 ≥ f(hi)`,
/// by Newton steps that fall back to bisection when they leave the bracket.
fn safeguarded_newton<F: Fn(f64) -> (f64, f64)>(f: F, mut lo: f64, mut hi: f64, start: f64) -> f64 {
    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    for _ in 0..100 {
        let (v, dv) = f(x);
        if v == 0.0 {
            return x;
        }
        if v > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / dv;
        let next = if dv < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-14 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Maximizer over `(μ, σ)` of
/// `μr - ½d(μ² + σ²) + log σ - λE|N(μ, σ²)|`, a jointly concave function,
/// by alternating exact 1-D maximizations.
pub fn optimize_slab(d: f64, r: f64, lambda: f64, mu0: f64, sd0: f64) -> (f64, f64) {
    let (mut mu, mut sd) = (mu0, sd0);
    for _ in 0..200 {
        let s = sd;
        let new_mu = safeguarded_newton(
            |m| {
                let z = m / s;
                (r - d * m - lambda * (2.0 * norm_cdf(z) - 1.0), -d - 2.0 * lambda * phi(z) / s)
            },
            (r - lambda) / d,
            (r + lambda) / d,
            mu,
        );
        let m = new_mu;
        let new_sd = safeguarded_newton(
            |s| {
                let z = m / s;
                let ph = phi(z);
                (
                    -d * s + 1.0 / s - 2.0 * lambda * ph,
                    -d - 1.0 / (s * s) - 2.0 * lambda * z * z * ph / s,
                )
            },
            1.0 / (d.sqrt() + lambda),
            1.0 / d.sqrt(),
            sd,
        );
        let done = (new_mu - mu).abs() <= 1e-13 * (1.0 + mu.abs())
            && (new_sd - sd).abs() <= 1e-13 * sd;
        mu = new_mu;
        sd = new_sd;
        if done {
            break;
        }
    }
    (mu, sd)
}

fn optimization_error(message: String, state: &MeanFieldState) -> Error {
    Error::Optimization { message, state: serde_json::to_string(state).ok() }
}

/// Coordinate-ascent maximization of the ELBO over the mean-field family.
///
/// Coordinates are visited in ascending order; each visit maximizes the ELBO
/// exactly over `(μ_i, σ_i, γ_i)` with the others held fixed, so the trace is
/// nondecreasing up to rounding.
pub fn cavi_fit(
    instance: &RegressionInstance,
    prior: &RegressionPrior,
    init: &InitPolicy,
    max_sweeps: usize,
    tol: f64,
) -> Result<MeanFieldState> {
    if max_sweeps == 0 {
        return domain("max_sweeps must be at least 1");
    }
    if !(tol > 0.0) {
        return domain(format!("tol must be positive, got {tol}"));
    }
    if prior.p() != instance.p() {
        return domain("prior dimension does not match the design");
    }
    let lambda = laplace_lambda(prior)?;
    let p = instance.p();
    let norms = instance.design.column_sq_norms();
    if norms.contains(&0.0) {
        return domain("design has an all-zero column");
    }
    let mut state = match init {
        InitPolicy::Screening => screening_init(instance, prior)?,
        InitPolicy::Given(s) => {
            if s.p() != p {
                return domain("initial state has the wrong dimension");
            }
            let mut s = s.clone();
            s.validate()?;
            s.elbo_trace.clear();
            s
        }
    };
    for g in state.gamma.iter_mut() {
        *g = g.clamp(GAMMA_MIN, GAMMA_MAX);
    }
    let log_w = prior.log_support_weights();
    let slab_const = LN_SQRT_2PI + 0.5 + (0.5 * lambda).ln();

    let mut current = elbo(&state, instance, prior)?;
    if !current.is_finite() {
        return Err(optimization_error(format!("initial ELBO is {current}"), &state));
    }
    state.elbo_trace.push(current);

    for sweep in 0..max_sweeps {
        let mut pmf = poisson_binomial_pmf(&state.gamma);
        // Repeated deflate/inflate cycles compound errors; rebuild the
        // leave-one-out pmf directly once the accumulated bound gets large.
        let mut amplification = 1.0;
        let fit = instance.design.mul(&state.mean());
        let mut resid: Vec<f64> = instance.response.iter().zip(&fit).map(|(y, f)| y - f).collect();
        for i in 0..p {
            let col = instance.design.column(i);
            let d = norms[i];
            let m_old = state.gamma[i] * state.mu[i];
            let r = dot(col, &resid) + d * m_old;
            let factor = deflation_amplification(state.gamma[i]);
            let loo = if amplification * factor <= MAX_PMF_AMPLIFICATION {
                amplification *= factor;
                deflate_pmf(&pmf, state.gamma[i])
            } else {
                amplification = 1.0;
                poisson_binomial_pmf_excluding(&state.gamma, i)
            };
            let delta = expect(&loo, &log_w[1..]) - expect(&loo, &log_w[..p]);
            let (mu, sd) = optimize_slab(d, r, lambda, state.mu[i], state.sd[i]);
            let slab_value = mu * r - 0.5 * d * (mu * mu + sd * sd) + sd.ln()
                - lambda * gaussian_abs_mean(mu, sd)
                + slab_const;
            let logit = slab_value + delta;
            let gamma = (1.0 / (1.0 + (-logit).exp())).clamp(GAMMA_MIN, GAMMA_MAX);
            state.mu[i] = mu;
            state.sd[i] = sd;
            state.gamma[i] = gamma;
            pmf = inflate_pmf(&loo, gamma);
            let step = gamma * mu - m_old;
            if step != 0.0 {
                for (e, x) in resid.iter_mut().zip(col) {
                    *e -= x * step;
                }
            }
        }
        let next = elbo(&state, instance, prior)?;
        if !next.is_finite() {
            return Err(optimization_error(
                format!("ELBO became {next} in sweep {}", sweep + 1),
                &state,
            ));
        }
        state.elbo_trace.push(next);
        let gain = next - current;
        current = next;
        if gain < tol {
            break;
        }
    }
    Ok(state)
}

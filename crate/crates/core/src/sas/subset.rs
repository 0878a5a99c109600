//! Exact ℓ-values under subset-selection priors.
//!
//! With dimension prior `π(k)` and a uniform support of size `k`, the
//! posterior over supports is `Π(S|X) ∝ w(|S|) ∏_{i∈S} r_i` with
//! `w(k) = π(k)/C(n,k)` and `r_i = g(X_i)/φ(X_i)`. Summing over supports
//! reduces to elementary symmetric polynomials `e_k(r)`, evaluated in log
//! space.

use serde::{Deserialize, Serialize};

use crate::distributions::{ConvolvedMarginal, SlabSpec};
use crate::error::{domain, ensure_finite, Result};
use crate::stats::{ln_binomial, log_add_exp, log_sub_exp, log_sum_exp};

/// Deflation is abandoned for a coordinate when a subtraction would cancel
/// more than this many decimal digits.
const MAX_DIGITS_LOST: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSelectionPrior {
    /// Unnormalized `log π(k)` for `k = 0..=n`.
    pub dim_log_weights: Vec<f64>,
    pub slab: SlabSpec,
}

impl SubsetSelectionPrior {
    pub fn new(dim_log_weights: Vec<f64>, slab: SlabSpec) -> Result<Self> {
        if dim_log_weights.is_empty() {
            return domain("dimension prior needs at least one weight");
        }
        if dim_log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return domain("dimension log-weights must be finite or -inf");
        }
        if dim_log_weights.iter().all(|w| *w == f64::NEG_INFINITY) {
            return domain("dimension prior has no mass");
        }
        Ok(Self { dim_log_weights, slab })
    }

    /// Number of coordinates `n`.
    pub fn n(&self) -> usize {
        self.dim_log_weights.len() - 1
    }

    /// Normalized `log π(k)`.
    pub fn normalized_log_weights(&self) -> Vec<f64> {
        let z = log_sum_exp(&self.dim_log_weights);
        self.dim_log_weights.iter().map(|w| w - z).collect()
    }

    pub fn expected_dimension(&self) -> f64 {
        self.normalized_log_weights()
            .iter()
            .enumerate()
            .map(|(k, lw)| k as f64 * lw.exp())
            .sum()
    }

    /// `min(n, 4·E[dim] + 50)`.
    pub fn default_k_max(&self) -> usize {
        let guess = (4.0 * self.expected_dimension()).ceil() as usize + 50;
        guess.min(self.n()).max(1)
    }

    /// Smallest `D < 1` with `π(k) ≤ D π(k-1)`, if any.
    pub fn decrease_constant(&self) -> Option<f64> {
        crate::eb::exp_decrease_check(&self.dim_log_weights)
    }
}

/// `log e_k(r)` for `k = 0..=k_max` given `log r`.
pub fn log_esp(log_r: &[f64], k_max: usize) -> Vec<f64> {
    let mut e = vec![f64::NEG_INFINITY; k_max + 1];
    e[0] = 0.0;
    for (j, &lr) in log_r.iter().enumerate() {
        let top = k_max.min(j + 1);
        for k in (1..=top).rev() {
            e[k] = log_add_exp(e[k], e[k - 1] + lr);
        }
    }
    e
}

/// Leave-one-out ESPs by forward deflation
/// `e_k(r_{-i}) = e_k(r) - r_i e_{k-1}(r_{-i})`; `None` on precision loss.
///
/// Each step inherits the error of the previous one amplified by
/// `r_i e_{k-1}(r_{-i}) / e_k(r_{-i})`, so the propagated relative error
/// bound is tracked (in log space) across `k`, not just per subtraction.
fn deflate(full: &[f64], lr: f64, remaining: usize) -> Option<Vec<f64>> {
    let log_eps = f64::EPSILON.ln();
    let limit = log_eps + MAX_DIGITS_LOST * std::f64::consts::LN_10;
    let mut out = vec![f64::NEG_INFINITY; full.len()];
    out[0] = 0.0;
    let mut log_err = log_eps;
    // e_k(r_{-i}) = 0 for k beyond the remaining n-1 coordinates
    for k in 1..full.len().min(remaining + 1) {
        let sub = lr + out[k - 1];
        if sub == f64::NEG_INFINITY {
            out[k] = full[k];
            log_err = log_eps;
            continue;
        }
        let value = log_sub_exp(full[k], sub);
        if value.is_nan() || value == f64::NEG_INFINITY {
            return None;
        }
        log_err = log_add_exp(full[k] + log_eps, sub + log_err) - value;
        if log_err > limit {
            return None;
        }
        out[k] = value;
    }
    Some(out)
}

/// Exact `Π[θ_i = 0 | X]` for every coordinate under `prior`, restricted to
/// supports of size at most `k_max`.
pub fn subset_selection_l_values(
    x: &[f64],
    prior: &SubsetSelectionPrior,
    k_max: usize,
) -> Result<Vec<f64>> {
    if k_max < 1 {
        return domain("k_max must be at least 1");
    }
    let n = x.len();
    if prior.n() != n {
        return domain(format!(
            "dimension prior covers n={} but {} observations were given",
            prior.n(),
            n
        ));
    }
    for &xi in x {
        ensure_finite(xi, "x")?;
    }
    let k_max = k_max.min(n);
    let marginal = ConvolvedMarginal::new(prior.slab);
    let log_r: Vec<f64> = x.iter().map(|&xi| marginal.log_ratio(xi)).collect();
    // log w(k) = log π(k) - log C(n,k), normalization irrelevant
    let log_w: Vec<f64> = (0..=k_max)
        .map(|k| prior.dim_log_weights[k] - ln_binomial(n, k))
        .collect();
    let full = log_esp(&log_r, k_max);

    let mut out = Vec::with_capacity(n);
    let mut scratch = Vec::with_capacity(n);
    for i in 0..n {
        let loo = match deflate(&full, log_r[i], n - 1) {
            Some(v) => v,
            None => {
                scratch.clear();
                scratch.extend(log_r.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v));
                log_esp(&scratch, k_max)
            }
        };
        // supports excluding i (size k) and including i (size k+1)
        let terms_a: Vec<f64> = (0..=k_max).map(|k| log_w[k] + loo[k]).collect();
        let terms_b: Vec<f64> = (0..k_max).map(|k| log_w[k + 1] + loo[k]).collect();
        let la = log_sum_exp(&terms_a);
        let lb = log_sum_exp(&terms_b);
        let l = if la == f64::NEG_INFINITY {
            0.0
        } else if lb == f64::NEG_INFINITY {
            1.0
        } else {
            1.0 / (1.0 + (log_r[i] + lb - la).exp())
        };
        out.push(l);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sas::{l_value, SasPrior};

    fn lap() -> SlabSpec {
        SlabSpec::laplace(1.0).unwrap()
    }

    #[test]
    fn esp_small_case() {
        let r = [2.0f64, 3.0, 5.0];
        let lr: Vec<f64> = r.iter().map(|v| v.ln()).collect();
        let e = log_esp(&lr, 3);
        let expect = [1.0, 10.0, 31.0, 30.0];
        for k in 0..4 {
            assert!((e[k].exp() - expect[k]).abs() < 1e-12 * expect[k]);
        }
    }

    #[test]
    fn single_coordinate_two_models() {
        let prior = SubsetSelectionPrior::new(vec![0.5f64.ln(), 0.5f64.ln()], lap()).unwrap();
        let x = 1.3;
        let m = ConvolvedMarginal::new(lap());
        let phi = crate::stats::phi(x);
        let want = phi / (phi + m.g(x));
        let got = subset_selection_l_values(&[x], &prior, 1).unwrap()[0];
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn binomial_prior_reproduces_product_prior() {
        let n = 30;
        let alpha: f64 = 0.2;
        let weights: Vec<f64> = (0..=n)
            .map(|k| ln_binomial(n, k) + k as f64 * alpha.ln() + (n - k) as f64 * (1.0 - alpha).ln())
            .collect();
        let prior = SubsetSelectionPrior::new(weights, lap()).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 5.0).collect();
        let got = subset_selection_l_values(&x, &prior, n).unwrap();
        let sas = SasPrior::new(alpha, lap()).unwrap();
        for (xi, gi) in x.iter().zip(&got) {
            assert!((gi - l_value(*xi, &sas).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let prior = SubsetSelectionPrior::new(vec![0.0, 0.0], lap()).unwrap();
        assert!(subset_selection_l_values(&[1.0], &prior, 0).is_err());
        assert!(subset_selection_l_values(&[1.0, 2.0], &prior, 1).is_err());
        assert!(subset_selection_l_values(&[f64::NAN], &prior, 1).is_err());
        assert!(SubsetSelectionPrior::new(vec![f64::NEG_INFINITY], lap()).is_err());
    }

    #[test]
    fn only_empty_model_gives_all_null() {
        let mut w = vec![f64::NEG_INFINITY; 4];
        w[0] = 0.0;
        let prior = SubsetSelectionPrior::new(w, lap()).unwrap();
        let l = subset_selection_l_values(&[5.0, 0.0, -9.0], &prior, 3).unwrap();
        assert_eq!(l, vec![1.0, 1.0, 1.0]);
    }
}

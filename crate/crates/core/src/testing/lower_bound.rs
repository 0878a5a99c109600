use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{oracle_threshold, NoiseModel};
use crate::error::{domain, Result};
use crate::rng::stream;
use crate::stats::log_sum_exp;

use super::RiskEstimate;

/// A draw from the block prior: `s` blocks of `⌊n/s⌋` consecutive
/// coordinates, one signal of size `a* + b` placed uniformly in each block,
/// and the leftover coordinates set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSample {
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub block_len: usize,
    /// Signal index within each block.
    pub positions: Vec<usize>,
    pub magnitude: f64,
}

pub fn block_prior_sample<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    b: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<BlockSample> {
    let magnitude = oracle_threshold(n, s, noise)? + b;
    let block_len = n / s;
    let mut theta = vec![0.0; n];
    let positions: Vec<usize> = (0..s).map(|_| rng.random_range(0..block_len)).collect();
    for (j, &p) in positions.iter().enumerate() {
        theta[j * block_len + p] = magnitude;
    }
    let x = theta.iter().map(|t| t + noise.sample(rng)).collect();
    Ok(BlockSample { theta, x, block_len, positions, magnitude })
}

/// Upper end `(n/2s) F̄(a* - δ) - 1` of the admissible range of `ρ`.
pub fn rho_upper_limit(n: usize, s: usize, noise: &NoiseModel, kappa: Option<f64>) -> Result<f64> {
    let ratio = n as f64 / s as f64;
    let a = oracle_threshold(n, s, noise)?;
    let delta = noise.delta_n(ratio, kappa)?;
    Ok(ratio / 2.0 * noise.sf(a - delta) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// Monte Carlo estimate of `M_ρ / s`.
    pub estimate: RiskEstimate,
    pub rho: f64,
    pub rho_upper_limit: f64,
    pub admissible: bool,
    /// Largest deviation from one of a block's posterior weight sum.
    pub max_normalization_error: f64,
}

/// Posterior probabilities `w_i` of "the signal of this block sits at `i`"
/// under the block prior: a softmax of `log f(x_i - a) - log f(x_i)`.
pub fn block_weights(x_block: &[f64], magnitude: f64, noise: &NoiseModel) -> Vec<f64> {
    let logits: Vec<f64> = x_block
        .iter()
        .map(|&xi| noise.log_density(xi - magnitude) - noise.log_density(xi))
        .collect();
    let z = log_sum_exp(&logits);
    logits.iter().map(|l| (l - z).exp()).collect()
}

/// `M_ρ / s` with `M_ρ = Σ_i P[θ_i ≠ 0, ℓ_i > ρ/(1+ρ)]` under the block
/// prior, where `ℓ_i = 1 - w_i`.
#[allow(clippy::too_many_arguments)]
pub fn bayes_lower_bound_mrho(
    n: usize,
    s: usize,
    b: f64,
    rho: f64,
    noise: &NoiseModel,
    kappa: Option<f64>,
    replicates: usize,
    seed: u64,
) -> Result<LowerBoundReport> {
    if !(rho >= 1.0) {
        return domain(format!("rho must be at least 1, got {rho}"));
    }
    if replicates == 0 {
        return domain("replicates must be at least 1");
    }
    let limit = rho_upper_limit(n, s, noise, kappa)?;
    let cut = rho / (1.0 + rho);
    let rows: Vec<(f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let mut rng = stream(seed, r);
            let draw = block_prior_sample(n, s, b, noise, &mut rng)?;
            let mut missed = 0usize;
            let mut worst = 0.0f64;
            for (j, &p) in draw.positions.iter().enumerate() {
                let start = j * draw.block_len;
                let w = block_weights(&draw.x[start..start + draw.block_len], draw.magnitude, noise);
                worst = worst.max((w.iter().sum::<f64>() - 1.0).abs());
                if 1.0 - w[p] > cut {
                    missed += 1;
                }
            }
            Ok((missed as f64 / s as f64, worst))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(LowerBoundReport {
        estimate: RiskEstimate::from_samples(&values, seed),
        rho,
        rho_upper_limit: limit,
        admissible: rho <= limit,
        max_normalization_error: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

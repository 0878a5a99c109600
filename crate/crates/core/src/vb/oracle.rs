//! Exact posterior over all `2^p` supports for small regression problems.
//!
//! For a support `S` the Gaussian part of the (possibly ρ-tempered)
//! likelihood integrates in closed form around the least-squares fit
//! `θ̂_S`; the remaining factor `E[∏_{j∈S} γ(θ_j)]` under
//! `N(θ̂_S, (ρX_SᵀX_S)⁻¹)` is estimated by Monte Carlo.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::SlabSpec;
use crate::error::{domain, Result};
use crate::rng::stream;
use crate::stats::{log_sum_exp, LN_SQRT_2PI};

use super::design::RegressionInstance;
use super::prior::RegressionPrior;

pub const MAX_ORACLE_P: usize = 12;
pub const MIN_MC_PER_SUBSET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub mc_per_subset: usize,
    pub seed: u64,
    /// Likelihood temper exponent `ρ ∈ (0, 1]`.
    pub rho: f64,
    /// Slab override (defaults to the prior's slab).
    pub slab: Option<SlabSpec>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { mc_per_subset: MIN_MC_PER_SUBSET, seed: 0, rho: 1.0, slab: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub log_marginal: f64,
    pub log_marginal_se: f64,
    pub inclusion_probs: Vec<f64>,
    pub inclusion_se: Vec<f64>,
    pub posterior_mean: Vec<f64>,
    pub mean_se: Vec<f64>,
}

/// Monte Carlo summaries for one support, with weights rescaled by
/// `exp(-shift)`.
struct SubsetSums {
    mask: usize,
    /// `log c_S + shift`: the deterministic log factor including the rescale.
    log_scale: f64,
    m: f64,
    sw: f64,
    sw2: f64,
    /// Per member of `S` in ascending index order.
    stw: Vec<f64>,
    st2w2: Vec<f64>,
    stw2: Vec<f64>,
}

fn members(mask: usize, p: usize) -> Vec<usize> {
    (0..p).filter(|j| mask >> j & 1 == 1).collect()
}

fn subset_sums(
    instance: &RegressionInstance,
    mask: usize,
    log_w: f64,
    slab: &SlabSpec,
    opts: &OracleOptions,
) -> Result<SubsetSums> {
    let n = instance.n();
    let rho = opts.rho;
    let y = DVector::from_column_slice(&instance.response);
    let yy = y.dot(&y);
    let base = log_w - rho * n as f64 * LN_SQRT_2PI;
    let idx = members(mask, instance.p());
    let k = idx.len();
    if k == 0 {
        return Ok(SubsetSums {
            mask,
            log_scale: base - 0.5 * rho * yy,
            m: 1.0,
            sw: 1.0,
            sw2: 1.0,
            stw: vec![],
            st2w2: vec![],
            stw2: vec![],
        });
    }
    let mut xs = DMatrix::zeros(n, k);
    for (c, &j) in idx.iter().enumerate() {
        xs.column_mut(c).copy_from_slice(instance.design.column(j));
    }
    let gram = xs.transpose() * &xs;
    let chol = gram
        .cholesky()
        .ok_or_else(|| crate::Error::Domain(format!("Gram matrix of support {idx:?} is singular")))?;
    let theta_hat = chol.solve(&(xs.transpose() * &y));
    let resid = &y - &xs * &theta_hat;
    let rss = resid.dot(&resid);
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let log_c = base - 0.5 * rho * rss + k as f64 * LN_SQRT_2PI
        - 0.5 * (k as f64 * rho.ln() + log_det);

    let l_t = chol.l().transpose();
    let scale = 1.0 / rho.sqrt();
    let mut rng = stream(opts.seed, mask as u64);
    let draws = opts.mc_per_subset;
    let mut thetas = Vec::with_capacity(draws * k);
    let mut log_ws = Vec::with_capacity(draws);
    let mut z = DVector::zeros(k);
    for _ in 0..draws {
        for v in z.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal) * scale;
        }
        let step = l_t.solve_upper_triangular(&z).expect("triangular factor is nonsingular");
        let mut lw = 0.0;
        for c in 0..k {
            let t = theta_hat[c] + step[c];
            lw += slab.log_density(t);
            thetas.push(t);
        }
        log_ws.push(lw);
    }
    let shift = log_ws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = SubsetSums {
        mask,
        log_scale: log_c + shift,
        m: draws as f64,
        sw: 0.0,
        sw2: 0.0,
        stw: vec![0.0; k],
        st2w2: vec![0.0; k],
        stw2: vec![0.0; k],
    };
    for (d, lw) in log_ws.iter().enumerate() {
        let w = (lw - shift).exp();
        s.sw += w;
        s.sw2 += w * w;
        for c in 0..k {
            let t = thetas[d * k + c];
            s.stw[c] += t * w;
            s.st2w2[c] += t * t * w * w;
            s.stw2[c] += t * w * w;
        }
    }
    Ok(s)
}

/// Log marginal likelihood, inclusion probabilities and posterior mean by
/// enumeration of every support, with delta-method Monte Carlo standard
/// errors.
pub fn enumeration_oracle(
    instance: &RegressionInstance,
    prior: &RegressionPrior,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    let p = instance.p();
    if p > MAX_ORACLE_P {
        return domain(format!("enumeration is limited to p <= {MAX_ORACLE_P}, got p={p}"));
    }
    if prior.p() != p {
        return domain("prior dimension does not match the design");
    }
    if opts.mc_per_subset < MIN_MC_PER_SUBSET {
        return domain(format!("mc_per_subset must be at least {MIN_MC_PER_SUBSET}"));
    }
    if !(opts.rho > 0.0 && opts.rho <= 1.0) {
        return domain(format!("rho must lie in (0,1], got {}", opts.rho));
    }
    let slab = opts.slab.unwrap_or(prior.slab);
    let log_w = prior.log_support_weights();
    let masks: Vec<usize> = (0..1usize << p)
        .filter(|m| log_w[m.count_ones() as usize] > f64::NEG_INFINITY)
        .collect();
    let sums: Vec<SubsetSums> = masks
        .par_iter()
        .map(|&mask| subset_sums(instance, mask, log_w[mask.count_ones() as usize], &slab, opts))
        .collect::<Result<_>>()?;

    // log Z_S = log_scale + log(mean rescaled weight)
    let log_z: Vec<f64> = sums.iter().map(|s| s.log_scale + (s.sw / s.m).ln()).collect();
    let total = log_sum_exp(&log_z);

    let mut incl = vec![0.0; p];
    let mut mean = vec![0.0; p];
    for (s, lz) in sums.iter().zip(&log_z) {
        let post = (lz - total).exp();
        for (c, j) in members(s.mask, p).into_iter().enumerate() {
            incl[j] += post;
            mean[j] += post * s.stw[c] / s.sw;
        }
    }

    let mut var_total = 0.0;
    let mut var_incl = vec![0.0; p];
    let mut var_mean = vec![0.0; p];
    for s in &sums {
        if s.m <= 1.0 || s.stw.is_empty() {
            continue;
        }
        let f = (s.log_scale - total).exp();
        let f2m = f * f / s.m;
        let ew = s.sw / s.m;
        let var_w = (s.sw2 / s.m - ew * ew).max(0.0);
        var_total += f2m * var_w;
        let idx = members(s.mask, p);
        for j in 0..p {
            let pos = idx.iter().position(|&v| v == j);
            let ind = pos.is_some() as u8 as f64;
            var_incl[j] += f2m * (ind - incl[j]).powi(2) * var_w;
            let mj = mean[j];
            let v = match pos {
                Some(c) => {
                    // Var(θW - m W) from the stored raw sums
                    let e2 = (s.st2w2[c] - 2.0 * mj * s.stw2[c] + mj * mj * s.sw2) / s.m;
                    let e1 = s.stw[c] / s.m - mj * ew;
                    (e2 - e1 * e1).max(0.0)
                }
                None => mj * mj * var_w,
            };
            var_mean[j] += f2m * v;
        }
    }
    Ok(OracleResult {
        log_marginal: total,
        log_marginal_se: var_total.sqrt(),
        inclusion_probs: incl,
        inclusion_se: var_incl.iter().map(|v| v.sqrt()).collect(),
        posterior_mean: mean,
        mean_se: var_mean.iter().map(|v| v.sqrt()).collect(),
    })
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eb::MarginalLikelihood;
use crate::error::{domain, Result};
use crate::rng::stream;
use crate::sas::SasPrior;
use crate::stats::mean_and_se;

use super::{losses, Procedure, SignalConfig};
use crate::distributions::NoiseModel;

/// Monte Carlo mean with its plug-in standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub mc_std_error: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl RiskEstimate {
    pub fn from_samples(values: &[f64], seed: u64) -> Self {
        let (mean, se) = mean_and_se(values);
        Self { mean, mc_std_error: se, replicates: values.len(), seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub fdr: RiskEstimate,
    pub fnr: RiskEstimate,
    /// `FDR + FNR`, estimated replicate-wise so its standard error is exact.
    pub total: RiskEstimate,
    /// Classification loss `(N_FP + N_FN)/s`.
    pub classification: RiskEstimate,
}

/// Per-replicate `(fdp, fnp, (N_FP + N_FN)/s)`.
fn replicate(config: &SignalConfig, procedure: &Procedure, seed: u64, r: u64) -> Result<[f64; 3]> {
    let mut rng = stream(seed, r);
    let (theta, x) = config.sample(&mut rng)?;
    let d = procedure.apply(&x, config.s, &config.noise)?;
    let l = losses(&d, &theta)?;
    Ok([l.fdp, l.fnp, l.classification() as f64 / config.s as f64])
}

/// FDR, FNR and classification risk of `procedure` at `config`.
///
/// Replicate `r` uses the stream `(seed, r)`, so the result does not depend
/// on how replicates are scheduled across threads.
pub fn risk_mc(
    config: &SignalConfig,
    procedure: &Procedure,
    replicates: usize,
    seed: u64,
) -> Result<RiskReport> {
    if replicates == 0 {
        return domain("replicates must be at least 1");
    }
    config.validate()?;
    let rows: Vec<[f64; 3]> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| replicate(config, procedure, seed, r))
        .collect::<Result<_>>()?;
    let col = |j: usize| rows.iter().map(|row| row[j]).collect::<Vec<_>>();
    let total: Vec<f64> = rows.iter().map(|row| row[0] + row[1]).collect();
    Ok(RiskReport {
        fdr: RiskEstimate::from_samples(&col(0), seed),
        fnr: RiskEstimate::from_samples(&col(1), seed),
        total: RiskEstimate::from_samples(&total, seed),
        classification: RiskEstimate::from_samples(&col(2), seed),
    })
}

/// Bayesian FDR of the fixed-weight ℓ-value procedure: `θ` is drawn from
/// the product prior itself, and the realized FDP is averaged over draws.
/// Returns one estimate per level in `levels`.
pub fn bayes_fdr_mc(
    n: usize,
    prior: &SasPrior,
    levels: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<RiskEstimate>> {
    if replicates == 0 || n == 0 {
        return domain("n and replicates must be at least 1");
    }
    if let Some(t) = levels.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return domain(format!("levels must lie in (0,1), got {t}"));
    }
    let rows: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let mut rng = stream(seed, r);
            let mut theta = vec![0.0; n];
            for t in theta.iter_mut() {
                if rand::Rng::random::<f64>(&mut rng) < prior.alpha {
                    *t = prior.slab.sample(&mut rng);
                }
            }
            let x: Vec<f64> = theta
                .iter()
                .map(|t| t + NoiseModel::Gaussian.sample(&mut rng))
                .collect();
            let l = MarginalLikelihood::new(&x, prior.slab)?.l_values(prior.alpha);
            Ok(levels
                .iter()
                .map(|&lev| {
                    let (mut disc, mut fp) = (0usize, 0usize);
                    for (li, ti) in l.iter().zip(&theta) {
                        if *li <= lev {
                            disc += 1;
                            fp += (*ti == 0.0) as usize;
                        }
                    }
                    fp as f64 / disc.max(1) as f64
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..levels.len())
        .map(|j| RiskEstimate::from_samples(&rows.iter().map(|row| row[j]).collect::<Vec<_>>(), seed))
        .collect())
}

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Reject/accept decision per coordinate (`true` = reject `H₀: θ_i = 0`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionVector {
    pub decisions: Vec<bool>,
}

impl DecisionVector {
    pub fn none(n: usize) -> Self {
        Self { decisions: vec![false; n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Self {
        Self { decisions: (0..n).map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn n_rejections(&self) -> usize {
        self.decisions.iter().filter(|d| **d).count()
    }

    /// Indices of rejected hypotheses.
    pub fn rejected(&self) -> Vec<usize> {
        self.decisions
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.then_some(i))
            .collect()
    }
}

/// Realized losses of one decision vector against a truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub n_fp: usize,
    pub n_fn: usize,
    pub n_discoveries: usize,
    pub n_signals: usize,
    pub fdp: f64,
    pub fnp: f64,
}

impl LossReport {
    /// Classification loss `N_FP + N_FN`.
    pub fn classification(&self) -> usize {
        self.n_fp + self.n_fn
    }

    pub fn n_tp(&self) -> usize {
        self.n_discoveries - self.n_fp
    }
}

pub fn losses(decisions: &DecisionVector, theta: &[f64]) -> Result<LossReport> {
    if decisions.len() != theta.len() {
        return domain(format!(
            "decision length {} does not match truth length {}",
            decisions.len(),
            theta.len()
        ));
    }
    let (mut n_fp, mut n_fn, mut n_disc, mut n_sig) = (0, 0, 0, 0);
    for (&d, &t) in decisions.decisions.iter().zip(theta) {
        let signal = t != 0.0;
        n_disc += d as usize;
        n_sig += signal as usize;
        n_fp += (d && !signal) as usize;
        n_fn += (!d && signal) as usize;
    }
    Ok(LossReport {
        n_fp,
        n_fn,
        n_discoveries: n_disc,
        n_signals: n_sig,
        fdp: n_fp as f64 / n_disc.max(1) as f64,
        fnp: n_fn as f64 / n_sig.max(1) as f64,
    })
}

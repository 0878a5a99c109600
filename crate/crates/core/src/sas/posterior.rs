//! Exact per-coordinate spike-and-slab posterior in the sequence model
//! `X_i = θ_i + ε_i`, `ε_i ~ N(0,1)`.
//!
//! Under the prior `(1-α)δ₀ + αΓ` the posterior of `θ_i` is
//! `(1-a(x))δ₀ + a(x) G_x`, where `G_x` has density `φ(x-u)γ(u)/g(x)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distributions::quadrature::{integrate, Tolerance};
use crate::distributions::{ConvolvedMarginal, SlabSpec};
use crate::error::{domain, ensure_finite, Error, Result};
use crate::stats::{log_add_exp, log_norm_cdf, log_norm_sf, log_phi};

/// Maximum proposals tried by the Cauchy-slab rejection sampler.
pub const REJECTION_CAP: usize = 1_000_000;

/// Spike-and-slab prior `(1-α)δ₀ + αΓ`, applied independently per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SasPrior {
    pub alpha: f64,
    pub slab: SlabSpec,
}

impl SasPrior {
    pub fn new(alpha: f64, slab: SlabSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return domain(format!("alpha must lie in [0,1], got {alpha}"));
        }
        Ok(Self { alpha, slab })
    }

    pub fn marginal(&self) -> ConvolvedMarginal {
        ConvolvedMarginal::new(self.slab)
    }

    /// Log posterior odds of the slab against the spike at `x`.
    fn log_odds(&self, x: f64) -> f64 {
        self.alpha.ln() - (-self.alpha).ln_1p() + self.marginal().log_ratio(x)
    }
}

/// The slab component `G_x` of the coordinate posterior.
#[derive(Debug, Clone, Copy)]
pub enum SlabPosterior {
    /// Two truncated normals: `N(x-λ,1)` on `(0,∞)` with probability
    /// `p_pos`, and `N(x+λ,1)` on `(-∞,0)` otherwise.
    Laplace { p_pos: f64, m_pos: f64, m_neg: f64 },
    /// Density evaluated pointwise; moments and CDF by quadrature.
    Cauchy { x: f64, slab: SlabSpec, log_g: f64 },
}

impl SlabPosterior {
    pub fn new(x: f64, slab: SlabSpec) -> Self {
        match slab {
            SlabSpec::Laplace { lambda } => {
                let m_pos = x - lambda;
                let m_neg = x + lambda;
                let lw_pos = -lambda * x + log_norm_cdf(m_pos);
                let lw_neg = lambda * x + log_norm_sf(m_neg);
                let p_pos = (lw_pos - log_add_exp(lw_pos, lw_neg)).exp();
                SlabPosterior::Laplace { p_pos, m_pos, m_neg }
            }
            SlabSpec::Cauchy { .. } => SlabPosterior::Cauchy {
                x,
                slab,
                log_g: ConvolvedMarginal::new(slab).log_g(x),
            },
        }
    }

    /// Density `γ_x(u)`.
    pub fn density(&self, u: f64) -> f64 {
        match *self {
            SlabPosterior::Laplace { p_pos, m_pos, m_neg } => {
                if u > 0.0 {
                    p_pos * (log_phi(u - m_pos) - log_norm_cdf(m_pos)).exp()
                } else if u < 0.0 {
                    (1.0 - p_pos) * (log_phi(u - m_neg) - log_norm_sf(m_neg)).exp()
                } else {
                    // the density has a jump at zero; use the average
                    0.5 * (self.density(f64::MIN_POSITIVE) + self.density(-f64::MIN_POSITIVE))
                }
            }
            SlabPosterior::Cauchy { x, slab, log_g } => {
                (log_phi(x - u) + slab.log_density(u) - log_g).exp()
            }
        }
    }

    /// `G_x((-∞, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            SlabPosterior::Laplace { p_pos, m_pos, m_neg } => {
                if t < 0.0 {
                    (1.0 - p_pos) * (log_norm_cdf(t - m_neg) - log_norm_sf(m_neg)).exp()
                } else {
                    let pos = 1.0 - (log_norm_sf(t - m_pos) - log_norm_cdf(m_pos)).exp();
                    (1.0 - p_pos) + p_pos * pos
                }
            }
            SlabPosterior::Cauchy { x, .. } => {
                let tol = Tolerance::default();
                let f = |u: f64| self.density(u);
                if t <= x {
                    integrate(f, f64::NEG_INFINITY, t, tol).value.clamp(0.0, 1.0)
                } else {
                    (1.0 - integrate(f, t, f64::INFINITY, tol).value).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// `(E U, E (U-c)²)` under `G_x`.
    pub fn moments(&self, about: f64) -> (f64, f64) {
        match *self {
            SlabPosterior::Laplace { p_pos, m_pos, m_neg } => {
                let h_pos = (log_phi(m_pos) - log_norm_cdf(m_pos)).exp();
                let h_neg = (log_phi(m_neg) - log_norm_sf(m_neg)).exp();
                let e1_pos = m_pos + h_pos;
                let e2_pos = 1.0 + m_pos * m_pos + m_pos * h_pos;
                let e1_neg = m_neg - h_neg;
                let e2_neg = 1.0 + m_neg * m_neg - m_neg * h_neg;
                let p_neg = 1.0 - p_pos;
                let mean = p_pos * e1_pos + p_neg * e1_neg;
                let pos_c = e2_pos - 2.0 * about * e1_pos + about * about;
                let neg_c = e2_neg - 2.0 * about * e1_neg + about * about;
                (mean, p_pos * pos_c + p_neg * neg_c)
            }
            SlabPosterior::Cauchy { x, .. } => {
                let tol = Tolerance::default();
                let piecewise = |f: &dyn Fn(f64) -> f64| {
                    integrate(f, f64::NEG_INFINITY, x, tol).value
                        + integrate(f, x, f64::INFINITY, tol).value
                };
                let mean = piecewise(&|u| u * self.density(u));
                let second = piecewise(&|u| (u - about).powi(2) * self.density(u));
                (mean, second)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match *self {
            SlabPosterior::Laplace { p_pos, m_pos, m_neg } => {
                if rng.random::<f64>() < p_pos {
                    // U = m + Z with Z > -m
                    Ok(m_pos + truncated_std_normal_above(-m_pos, rng))
                } else {
                    // U = m - Z with Z > m
                    Ok(m_neg - truncated_std_normal_above(m_neg, rng))
                }
            }
            SlabPosterior::Cauchy { x, slab, .. } => {
                let log_peak = slab.log_density(0.0);
                for _ in 0..REJECTION_CAP {
                    let z: f64 = rng.sample(StandardNormal);
                    let u = x + z;
                    let accept = (slab.log_density(u) - log_peak).exp();
                    if rng.random::<f64>() < accept {
                        return Ok(u);
                    }
                }
                Err(Error::Sampler(format!(
                    "rejection sampler exceeded {REJECTION_CAP} proposals at x={x}"
                )))
            }
        }
    }
}

/// Draw `Z ~ N(0,1)` conditioned on `Z > a`.
fn truncated_std_normal_above<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a <= 0.5 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z > a {
                return z;
            }
        }
    }
    // exponential proposal with the optimal rate
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = -rng.random::<f64>().ln() / rate;
        let z = a + e;
        let log_accept = -0.5 * (z - rate).powi(2);
        if rng.random::<f64>().ln() < log_accept {
            return z;
        }
    }
}

/// Exact posterior of one coordinate.
#[derive(Debug, Clone, Copy)]
pub struct CoordinatePosterior {
    pub x: f64,
    /// Posterior slab weight `a(x)`.
    pub a: f64,
    pub slab_component: SlabPosterior,
}

impl CoordinatePosterior {
    pub fn new(x: f64, prior: &SasPrior) -> Result<Self> {
        Ok(Self {
            x,
            a: posterior_weight(x, prior)?,
            slab_component: SlabPosterior::new(x, prior.slab),
        })
    }

    pub fn l_value(&self) -> f64 {
        1.0 - self.a
    }

    /// Posterior CDF of `θ`, including the atom at zero.
    pub fn cdf(&self, t: f64) -> f64 {
        let atom = if t >= 0.0 { 1.0 - self.a } else { 0.0 };
        atom + self.a * self.slab_component.cdf(t)
    }

    pub fn moments(&self, about: f64) -> (f64, f64) {
        if self.a == 0.0 {
            return (0.0, about * about);
        }
        let (m, s) = self.slab_component.moments(about);
        (self.a * m, (1.0 - self.a) * about * about + self.a * s)
    }

    /// Median of the mixture `(1-a)δ₀ + aG_x`.
    pub fn median(&self) -> f64 {
        if self.a == 0.0 {
            return 0.0;
        }
        let below = self.a * self.slab_component.cdf(0.0);
        if below >= 0.5 {
            let target = 0.5 / self.a;
            return bisect_increasing(|t| self.slab_component.cdf(t), target, self.x, false);
        }
        if (1.0 - self.a) + below >= 0.5 {
            return 0.0;
        }
        let target = (0.5 - (1.0 - self.a)) / self.a;
        bisect_increasing(|t| self.slab_component.cdf(t), target, self.x, true)
    }
}

/// Solve `cdf(t) = target` on `t > 0` (or `t < 0`) by bracketing and
/// bisection.
fn bisect_increasing<F: Fn(f64) -> f64>(cdf: F, target: f64, hint: f64, positive: bool) -> f64 {
    let (mut lo, mut hi) = if positive {
        let mut hi = hint.abs().max(1.0);
        while cdf(hi) < target {
            hi *= 2.0;
        }
        (0.0, hi)
    } else {
        let mut lo = -hint.abs().max(1.0);
        while cdf(lo) > target {
            lo *= 2.0;
        }
        (lo, 0.0)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Posterior slab weight `a(x) = αg(x) / ((1-α)φ(x) + αg(x))`.
pub fn posterior_weight(x: f64, prior: &SasPrior) -> Result<f64> {
    ensure_finite(x, "x")?;
    if prior.alpha == 0.0 {
        return Ok(0.0);
    }
    if prior.alpha == 1.0 {
        return Ok(1.0);
    }
    let z = prior.log_odds(x);
    Ok(1.0 / (1.0 + (-z).exp()))
}

/// ℓ-value `Π[θ_i = 0 | X]` under a product spike-and-slab prior.
pub fn l_value(x: f64, prior: &SasPrior) -> Result<f64> {
    Ok(1.0 - posterior_weight(x, prior)?)
}

/// `(E[θ|x], E[(θ-about)²|x])`.
pub fn coordinate_moments(x: f64, prior: &SasPrior, about: f64) -> Result<(f64, f64)> {
    ensure_finite(about, "about")?;
    Ok(CoordinatePosterior::new(x, prior)?.moments(about))
}

pub fn posterior_median(x: f64, prior: &SasPrior) -> Result<f64> {
    check_interior(prior)?;
    Ok(CoordinatePosterior::new(x, prior)?.median())
}

/// `t(α) = inf{x > 0 : posterior median at x is > 0}`.
pub fn median_threshold(prior: &SasPrior) -> Result<f64> {
    check_interior(prior)?;
    // the median is positive iff the mass at or below zero is < 1/2
    let mass_at_or_below_zero = |x: f64| -> f64 {
        let post = CoordinatePosterior::new(x, prior).expect("finite x");
        post.cdf(0.0) - 0.5
    };
    let mut hi = 1.0;
    while mass_at_or_below_zero(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return domain("median threshold not bracketed");
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass_at_or_below_zero(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One draw from the coordinate posterior.
pub fn sample_coordinate<R: Rng + ?Sized>(x: f64, prior: &SasPrior, rng: &mut R) -> Result<f64> {
    let a = posterior_weight(x, prior)?;
    if a == 0.0 || rng.random::<f64>() >= a {
        return Ok(0.0);
    }
    SlabPosterior::new(x, prior.slab).sample(rng)
}

fn check_interior(prior: &SasPrior) -> Result<()> {
    if prior.alpha > 0.0 && prior.alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("median threshold needs 0 < alpha < 1, got {}", prior.alpha))
    }
}

use crate::distributions::quadrature::{integrate, Tolerance};
use crate::distributions::SlabSpec;
use crate::error::{ensure_finite, Result};
use crate::stats::{log_add_exp, log_norm_cdf, log_norm_sf, log_phi};

/// Half-width of the region around `x` integrated directly for Cauchy slabs;
/// the remaining tails go through the `tan` map.
const CORE_HALF_WIDTH: f64 = 12.0;

/// The convolution `g = γ ∗ φ` of a slab with standard Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolvedMarginal {
    pub slab: SlabSpec,
}

impl ConvolvedMarginal {
    pub fn new(slab: SlabSpec) -> Self {
        Self { slab }
    }

    /// `log g(x)`.
    pub fn log_g(&self, x: f64) -> f64 {
        match self.slab {
            SlabSpec::Laplace { lambda } => laplace_log_g(x, lambda),
            SlabSpec::Cauchy { .. } => cauchy_g(x, &self.slab).ln(),
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        self.log_g(x).exp()
    }

    /// `log(g(x)/φ(x))`.
    pub fn log_ratio(&self, x: f64) -> f64 {
        self.log_g(x) - log_phi(x)
    }

    /// Upper survival `∫_t^∞ g`.
    pub fn sf(&self, t: f64) -> f64 {
        integrate(|y| self.g(y), t, f64::INFINITY, Tolerance::default()).value
    }
}

/// `g(x) = ∫ φ(x-u) γ(u) du`.
pub fn marginal_g(x: f64, slab: &SlabSpec) -> Result<f64> {
    ensure_finite(x, "x")?;
    Ok(ConvolvedMarginal::new(*slab).g(x))
}

/// Closed form for the Laplace slab:
/// `g(x) = (λ/2) e^{λ²/2} [e^{-λx} Φ(x-λ) + e^{λx} Φ̄(x+λ)]`.
fn laplace_log_g(x: f64, lambda: f64) -> f64 {
    let x = x.abs();
    let upper = -lambda * x + log_norm_cdf(x - lambda);
    let lower = lambda * x + log_norm_sf(x + lambda);
    (0.5 * lambda).ln() + 0.5 * lambda * lambda + log_add_exp(upper, lower)
}

fn cauchy_g(x: f64, slab: &SlabSpec) -> f64 {
    let x = x.abs();
    let f = |u: f64| (log_phi(x - u) + slab.log_density(u)).exp();
    let tol = Tolerance::default();
    let lo = x - CORE_HALF_WIDTH;
    let hi = x + CORE_HALF_WIDTH;
    // split at the slab mode when it falls inside the core
    let core = if lo < 0.0 && 0.0 < hi {
        integrate(f, lo, 0.0, tol).value + integrate(f, 0.0, hi, tol).value
    } else {
        integrate(f, lo, hi, tol).value
    };
    core + integrate(f, f64::NEG_INFINITY, lo, tol).value + integrate(f, hi, f64::INFINITY, tol).value
}

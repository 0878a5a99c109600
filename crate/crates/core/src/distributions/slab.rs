use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Slab distribution of a spike-and-slab prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlabSpec {
    /// Density `(λ/2) exp(-λ|u|)`.
    Laplace { lambda: f64 },
    /// Density `λ / (π (λ² + u²))`.
    Cauchy { lambda: f64 },
}

impl SlabSpec {
    pub fn laplace(lambda: f64) -> Result<Self> {
        check_scale(lambda)?;
        Ok(SlabSpec::Laplace { lambda })
    }

    pub fn cauchy(lambda: f64) -> Result<Self> {
        check_scale(lambda)?;
        Ok(SlabSpec::Cauchy { lambda })
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            SlabSpec::Laplace { lambda } | SlabSpec::Cauchy { lambda } => lambda,
        }
    }

    pub fn log_density(&self, u: f64) -> f64 {
        match *self {
            SlabSpec::Laplace { lambda } => (0.5 * lambda).ln() - lambda * u.abs(),
            SlabSpec::Cauchy { lambda } => {
                lambda.ln() - std::f64::consts::PI.ln() - (lambda * lambda + u * u).ln()
            }
        }
    }

    pub fn density(&self, u: f64) -> f64 {
        self.log_density(u).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SlabSpec::Laplace { lambda } => {
                let e: f64 = rng.sample(Exp1);
                if rng.random::<bool>() {
                    e / lambda
                } else {
                    -e / lambda
                }
            }
            SlabSpec::Cauchy { lambda } => {
                let u: f64 = rng.random();
                lambda * (std::f64::consts::PI * (u - 0.5)).tan()
            }
        }
    }

    /// Parse `laplace:1.5` / `cauchy` style descriptors.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, scale) = match text.split_once(':') {
            Some((k, v)) => {
                let v: f64 = v.trim().parse().map_err(|_| {
                    crate::Error::Domain(format!("bad slab scale in '{text}'"))
                })?;
                (k.trim(), v)
            }
            None => (text.trim(), 1.0),
        };
        match kind.to_ascii_lowercase().as_str() {
            "laplace" => Self::laplace(scale),
            "cauchy" => Self::cauchy(scale),
            other => domain(format!("unknown slab '{other}' (expected laplace or cauchy)")),
        }
    }
}

impl std::fmt::Display for SlabSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlabSpec::Laplace { lambda } => write!(f, "laplace:{lambda}"),
            SlabSpec::Cauchy { lambda } => write!(f, "cauchy:{lambda}"),
        }
    }
}

fn check_scale(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        domain(format!("slab scale must be positive and finite, got {lambda}"))
    }
}

use crate::distributions::NoiseModel;
use crate::error::{domain, Result};

/// `Λ_n(b) = s⁻¹ Σ_j F̄(b_j)`.
pub fn lambda_boundary(b: &[f64], noise: &NoiseModel) -> Result<f64> {
    if b.is_empty() {
        return domain("b must be nonempty");
    }
    if b.iter().any(|v| v.is_nan()) {
        return domain("b contains NaN");
    }
    Ok(b.iter().map(|&bj| noise.sf(bj)).sum::<f64>() / b.len() as f64)
}

/// `(κ, τ)` with `√κ = (√r - β/√r)/2` and `τ = (√r - √κ)√(2 log n)`.
///
/// `r = β` gives `κ = 0`; `r < β` would make `√κ` negative and is rejected.
pub fn kappa_tau(r: f64, beta: f64, n: usize) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return domain(format!("beta must be positive, got {beta}"));
    }
    if !(r >= beta && r.is_finite()) {
        return domain(format!("r must be at least beta, got r={r}, beta={beta}"));
    }
    if n < 2 {
        return domain("n must be at least 2");
    }
    let sr = r.sqrt();
    let sqrt_kappa = 0.5 * (sr - beta / sr);
    let tau = (sr - sqrt_kappa) * (2.0 * (n as f64).ln()).sqrt();
    Ok((sqrt_kappa * sqrt_kappa, tau))
}

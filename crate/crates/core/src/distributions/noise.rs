use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{domain, Result};
use crate::stats;

/// Standardized symmetric noise density.
///
/// `Subbotin(ζ)` has density proportional to `exp(-|x|^ζ/ζ)`; `ζ = 2` is the
/// standard Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    Gaussian,
    Subbotin { zeta: f64 },
}

impl NoiseModel {
    pub fn subbotin(zeta: f64) -> Result<Self> {
        if !(zeta.is_finite() && zeta > 1.0) {
            return domain(format!("Subbotin shape must be > 1, got {zeta}"));
        }
        Ok(NoiseModel::Subbotin { zeta })
    }

    /// `log c_ζ` with `c_ζ = 1 / (2 ζ^{1/ζ-1} Γ(1/ζ))`.
    fn log_norm_const(zeta: f64) -> f64 {
        -(2.0f64.ln() + (1.0 / zeta - 1.0) * zeta.ln() + ln_gamma(1.0 / zeta))
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian => stats::log_phi(x),
            NoiseModel::Subbotin { zeta } => Self::log_norm_const(zeta) - x.abs().powf(zeta) / zeta,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// Upper survival `F̄(x) = P(ε > x)`.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian => stats::norm_sf(x),
            NoiseModel::Subbotin { zeta } => {
                let t = x.abs().powf(zeta) / zeta;
                let upper = if t == 0.0 { 0.5 } else { 0.5 * gamma_ur(1.0 / zeta, t) };
                if x >= 0.0 {
                    upper
                } else {
                    1.0 - upper
                }
            }
        }
    }

    pub fn log_sf(&self, x: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian => stats::log_norm_sf(x),
            NoiseModel::Subbotin { .. } => self.sf(x).ln(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sf(-x)
    }

    /// `F̄⁻¹(p)`: the point with upper-tail mass `p`.
    pub fn sf_inverse(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("tail probability must lie in (0,1), got {p}"));
        }
        match *self {
            NoiseModel::Gaussian => Ok(-stats::norm_quantile(p)),
            NoiseModel::Subbotin { .. } => {
                let (mut lo, mut hi) = (-1.0, 1.0);
                while self.sf(lo) < p {
                    lo *= 2.0;
                }
                while self.sf(hi) > p {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.sf(mid) > p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-14 * (1.0 + mid.abs()) {
                        break;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Gaussian => rng.sample(StandardNormal),
            NoiseModel::Subbotin { zeta } => {
                // |ε|^ζ/ζ ~ Gamma(1/ζ, 1)
                let g: f64 = Gamma::new(1.0 / zeta, 1.0).expect("valid shape").sample(rng);
                let mag = (zeta * g).powf(1.0 / zeta);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
        }
    }

    /// Oracle threshold `a*` as a function of the ratio `n/s`.
    pub fn oracle_threshold_ratio(&self, ratio: f64) -> Result<f64> {
        if !(ratio > 1.0) {
            return domain(format!("n/s must exceed 1, got {ratio}"));
        }
        let l = ratio.ln();
        Ok(match *self {
            NoiseModel::Gaussian => (2.0 * l).sqrt(),
            NoiseModel::Subbotin { zeta } => (zeta * l).powf(1.0 / zeta),
        })
    }

    /// Window width `δ_n`. Gaussian uses `(log(n/s))^{-1/4}`; Subbotin uses
    /// `(log(n/s))^{-κ}` with caller-chosen `κ ∈ (0, 1 - 1/ζ)`.
    pub fn delta_n(&self, ratio: f64, kappa: Option<f64>) -> Result<f64> {
        if !(ratio > 1.0) {
            return domain(format!("n/s must exceed 1, got {ratio}"));
        }
        let l = ratio.ln();
        match *self {
            NoiseModel::Gaussian => Ok(l.powf(-kappa.unwrap_or(0.25))),
            NoiseModel::Subbotin { zeta } => {
                let kappa = kappa.unwrap_or(0.5 * (1.0 - 1.0 / zeta));
                if !(kappa > 0.0 && kappa < 1.0 - 1.0 / zeta) {
                    return domain(format!("kappa must lie in (0, 1-1/zeta), got {kappa}"));
                }
                Ok(l.powf(-kappa))
            }
        }
    }
}

/// `a*_n` for `n` coordinates of which `s` are signals.
pub fn oracle_threshold(n: usize, s: usize, noise: &NoiseModel) -> Result<f64> {
    if s == 0 || s >= n {
        return domain(format!("oracle threshold needs 1 <= s < n, got n={n}, s={s}"));
    }
    noise.oracle_threshold_ratio(n as f64 / s as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::quadrature::{integrate, Tolerance};

    fn models() -> Vec<NoiseModel> {
        vec![
            NoiseModel::Gaussian,
            NoiseModel::subbotin(1.5).unwrap(),
            NoiseModel::subbotin(2.0).unwrap(),
            NoiseModel::subbotin(3.0).unwrap(),
        ]
    }

    #[test]
    fn gaussian_peak() {
        let v = NoiseModel::Gaussian.density(0.0);
        assert!((v - (2.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn densities_symmetric_and_normalized() {
        for m in models() {
            for &x in &[0.3, 1.7, 4.2] {
                assert_eq!(m.density(x), m.density(-x));
            }
            let total = integrate(|x| m.density(x), f64::NEG_INFINITY, f64::INFINITY, Tolerance::default());
            assert!((total.value - 1.0).abs() < 1e-9, "{m:?}: {}", total.value);
        }
    }

    #[test]
    fn survival_matches_quadrature_and_is_decreasing() {
        for m in models() {
            let mut prev = 1.0;
            for i in -40..=40 {
                let x = i as f64 * 0.2;
                let s = m.sf(x);
                assert!(s <= prev);
                if s > 1e-300 && prev < 1.0 {
                    assert!(s < prev, "{m:?} x={x}");
                }
                prev = s;
            }
            for &x in &[-1.3, 0.0, 0.8, 2.5] {
                let q = integrate(|u| m.density(u), x, f64::INFINITY, Tolerance::default());
                assert!((q.value - m.sf(x)).abs() < 1e-9, "{m:?} x={x}");
            }
            assert!(m.sf(-60.0) > 1.0 - 1e-12 && m.sf(60.0) < 1e-12);
        }
    }

    #[test]
    fn subbotin_two_is_gaussian() {
        let s = NoiseModel::subbotin(2.0).unwrap();
        for &x in &[-2.0, 0.0, 0.5, 3.0] {
            assert!((s.density(x) - NoiseModel::Gaussian.density(x)).abs() < 1e-14);
            // incomplete-gamma route vs erfc route
            assert!((s.sf(x) - NoiseModel::Gaussian.sf(x)).abs() < 1e-10 * NoiseModel::Gaussian.sf(x));
        }
    }

    #[test]
    fn quantiles_invert_survival() {
        for m in models() {
            for &p in &[1e-6, 0.01, 0.3, 0.5, 0.9] {
                let x = m.sf_inverse(p).unwrap();
                assert!((m.sf(x) - p).abs() < 1e-10 * p.max(1e-3), "{m:?} p={p}");
            }
        }
    }

    #[test]
    fn likelihood_ratio_monotone() {
        for m in models() {
            for &a in &[0.5, 2.0, 4.0] {
                let mut prev = f64::NEG_INFINITY;
                for i in -200..=200 {
                    let x = i as f64 * 0.05;
                    let lr = m.log_density(x - a) - m.log_density(x);
                    assert!(lr >= prev - 1e-12, "{m:?} a={a} x={x}");
                    prev = lr;
                }
            }
        }
    }

    #[test]
    fn oracle_threshold_examples() {
        let e = std::f64::consts::E;
        let g = NoiseModel::Gaussian.oracle_threshold_ratio(e).unwrap();
        assert!((g - 2f64.sqrt()).abs() < 1e-15);
        let s2 = NoiseModel::subbotin(2.0).unwrap().oracle_threshold_ratio(e).unwrap();
        assert!((s2 - 2f64.sqrt()).abs() < 1e-15);
        let near = oracle_threshold(1_000_000, 999_999, &NoiseModel::Gaussian).unwrap();
        assert!(near > 0.0 && near < 2e-3);
        assert!(oracle_threshold(10, 10, &NoiseModel::Gaussian).is_err());
        assert!(oracle_threshold(10, 11, &NoiseModel::Gaussian).is_err());
    }

    #[test]
    fn subbotin_delta_window() {
        let m = NoiseModel::subbotin(1.5).unwrap();
        assert!(m.delta_n(100.0, Some(0.5)).is_err());
        assert!(m.delta_n(100.0, Some(0.2)).is_ok());
    }
}

//! Reference computations shared by the integration tests. Nothing here
//! calls into the library's own quadrature or special functions.
#![allow(dead_code)]

use spikeslab::distributions::SlabSpec;

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Composite Simpson rule with `m` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let m = m + m % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Simpson over `[a, b]` split at the given interior breakpoints.
pub fn simpson_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], m: usize) -> f64 {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    pts.windows(2).map(|w| simpson(&f, w[0], w[1], m)).sum()
}

pub fn slab_density(slab: &SlabSpec, u: f64) -> f64 {
    match *slab {
        SlabSpec::Laplace { lambda } => 0.5 * lambda * (-lambda * u.abs()).exp(),
        SlabSpec::Cauchy { lambda } => lambda / (std::f64::consts::PI * (lambda * lambda + u * u)),
    }
}

/// Window of `u` outside which `φ(x - u)` is below 1e-300.
pub fn window(x: f64) -> (f64, f64) {
    (x - 38.0, x + 38.0)
}

/// `∫ (u - about)^k φ(x - u) γ(u) du`.
pub fn slab_moment(x: f64, slab: &SlabSpec, about: f64, k: i32) -> f64 {
    let (a, b) = window(x);
    simpson_split(|u| (u - about).powi(k) * phi(x - u) * slab_density(slab, u), a, b, &[0.0, x], 20_000)
}

/// `g(x) = ∫ φ(x - u) γ(u) du`.
pub fn g_oracle(x: f64, slab: &SlabSpec) -> f64 {
    slab_moment(x, slab, 0.0, 0)
}

/// Posterior slab weight from the two-point mixture.
pub fn weight_oracle(x: f64, alpha: f64, slab: &SlabSpec) -> f64 {
    let g = g_oracle(x, slab);
    alpha * g / (alpha * g + (1.0 - alpha) * phi(x))
}

/// Posterior CDF of `θ` at `t`, including the atom at zero.
pub fn cdf_oracle(x: f64, alpha: f64, slab: &SlabSpec, t: f64) -> f64 {
    let a = weight_oracle(x, alpha, slab);
    let g = g_oracle(x, slab);
    let (lo, hi) = window(x);
    let mass = if t <= lo {
        0.0
    } else {
        simpson_split(|u| phi(x - u) * slab_density(slab, u), lo, t.min(hi), &[0.0, x], 20_000) / g
    };
    let atom = if t >= 0.0 { 1.0 - a } else { 0.0 };
    atom + a * mass
}

/// Median of the posterior by bisection on the oracle CDF.
pub fn median_oracle(x: f64, alpha: f64, slab: &SlabSpec) -> f64 {
    let (mut lo, mut hi) = window(x);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cdf_oracle(x, alpha, slab, mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Normal density with mean `m` and standard deviation `s`.
pub fn normal_pdf(u: f64, m: f64, s: f64) -> f64 {
    phi((u - m) / s) / s
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

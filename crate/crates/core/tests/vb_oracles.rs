mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spikeslab::distributions::SlabSpec;
use spikeslab::vb::{
    cavi_fit, elbo, enumeration_oracle, generate_design, kl_upper_bound, Design, InitPolicy, MeanFieldState,
    OracleOptions, RegressionInstance, RegressionPrior,
};

fn lap() -> SlabSpec {
    SlabSpec::laplace(1.0).unwrap()
}

fn sparse_truth(p: usize, s: usize, mag: f64) -> Vec<f64> {
    let mut t = vec![0.0; p];
    for j in 0..s {
        t[j * (p / s.max(1))] = if j % 2 == 0 { mag } else { -mag };
    }
    t
}

fn instance(n: usize, p: usize, s: usize, mag: f64, seed: u64) -> RegressionInstance {
    let design = generate_design(n, p, seed).unwrap();
    RegressionInstance::simulate(design, &sparse_truth(p, s, mag), seed + 1).unwrap()
}

#[test]
fn elbo_never_decreases_across_sweeps() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..20 {
        let n = rng.random_range(20..120);
        let p = rng.random_range(5..150);
        let s = rng.random_range(0..6).min(p);
        let inst = instance(n, p, s, rng.random_range(0.5..5.0), seed);
        let prior = RegressionPrior::beta_binomial(p, 2.0, lap()).unwrap();
        let st = cavi_fit(&inst, &prior, &InitPolicy::Screening, 500, 1e-8).unwrap();
        let worst = st.elbo_trace.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        assert!(worst >= -1e-9, "n={n} p={p}: {worst}");
    }
}

#[test]
fn restart_from_fixed_point_gains_nothing() {
    let inst = instance(80, 40, 3, 3.0, 5);
    let prior = RegressionPrior::beta_binomial(40, 2.0, lap()).unwrap();
    let st = cavi_fit(&inst, &prior, &InitPolicy::Screening, 2000, 1e-10).unwrap();
    let again = cavi_fit(&inst, &prior, &InitPolicy::Given(st.clone()), 1, 1e-10).unwrap();
    let gain = again.elbo_trace[1] - again.elbo_trace[0];
    assert!(gain.abs() < 1e-8, "{gain}");
}

#[test]
fn permuting_columns_permutes_the_fit() {
    let inst = instance(120, 10, 3, 3.0, 9);
    let prior = RegressionPrior::beta_binomial(10, 2.0, lap()).unwrap();
    let perm = [3, 7, 0, 9, 1, 4, 8, 2, 6, 5];
    let permuted = RegressionInstance::new(inst.design.permute_columns(&perm), inst.response.clone()).unwrap();
    let a = cavi_fit(&inst, &prior, &InitPolicy::Screening, 5000, 1e-13).unwrap();
    let b = cavi_fit(&permuted, &prior, &InitPolicy::Screening, 5000, 1e-13).unwrap();
    for (j, &src) in perm.iter().enumerate() {
        assert!((b.gamma[j] - a.gamma[src]).abs() < 1e-5);
        assert!((b.mu[j] - a.mu[src]).abs() < 1e-5);
        assert!((b.sd[j] - a.sd[src]).abs() < 1e-5);
    }
    // the objective itself is exactly symmetric
    let pa = a.permute(&perm);
    let (e1, e2) = (elbo(&a, &inst, &prior).unwrap(), elbo(&pa, &permuted, &prior).unwrap());
    assert!((e1 - e2).abs() < 1e-10 * e1.abs().max(1.0));
}

#[test]
fn empty_model_elbo_is_null_likelihood_plus_prior() {
    let inst = instance(30, 6, 2, 2.0, 3);
    let prior = RegressionPrior::beta_binomial(6, 2.0, lap()).unwrap();
    let st = MeanFieldState::new(vec![0.0; 6], vec![0.3; 6], vec![0.5; 6]).unwrap();
    let y2: f64 = inst.response.iter().map(|y| y * y).sum();
    let want = -(30.0 * (2.0 * std::f64::consts::PI).ln() / 2.0) - 0.5 * y2 + prior.dim_log_weights[0];
    assert!((elbo(&st, &inst, &prior).unwrap() - want).abs() < 1e-9);
}

#[test]
fn orthogonal_design_factorizes_into_scalar_problems() {
    // identity design: Y_i = θ_i + ε_i, binomial(2, α) dimension prior
    let alpha: f64 = 0.3;
    let design = Design::from_columns(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let y = vec![2.2, -0.4];
    let inst = RegressionInstance::new(design, y.clone()).unwrap();
    let w = vec![(1.0 - alpha).powi(2).ln(), (2.0 * alpha * (1.0 - alpha)).ln(), alpha.powi(2).ln()];
    let prior = RegressionPrior::new(w, lap()).unwrap();
    let opts = OracleOptions { mc_per_subset: 200_000, seed: 1, ..Default::default() };
    let o = enumeration_oracle(&inst, &prior, &opts).unwrap();
    for i in 0..2 {
        let want = common::weight_oracle(y[i], alpha, &lap());
        assert!((o.inclusion_probs[i] - want).abs() <= 3.0 * o.inclusion_se[i] + 1e-12, "i={i}");
        let g = common::g_oracle(y[i], &lap());
        let mean = want * common::slab_moment(y[i], &lap(), 0.0, 1) / g;
        assert!((o.posterior_mean[i] - mean).abs() <= 3.0 * o.mean_se[i] + 1e-12, "i={i}");
    }
}

#[test]
fn oracle_under_empty_only_prior() {
    let inst = instance(20, 4, 1, 3.0, 2);
    let mut w = vec![f64::NEG_INFINITY; 5];
    w[0] = 0.0;
    let prior = RegressionPrior::new(w, lap()).unwrap();
    let o = enumeration_oracle(&inst, &prior, &OracleOptions::default()).unwrap();
    assert!(o.inclusion_probs.iter().all(|v| *v == 0.0));
    assert!(o.posterior_mean.iter().all(|v| *v == 0.0));
}

#[test]
fn vb_agrees_with_enumeration_on_small_problems() {
    for seed in 0..3 {
        let inst = instance(50, 10, 2, 3.0 * (2.0 * 10f64.ln()).sqrt(), 100 + seed);
        let prior = RegressionPrior::beta_binomial(10, 2.0, lap()).unwrap();
        let st = cavi_fit(&inst, &prior, &InitPolicy::Screening, 500, 1e-8).unwrap();
        let o = enumeration_oracle(&inst, &prior, &OracleOptions { seed, ..Default::default() }).unwrap();
        let linf = st.gamma.iter().zip(&o.inclusion_probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let l2: f64 =
            st.mean().iter().zip(&o.posterior_mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(linf <= 0.15 && l2 <= 0.2, "seed {seed}: {linf} {l2}");
        assert!(*st.elbo_trace.last().unwrap() <= o.log_marginal + 3.0 * o.log_marginal_se);
    }
}

#[test]
fn oracle_standard_errors_shrink_with_draws() {
    // weak signals keep the importance weights, and so the errors, non-trivial
    let inst = instance(30, 6, 2, 0.6, 7);
    let prior = RegressionPrior::beta_binomial(6, 2.0, lap()).unwrap();
    let base = OracleOptions::default().mc_per_subset;
    let se = |m: usize| {
        let o = enumeration_oracle(&inst, &prior, &OracleOptions { mc_per_subset: m, seed: 3, ..Default::default() })
            .unwrap();
        o.mean_se.iter().sum::<f64>()
    };
    let ratio = se(base) / se(4 * base);
    assert!((ratio - 2.0).abs() <= 0.6, "ratio {ratio}");
}

#[test]
fn point_mass_at_truth_leaves_only_the_prior_term() {
    let p = 8;
    let theta0 = sparse_truth(p, 2, 2.0);
    let inst = instance(40, p, 2, 2.0, 6);
    let prior = RegressionPrior::beta_binomial(p, 2.0, lap()).unwrap();
    let gamma: Vec<f64> = theta0.iter().map(|t| if *t != 0.0 { 1.0 } else { 0.0 }).collect();
    let st = MeanFieldState::new(gamma, theta0.clone(), vec![1e-7; p]).unwrap();
    let bound = kl_upper_bound(&st, &inst, &prior, &theta0).unwrap();
    let parts = spikeslab::vb::elbo_parts(&st, &inst, &prior).unwrap();
    assert!((bound - parts.kl_to_prior()).abs() < 1e-8);
}

#[test]
fn beta_binomial_prior_satisfies_ratio_sandwich() {
    for p in [50usize, 200, 800] {
        let prior = RegressionPrior::beta_binomial(p, 2.0, lap()).unwrap();
        assert!(prior.satisfies_sandwich(1.0, 1.0, 2.0, 1.0), "p={p}");
    }
}

#[test]
fn design_columns_concentrate() {
    let n = 1000;
    for seed in 0..20 {
        let d = generate_design(n, 30, seed).unwrap();
        let worst = d.column_sq_norms().iter().map(|v| (v / n as f64 - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst <= 5.0 / (n as f64).sqrt(), "seed {seed}: {worst}");
    }
    assert_eq!(generate_design(10, 3, 4).unwrap(), generate_design(10, 3, 4).unwrap());
}

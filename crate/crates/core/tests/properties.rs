use proptest::prelude::*;
use spikeslab::conjugate::{posterior_moments, shift_rescale_interval, SeriesPrior};
use spikeslab::distributions::{l1_distance_numeric, renyi_gaussian, GridDensity, SlabSpec};
use spikeslab::eb::{mmle_fit, MarginalLikelihood};
use spikeslab::experiment::{format_float, Count};
use spikeslab::sas::{
    l_value, posterior_median, posterior_weight, subset_selection_l_values, SasPrior, SubsetSelectionPrior,
};
use spikeslab::testing::{bh_from_p_values, losses, lvalue_procedure, DecisionVector, PriorSource};
use spikeslab::vb::state::{deflate_pmf, inflate_pmf, poisson_binomial_pmf, poisson_binomial_pmf_excluding};

fn slab() -> impl Strategy<Value = SlabSpec> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|l| SlabSpec::laplace(l).unwrap()),
        (0.2f64..3.0).prop_map(|l| SlabSpec::cauchy(l).unwrap()),
    ]
}

fn gaussian(mu: f64, s: f64) -> impl Fn(f64) -> f64 {
    move |u| (-0.5 * ((u - mu) / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn weight_is_symmetric_and_complements_l_value(x in -20.0f64..20.0, alpha in 0.001f64..0.999, slab in slab()) {
        let prior = SasPrior::new(alpha, slab).unwrap();
        let a = posterior_weight(x, &prior).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(a, posterior_weight(-x, &prior).unwrap());
        prop_assert_eq!(a + l_value(x, &prior).unwrap(), 1.0);
    }

    #[test]
    fn weight_nondecreasing_in_magnitude(x in 0.0f64..15.0, dx in 0.0f64..3.0, alpha in 0.001f64..0.999, slab in slab()) {
        let prior = SasPrior::new(alpha, slab).unwrap();
        prop_assert!(posterior_weight(x, &prior).unwrap() <= posterior_weight(x + dx, &prior).unwrap() + 1e-12);
    }

    #[test]
    fn median_shrinks_toward_zero(x in -12.0f64..12.0, alpha in 0.01f64..0.99) {
        let prior = SasPrior::new(alpha, SlabSpec::laplace(1.0).unwrap()).unwrap();
        let m = posterior_median(x, &prior).unwrap();
        prop_assert!(m.abs() <= x.abs() + 1e-9);
        prop_assert!(m * x >= 0.0);
    }

    #[test]
    fn lvalue_rejections_are_nested(xs in prop::collection::vec(-6.0f64..6.0, 1..40), t1 in 0.01f64..0.99, t2 in 0.01f64..0.99) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let src = PriorSource::Fixed { alpha: 0.1 };
        let slab = SlabSpec::laplace(1.0).unwrap();
        let a = lvalue_procedure(&xs, &src, slab, lo).unwrap();
        let b = lvalue_procedure(&xs, &src, slab, hi).unwrap();
        prop_assert!(a.decisions.iter().zip(&b.decisions).all(|(x, y)| !*x || *y));
    }

    #[test]
    fn bh_rejections_grow_with_level(p in prop::collection::vec(0.0f64..1.0, 1..50), q1 in 0.01f64..0.99, q2 in 0.01f64..0.99) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let a = bh_from_p_values(&p, lo).unwrap();
        let b = bh_from_p_values(&p, hi).unwrap();
        prop_assert!(a.decisions.iter().zip(&b.decisions).all(|(x, y)| !*x || *y));
    }

    #[test]
    fn loss_proportions_are_bounded(d in prop::collection::vec(any::<bool>(), 1..60), seed in any::<u64>()) {
        let theta: Vec<f64> = (0..d.len()).map(|i| if (seed >> (i % 64)) & 1 == 1 { 1.5 } else { 0.0 }).collect();
        let l = losses(&DecisionVector { decisions: d }, &theta).unwrap();
        prop_assert!((0.0..=1.0).contains(&l.fdp) && (0.0..=1.0).contains(&l.fnp));
        prop_assert_eq!(l.n_fp + l.n_tp(), l.n_discoveries);
    }

    #[test]
    fn subset_l_values_are_probabilities(xs in prop::collection::vec(-8.0f64..8.0, 1..30), w in prop::collection::vec(-5.0f64..5.0, 31)) {
        let n = xs.len();
        let prior = SubsetSelectionPrior::new(w[..=n].to_vec(), SlabSpec::laplace(1.0).unwrap()).unwrap();
        let l = subset_selection_l_values(&xs, &prior, n).unwrap();
        prop_assert!(l.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn mmle_stays_in_its_interval(xs in prop::collection::vec(-8.0f64..8.0, 2..80)) {
        let ml = MarginalLikelihood::new(&xs, SlabSpec::laplace(1.0).unwrap()).unwrap();
        let fit = mmle_fit(&ml, None).unwrap();
        prop_assert!(fit.alpha >= 1.0 / xs.len() as f64 && fit.alpha <= 1.0);
    }

    #[test]
    fn conjugate_posterior_shrinks(xs in prop::collection::vec(-5.0f64..5.0, 1..30), ap in 0.1f64..3.0, n in 1usize..10_000, t in 0.001f64..1.0) {
        let prior = SeriesPrior::new(ap, xs.len()).unwrap();
        let post = posterior_moments(&xs, &prior, n, t).unwrap();
        for k in 0..xs.len() {
            prop_assert!(post.means[k].abs() <= xs[k].abs());
            let cap = (1.0 / (n as f64 * t)).min(prior.variance(k + 1));
            prop_assert!(post.variances[k] <= cap * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rescaled_interval_keeps_center_and_shrinks(c in -5.0f64..5.0, lo in -3.0f64..0.0, hi in 0.0f64..3.0, t in 0.01f64..1.0) {
        let (a, b) = shift_rescale_interval(c, c + lo, c + hi, t).unwrap();
        prop_assert!(a <= c && c <= b);
        prop_assert!(((b - a) - t.sqrt() * (hi - lo)).abs() < 1e-12);
    }

    #[test]
    fn pmf_inflate_then_deflate_round_trips(g in prop::collection::vec(0.0f64..1.0, 1..20), extra in 0.0f64..0.45) {
        let base = poisson_binomial_pmf(&g);
        prop_assert!((base.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let back = deflate_pmf(&inflate_pmf(&base, extra), extra);
        for (a, b) in base.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let mut with = g.clone();
        with.push(extra);
        let excl = poisson_binomial_pmf_excluding(&with, g.len());
        for (a, b) in base.iter().zip(&excl) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn floats_and_counts_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite()), c in 0usize..1_000_000_000) {
        prop_assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        prop_assert_eq!(c.to_string().parse::<Count>().unwrap().0, c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn renyi_monotone_in_rho_and_above_pinsker(mu in -2.0f64..2.0, s in 0.5f64..2.0, nu in -2.0f64..2.0, t in 0.5f64..2.0) {
        let p = GridDensity::tabulate(gaussian(mu, s), -30.0, 30.0, 30_001);
        let q = GridDensity::tabulate(gaussian(nu, t), -30.0, 30.0, 30_001);
        let l1 = l1_distance_numeric(&p, &q).unwrap();
        let mut prev = 0.0;
        for rho in [0.05, 0.2, 0.4, 0.6, 0.8, 0.95] {
            let d = renyi_gaussian(rho, mu, s, nu, t).unwrap();
            prop_assert!(d >= prev - 1e-12);
            prop_assert!(d >= rho * l1 * l1 / 2.0 - 1e-9);
            prev = d;
        }
    }
}

//! Validation and execution of each experiment kind.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{field_error, ExperimentConfig, ExperimentKind, Fields};
use super::table::Table;
use crate::conjugate::{coverage_mc, power_law_tail, risk_terms, AlphaRule, FunctionalSpec, SeriesPrior};
use crate::distributions::{oracle_threshold, NoiseModel, SlabSpec};
use crate::eb::{mmle_fit, Boundary, MarginalLikelihood};
use crate::error::{Error, FieldError, Result};
use crate::rng::{stream, substream};
use crate::sas::SasPrior;
use crate::stats::{mean_and_se, median, ols_slope};
use crate::testing::{
    bayes_fdr_mc, bayes_lower_bound_mrho, lambda_boundary, risk_mc, rho_upper_limit, PriorSource,
    Procedure, SignalConfig,
};
use crate::vb::{
    cavi_fit, enumeration_oracle, generate_design, InitPolicy, OracleOptions, RegressionInstance,
    RegressionPrior,
};

pub const RISK_BOUNDARY_HEADER: &[&str] = &[
    "experiment", "procedure", "n", "s", "b1", "b2", "boundary", "fdr", "fnr", "estimate",
    "std_error", "replicates",
];
pub const LOWER_BOUND_HEADER: &[&str] = &[
    "experiment", "n", "s", "b", "rho", "rho_upper_limit", "admissible", "boundary", "estimate",
    "std_error", "replicates",
];
pub const BAYES_FDR_HEADER: &[&str] =
    &["experiment", "n", "alpha", "slab", "t", "estimate", "std_error", "replicates"];
pub const CONTRACTION_HEADER: &[&str] = &[
    "experiment", "n", "alpha_prior", "beta", "truncation", "spread", "bias", "tail", "estimate",
    "std_error", "replicates",
];
pub const COVERAGE_HEADER: &[&str] = &[
    "experiment", "n", "alpha_n", "nominal", "width", "estimate", "std_error", "replicates",
];
pub const VB_FIT_HEADER: &[&str] = &[
    "experiment", "replicate", "n", "p", "s", "sweeps", "elbo", "min_elbo_increment", "l2_error",
    "log_marginal", "oracle_inclusion_linf", "oracle_mean_l2",
];
pub const VB_SCALING_HEADER: &[&str] = &[
    "experiment", "n", "p", "s", "mean_l2_error", "min_elbo_increment", "estimate", "std_error",
    "replicates",
];
pub const MMLE_HEADER: &[&str] = &[
    "experiment", "replicate", "n", "s", "b", "alpha_true", "alpha_hat", "log_likelihood",
    "boundary", "iterations",
];

pub fn header(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::RiskBoundary => RISK_BOUNDARY_HEADER,
        ExperimentKind::LowerBound => LOWER_BOUND_HEADER,
        ExperimentKind::BayesFdr => BAYES_FDR_HEADER,
        ExperimentKind::Contraction => CONTRACTION_HEADER,
        ExperimentKind::Coverage => COVERAGE_HEADER,
        ExperimentKind::VbFit => VB_FIT_HEADER,
        ExperimentKind::VbScaling => VB_SCALING_HEADER,
        ExperimentKind::Mmle => MMLE_HEADER,
    }
}

fn default_reps(kind: ExperimentKind) -> usize {
    match kind {
        ExperimentKind::RiskBoundary | ExperimentKind::LowerBound => 200,
        ExperimentKind::BayesFdr => 500,
        ExperimentKind::Contraction => 1,
        ExperimentKind::Coverage => 2000,
        ExperimentKind::VbFit => 1,
        ExperimentKind::VbScaling => 50,
        ExperimentKind::Mmle => 100,
    }
}

/// Typed, validated parameters of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Plan {
    RiskBoundary {
        n: usize,
        s: usize,
        /// One `(b1, b2)` pair per row; the first `⌈s/2⌉` signals use `b1`.
        groups: Vec<(f64, f64)>,
        noise: NoiseModel,
        procedure_name: String,
        procedure: Procedure,
    },
    LowerBound { n: usize, s: usize, b: Vec<f64>, rho: f64, kappa: Option<f64>, noise: NoiseModel },
    BayesFdr { n: usize, alpha: f64, slab: SlabSpec, t: Vec<f64> },
    Contraction { alpha_prior: f64, beta: f64, ns: Vec<usize>, truncation: Option<usize>, tail: bool },
    Coverage { spec: FunctionalSpec, ns: Vec<usize>, rule: AlphaRule, delta: f64 },
    VbFit(VbSettings),
    VbScaling { settings: VbSettings, ns: Vec<usize> },
    Mmle { n: usize, s: usize, b: f64, slab: SlabSpec, noise: NoiseModel },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VbSettings {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    /// Dimension prior `Beta(1, p^u)`-binomial.
    pub u: f64,
    pub lambda: f64,
    /// Magnitude of the nonzero true coefficients.
    pub signal: f64,
    pub oracle: bool,
    pub oracle_draws: usize,
    pub max_sweeps: usize,
    pub tol: f64,
}

/// A validated configuration ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub replicates: usize,
    pub plan: Plan,
    /// Soft problems; the run proceeds.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub validated: Validated,
    pub table: Table,
    /// Kind-specific aggregate values for the JSON summary.
    pub summary: Value,
}

/// Static checks: every required field present and parseable, parameters in
/// their domains, and signal-class membership. Soft problems are returned
/// as warnings.
pub fn validate(config: &ExperimentConfig) -> Result<Validated> {
    let mut f = Fields::new(&config.values);
    let seed: u64 = f.or("seed", 0);
    let replicates = f.count("reps", Some(default_reps(config.kind)));
    if replicates == 0 {
        f.error("reps", "must be at least 1");
    }
    let mut warnings = Vec::new();
    let plan = match config.kind {
        ExperimentKind::RiskBoundary => plan_risk_boundary(&mut f),
        ExperimentKind::LowerBound => plan_lower_bound(&mut f, &mut warnings),
        ExperimentKind::BayesFdr => plan_bayes_fdr(&mut f),
        ExperimentKind::Contraction => plan_contraction(&mut f),
        ExperimentKind::Coverage => plan_coverage(&mut f),
        ExperimentKind::VbFit => plan_vb(&mut f, false).map(Plan::VbFit),
        ExperimentKind::VbScaling => {
            let settings = plan_vb(&mut f, true);
            let ns = f.counts("ns", Some(vec![100, 200, 400, 800]));
            if ns.iter().any(|&n| n < 2) {
                f.error("ns", "every n must be at least 2");
            }
            settings.map(|settings| Plan::VbScaling { settings, ns })
        }
        ExperimentKind::Mmle => plan_mmle(&mut f),
    };
    f.finish()?;
    let plan = plan.ok_or_else(|| field_error("config", "invalid configuration"))?;
    Ok(Validated { kind: config.kind, seed, replicates, plan, warnings })
}

fn check_sparsity(f: &mut Fields, n: usize, s: usize) -> bool {
    if f.has_error("n") || f.has_error("s") {
        return false;
    }
    if n == 0 || s == 0 || s >= n {
        f.error("s", format!("need 1 <= s < n, got n={n}, s={s}"));
        return false;
    }
    true
}

/// Hard error when some `a* + b_j ≤ 0`.
fn check_class(f: &mut Fields, key: &str, n: usize, s: usize, noise: &NoiseModel, bs: &[f64]) {
    if let Ok(a) = oracle_threshold(n, s, noise) {
        if let Some(b) = bs.iter().find(|b| !(a + **b > 0.0)) {
            f.error(key, format!("offset {b} leaves the signal class: a* + b = {} must be positive", a + b));
        }
    }
}

fn unit_interval(f: &mut Fields, key: &str, v: f64) {
    if !(v > 0.0 && v < 1.0) {
        f.error(key, format!("must lie in (0,1), got {v}"));
    }
}

fn plan_risk_boundary(f: &mut Fields) -> Option<Plan> {
    let n = f.count("n", None);
    let s = f.count("s", None);
    let noise = f.noise("noise");
    let groups: Vec<(f64, f64)> = if f.has("pairs") {
        if f.has("b") {
            f.error("pairs", "give either b or pairs, not both");
        }
        f.list::<String>("pairs", None)
            .iter()
            .filter_map(|p| {
                let parsed = p.split_once(':').and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
                if parsed.is_none() {
                    f.error("pairs", format!("expected b1:b2, got '{p}'"));
                }
                parsed
            })
            .collect()
    } else {
        f.list::<f64>("b", Some(vec![-1.0, 0.0, 1.0, 2.0])).into_iter().map(|b| (b, b)).collect()
    };
    let name: String = f.or("procedure", "oracle".to_string());
    let slab = f.slab("slab", SlabSpec::Laplace { lambda: 1.0 });
    let t: f64 = f.or("t", 0.3);
    let level: f64 = f.or("level", 0.1);
    let procedure = match name.as_str() {
        "oracle" => Some(Procedure::Oracle),
        "never" => Some(Procedure::NeverReject),
        "bh" => {
            unit_interval(f, "level", level);
            Some(Procedure::Bh { level })
        }
        "lvalue" => {
            let alpha: Option<f64> = f.required("alpha");
            if let Some(a) = alpha {
                unit_interval(f, "alpha", a);
            }
            alpha.map(|alpha| Procedure::LValue { source: PriorSource::Fixed { alpha }, slab, t })
        }
        "mmle" => Some(Procedure::LValue { source: PriorSource::Mmle { interval: None }, slab, t }),
        "betabinomial" => {
            let a: f64 = f.or("bb_a", 1.0);
            let b: Option<f64> = f.optional("bb_b");
            let k_max: Option<usize> = f.optional::<super::config::Count>("k_max").map(|c| c.0);
            Some(Procedure::LValue { source: PriorSource::BetaBinomial { a, b, k_max }, slab, t })
        }
        other => {
            f.error(
                "procedure",
                format!("unknown procedure '{other}' (expected oracle, bh, lvalue, mmle, betabinomial or never)"),
            );
            None
        }
    };
    if matches!(procedure, Some(Procedure::LValue { .. })) {
        unit_interval(f, "t", t);
    }
    if check_sparsity(f, n, s) {
        let flat: Vec<f64> = groups.iter().flat_map(|g| [g.0, g.1]).collect();
        let key = if f.has("pairs") { "pairs" } else { "b" };
        check_class(f, key, n, s, &noise, &flat);
    }
    Some(Plan::RiskBoundary { n, s, groups, noise, procedure_name: name, procedure: procedure? })
}

fn plan_lower_bound(f: &mut Fields, warnings: &mut Vec<String>) -> Option<Plan> {
    let n = f.count("n", None);
    let s = f.count("s", None);
    let noise = f.noise("noise");
    let b = f.list::<f64>("b", Some(vec![0.0]));
    let rho: f64 = f.or("rho", 1.0);
    let kappa: Option<f64> = f.optional("kappa");
    if !(rho >= 1.0 && rho.is_finite()) {
        f.error("rho", format!("must be at least 1, got {rho}"));
    }
    if check_sparsity(f, n, s) {
        check_class(f, "b", n, s, &noise, &b);
        match rho_upper_limit(n, s, &noise, kappa) {
            Ok(limit) if rho > limit => warnings.push(format!(
                "rho = {rho} is above the admissible window (upper limit {limit}); the run proceeds"
            )),
            Ok(_) => {}
            Err(e) => f.error("kappa", e.to_string()),
        }
    }
    Some(Plan::LowerBound { n, s, b, rho, kappa, noise })
}

fn plan_bayes_fdr(f: &mut Fields) -> Option<Plan> {
    let n = f.count("n", Some(10_000));
    let alpha: f64 = f.or("alpha", 0.05);
    let slab = f.slab("slab", SlabSpec::Laplace { lambda: 1.0 });
    let t = f.list::<f64>("t", Some(vec![0.1, 0.3, 0.5]));
    if n == 0 {
        f.error("n", "must be at least 1");
    }
    unit_interval(f, "alpha", alpha);
    for &v in &t {
        unit_interval(f, "t", v);
    }
    Some(Plan::BayesFdr { n, alpha, slab, t })
}

fn plan_contraction(f: &mut Fields) -> Option<Plan> {
    let alpha_prior: f64 = f.or("alpha_prior", 1.0);
    let beta: f64 = f.or("beta", 1.0);
    let ns = f.counts("ns", Some((8..=16).map(|k| 1usize << k).collect()));
    let truncation: Option<usize> = f.optional::<super::config::Count>("truncation").map(|c| c.0);
    let tail: bool = f.or("tail", true);
    if !(alpha_prior > 0.0 && alpha_prior.is_finite()) {
        f.error("alpha_prior", "must be positive");
    }
    if !(beta > 0.0 && beta.is_finite()) {
        f.error("beta", "must be positive");
    }
    if ns.contains(&0) {
        f.error("ns", "every n must be at least 1");
    }
    if truncation == Some(0) {
        f.error("truncation", "must be at least 1");
    }
    Some(Plan::Contraction { alpha_prior, beta, ns, truncation, tail })
}

/// `constant:<α>` or `power:<exponent>[:<log power>]`.
fn parse_rule(s: &str) -> std::result::Result<AlphaRule, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number '{t}' in alpha_rule"));
    match parts.as_slice() {
        ["constant", v] => Ok(AlphaRule::Constant { value: num(v)? }),
        ["power", e] => Ok(AlphaRule::Power { exponent: num(e)?, log_power: 0.0 }),
        ["power", e, l] => Ok(AlphaRule::Power { exponent: num(e)?, log_power: num(l)? }),
        _ => Err(format!("expected constant:<value> or power:<exponent>[:<log power>], got '{s}'")),
    }
}

fn plan_coverage(f: &mut Fields) -> Option<Plan> {
    let beta: f64 = f.or("beta", 1.0);
    let mu: f64 = f.or("mu", 1.0);
    let gamma: f64 = f.or("gamma", 0.25);
    let truncation: Option<usize> = f.optional::<super::config::Count>("truncation").map(|c| c.0);
    let ns = f.counts("ns", Some(vec![1 << 14]));
    let delta: f64 = f.or("delta", 0.05);
    let rule_text: String = f.or("alpha_rule", "power:0.25".to_string());
    unit_interval(f, "delta", delta);
    let rule = match parse_rule(&rule_text) {
        Ok(r) => Some(r),
        Err(e) => {
            f.error("alpha_rule", e);
            None
        }
    };
    if ns.iter().any(|&n| n < 2) {
        f.error("ns", "every n must be at least 2");
    }
    if let Some(r) = rule {
        for &n in &ns {
            let a = r.at(n);
            if !(a > 0.0 && a <= 1.0) {
                f.error("alpha_rule", format!("gives alpha_n = {a} at n = {n}; must lie in (0,1]"));
            }
        }
    }
    let spec = match FunctionalSpec::new(beta, mu, gamma, truncation) {
        Ok(s) => Some(s),
        Err(e) => {
            f.error("beta", e.to_string());
            None
        }
    };
    Some(Plan::Coverage { spec: spec?, ns, rule: rule?, delta })
}

fn plan_vb(f: &mut Fields, scaling: bool) -> Option<VbSettings> {
    let n = if scaling { 0 } else { f.count("n", None) };
    let p = f.count("p", if scaling { Some(800) } else { None });
    let s = f.count("s", if scaling { Some(5) } else { None });
    let u: f64 = f.or("u", 2.0);
    let lambda: f64 = f.or("lambda", 1.0);
    let signal: f64 = f.or("signal", 3.0 * (2.0 * (p.max(2) as f64).ln()).sqrt());
    let oracle: bool = if scaling { false } else { f.or("oracle", false) };
    let oracle_draws = if scaling { 0 } else { f.count("oracle_draws", Some(crate::vb::oracle::MIN_MC_PER_SUBSET)) };
    let max_sweeps = f.count("max_sweeps", Some(crate::vb::cavi::DEFAULT_MAX_SWEEPS));
    let tol: f64 = f.or("tol", crate::vb::cavi::DEFAULT_TOL);
    if !scaling && n < 2 {
        f.error("n", "must be at least 2");
    }
    if p == 0 {
        f.error("p", "must be at least 1");
    }
    if s > p {
        f.error("s", format!("must not exceed p = {p}"));
    }
    if !(u > 0.0) {
        f.error("u", "must be positive");
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        f.error("lambda", "must be positive");
    }
    if !signal.is_finite() {
        f.error("signal", "must be finite");
    }
    if oracle && p > crate::vb::oracle::MAX_ORACLE_P {
        f.error("oracle", format!("enumeration needs p <= {}", crate::vb::oracle::MAX_ORACLE_P));
    }
    if max_sweeps == 0 {
        f.error("max_sweeps", "must be at least 1");
    }
    if !(tol > 0.0) {
        f.error("tol", "must be positive");
    }
    Some(VbSettings { n, p, s, u, lambda, signal, oracle, oracle_draws, max_sweeps, tol })
}

fn plan_mmle(f: &mut Fields) -> Option<Plan> {
    let n = f.count("n", None);
    let s = f.count("s", None);
    let b: f64 = f.or("b", 1.0);
    let slab = f.slab("slab", SlabSpec::Laplace { lambda: 1.0 });
    let noise = f.noise("noise");
    if check_sparsity(f, n, s) {
        check_class(f, "b", n, s, &noise, &[b]);
    }
    Some(Plan::Mmle { n, s, b, slab, noise })
}

/// Validate and execute.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let validated = validate(config)?;
    execute(validated)
}

/// [`run`] on a dedicated pool of `workers` threads (`None`: rayon default).
/// Output does not depend on the worker count.
pub fn run_with_workers(config: &ExperimentConfig, workers: Option<usize>) -> Result<RunOutput> {
    let validated = validate(config)?;
    match workers {
        None => execute(validated),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Domain(format!("cannot build thread pool: {e}")))?;
            pool.install(|| execute(validated))
        }
    }
}

pub fn execute(validated: Validated) -> Result<RunOutput> {
    let kind = validated.kind.name();
    let (seed, reps) = (validated.seed, validated.replicates);
    let mut table = Table::new(header(validated.kind));
    let summary = match &validated.plan {
        Plan::RiskBoundary { n, s, groups, noise, procedure_name, procedure } => {
            let mut worst = 0.0f64;
            for &(b1, b2) in groups {
                let cfg = SignalConfig::two_group(*n, *s, b1, b2, *noise)?;
                let target = lambda_boundary(&cfg.b, noise)?;
                let r = risk_mc(&cfg, procedure, reps, seed)?;
                worst = worst.max((r.total.mean - target).abs());
                table.push(vec![
                    kind.into(), procedure_name.as_str().into(), (*n).into(), (*s).into(), b1.into(),
                    b2.into(), target.into(), r.fdr.mean.into(), r.fnr.mean.into(), r.total.mean.into(),
                    r.total.mc_std_error.into(), reps.into(),
                ])?;
            }
            json!({ "max_abs_deviation_from_boundary": worst })
        }
        Plan::LowerBound { n, s, b, rho, kappa, noise } => {
            for &bj in b {
                let r = bayes_lower_bound_mrho(*n, *s, bj, *rho, noise, *kappa, reps, seed)?;
                table.push(vec![
                    kind.into(), (*n).into(), (*s).into(), bj.into(), (*rho).into(),
                    r.rho_upper_limit.into(), r.admissible.into(), noise.sf(bj).into(),
                    r.estimate.mean.into(), r.estimate.mc_std_error.into(), reps.into(),
                ])?;
            }
            json!({})
        }
        Plan::BayesFdr { n, alpha, slab, t } => {
            let prior = SasPrior::new(*alpha, *slab)?;
            let est = bayes_fdr_mc(*n, &prior, t, reps, seed)?;
            for (tv, e) in t.iter().zip(&est) {
                table.push(vec![
                    kind.into(), (*n).into(), (*alpha).into(), slab.to_string().into(), (*tv).into(),
                    e.mean.into(), e.mc_std_error.into(), reps.into(),
                ])?;
            }
            json!({})
        }
        Plan::Contraction { alpha_prior, beta, ns, truncation, tail } => {
            let mut logs = (Vec::new(), Vec::new());
            for &n in ns {
                let k = truncation.unwrap_or(n);
                let prior = SeriesPrior::new(*alpha_prior, k)?;
                let theta0: Vec<f64> = (1..=k).map(|j| (j as f64).powf(-0.5 - beta)).collect();
                let (spread, bias) = risk_terms(&theta0, &prior, n)?;
                let t = if *tail { power_law_tail(*beta, k) } else { 0.0 };
                let risk = spread + bias + t;
                logs.0.push((n as f64).ln());
                logs.1.push(risk.ln());
                table.push(vec![
                    kind.into(), n.into(), (*alpha_prior).into(), (*beta).into(), k.into(),
                    spread.into(), bias.into(), t.into(), risk.into(), 0.0.into(), 0usize.into(),
                ])?;
            }
            let slope = if ns.len() >= 2 { Some(ols_slope(&logs.0, &logs.1)) } else { None };
            json!({
                "log_log_slope": slope,
                "predicted_slope": -2.0 * alpha_prior.min(*beta) / (2.0 * alpha_prior + 1.0),
            })
        }
        Plan::Coverage { spec, ns, rule, delta } => {
            for row in coverage_mc(spec, ns, rule, *delta, reps, seed)? {
                table.push(vec![
                    kind.into(), row.n.into(), row.alpha_n.into(), (1.0 - delta).into(), row.width.into(),
                    row.coverage.into(), row.std_error.into(), row.replicates.into(),
                ])?;
            }
            json!({})
        }
        Plan::VbFit(settings) => {
            let fits: Vec<VbOutcome> = (0..reps as u64)
                .into_par_iter()
                .map(|r| vb_replicate(settings, settings.n, seed, 0, r))
                .collect::<Result<_>>()?;
            for (r, o) in fits.iter().enumerate() {
                table.push(vec![
                    kind.into(), r.into(), settings.n.into(), settings.p.into(), settings.s.into(),
                    o.sweeps.into(), o.elbo.into(), o.min_increment.into(), o.l2_error.into(),
                    o.log_marginal.into(), o.inclusion_linf.into(), o.mean_l2.into(),
                ])?;
            }
            json!({
                "min_elbo_increment": fits.iter().map(|o| o.min_increment).fold(f64::INFINITY, f64::min),
                "median_l2_error": median(&fits.iter().map(|o| o.l2_error).collect::<Vec<_>>()),
            })
        }
        Plan::VbScaling { settings, ns } => {
            let jobs: Vec<(usize, u64)> =
                (0..ns.len()).flat_map(|i| (0..reps as u64).map(move |r| (i, r))).collect();
            let fits: Vec<VbOutcome> = jobs
                .into_par_iter()
                .map(|(i, r)| vb_replicate(settings, ns[i], seed, i as u64 + 1, r))
                .collect::<Result<_>>()?;
            let mut logs = (Vec::new(), Vec::new());
            for (i, &n) in ns.iter().enumerate() {
                let group = &fits[i * reps..(i + 1) * reps];
                let errs: Vec<f64> = group.iter().map(|o| o.l2_error).collect();
                let (mean, se) = mean_and_se(&errs);
                let med = median(&errs);
                let min_inc = group.iter().map(|o| o.min_increment).fold(f64::INFINITY, f64::min);
                logs.0.push((n as f64).ln());
                logs.1.push(med.ln());
                // large-sample standard error of a median, normal approximation
                let med_se = (std::f64::consts::PI / 2.0).sqrt() * se;
                table.push(vec![
                    kind.into(), n.into(), settings.p.into(), settings.s.into(), mean.into(),
                    min_inc.into(), med.into(), med_se.into(), reps.into(),
                ])?;
            }
            let slope = if ns.len() >= 2 { Some(ols_slope(&logs.0, &logs.1)) } else { None };
            json!({
                "log_log_slope": slope,
                "min_elbo_increment": fits.iter().map(|o| o.min_increment).fold(f64::INFINITY, f64::min),
            })
        }
        Plan::Mmle { n, s, b, slab, noise } => {
            let cfg = SignalConfig::constant(*n, *s, *b, *noise)?;
            let fits = (0..reps as u64)
                .into_par_iter()
                .map(|r| {
                    let (_, x) = cfg.sample(&mut stream(seed, r))?;
                    mmle_fit(&MarginalLikelihood::new(&x, *slab)?, None)
                })
                .collect::<Result<Vec<_>>>()?;
            let truth = *s as f64 / *n as f64;
            for (r, fit) in fits.iter().enumerate() {
                let boundary = fit.boundary.map(|b| match b {
                    Boundary::Lower => "lower",
                    Boundary::Upper => "upper",
                });
                table.push(vec![
                    kind.into(), r.into(), (*n).into(), (*s).into(), (*b).into(), truth.into(),
                    fit.alpha.into(), fit.log_likelihood.into(), boundary.into(), fit.iterations.into(),
                ])?;
            }
            let ratios: Vec<f64> = fits.iter().map(|f| f.alpha / truth).collect();
            json!({ "median_alpha_ratio": median(&ratios) })
        }
    };
    Ok(RunOutput { validated, table, summary })
}

struct VbOutcome {
    sweeps: usize,
    elbo: f64,
    min_increment: f64,
    l2_error: f64,
    log_marginal: Option<f64>,
    inclusion_linf: Option<f64>,
    mean_l2: Option<f64>,
}

/// One simulated regression fit. `group` separates the streams of different
/// sample sizes.
fn vb_replicate(cfg: &VbSettings, n: usize, seed: u64, group: u64, r: u64) -> Result<VbOutcome> {
    let inst_seed: u64 = substream(seed, r, group).random();
    let p = cfg.p;
    let mut theta0 = vec![0.0; p];
    let spacing = p.checked_div(cfg.s).unwrap_or(1);
    for j in 0..cfg.s {
        theta0[j * spacing] = cfg.signal;
    }
    let design = generate_design(n, p, inst_seed)?;
    let instance = RegressionInstance::simulate(design, &theta0, inst_seed)?;
    let prior = RegressionPrior::beta_binomial(p, cfg.u, SlabSpec::laplace(cfg.lambda)?)?;
    let state = cavi_fit(&instance, &prior, &InitPolicy::Screening, cfg.max_sweeps, cfg.tol)?;
    let trace = &state.elbo_trace;
    let min_increment = trace.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mean = state.mean();
    let l2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut out = VbOutcome {
        sweeps: trace.len(),
        elbo: *trace.last().unwrap_or(&f64::NAN),
        min_increment: if min_increment.is_finite() { min_increment } else { 0.0 },
        l2_error: l2(&mean, &theta0),
        log_marginal: None,
        inclusion_linf: None,
        mean_l2: None,
    };
    if cfg.oracle {
        let opts = OracleOptions { mc_per_subset: cfg.oracle_draws, seed: inst_seed, ..Default::default() };
        let o = enumeration_oracle(&instance, &prior, &opts)?;
        out.log_marginal = Some(o.log_marginal);
        out.inclusion_linf = Some(
            state.gamma.iter().zip(&o.inclusion_probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        );
        out.mean_l2 = Some(l2(&mean, &o.posterior_mean));
    }
    Ok(out)
}

/// Deterministic JSON summary: config echo, resolved plan, aggregate
/// values, warnings and an environment stamp.
pub fn summary_json(config: &ExperimentConfig, output: &RunOutput) -> String {
    let v = &output.validated;
    let doc = json!({
        "kind": v.kind.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": v.seed,
        "replicates": v.replicates,
        "config": config.values,
        "plan": v.plan,
        "summary": output.summary,
        "warnings": v.warnings,
        "environment": {
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "os": std::env::consts::OS,
            "arch": std::env::consts::ARCH,
        },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("summary is serializable");
    s.push('\n');
    s
}

/// Write `<out>.csv` and `<out>.json`.
pub fn write_outputs(out: &std::path::Path, config: &ExperimentConfig, output: &RunOutput) -> Result<()> {
    std::fs::write(with_suffix(out, "csv"), output.table.to_csv()?)?;
    std::fs::write(with_suffix(out, "json"), summary_json(config, output))?;
    Ok(())
}

/// `<out>.<ext>`, appended rather than replacing any existing extension.
pub fn with_suffix(out: &std::path::Path, ext: &str) -> std::path::PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".");
    s.push(ext);
    s.into()
}

/// Field errors of a config error, if that is what `e` is.
pub fn field_errors(e: &Error) -> Option<&[FieldError]> {
    match e {
        Error::Config(v) => Some(v),
        _ => None,
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use spikeslab::experiment::{run_with_workers, with_suffix, write_outputs, ExperimentConfig, ExperimentKind};
use spikeslab::Error;

/// Deterministic simulation experiments for spike-and-slab procedures.
#[derive(Parser)]
#[command(name = "spikeslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiple-testing risk on a grid of signal offsets.
    RiskBoundary(Common),
    /// Block-prior Bayes risk lower bound.
    LowerBound(Common),
    /// Bayesian FDR of the fixed-weight l-value procedure.
    BayesFdr(Common),
    /// Closed-form risk of conjugate series priors across n.
    Contraction(Common),
    /// Coverage of tempered shift-and-rescale credible intervals.
    Coverage(Common),
    /// Variational fits of sparse regressions.
    VbFit(Common),
    /// Variational l2-error across sample sizes.
    VbScaling(Common),
    /// Marginal maximum likelihood of the mixing weight.
    Mmle(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Output prefix; writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores). Does not affect output.
    #[arg(long)]
    workers: Option<usize>,
    /// Override a config value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Further `KEY=VALUE` overrides.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::RiskBoundary(c) => (ExperimentKind::RiskBoundary, c),
            Command::LowerBound(c) => (ExperimentKind::LowerBound, c),
            Command::BayesFdr(c) => (ExperimentKind::BayesFdr, c),
            Command::Contraction(c) => (ExperimentKind::Contraction, c),
            Command::Coverage(c) => (ExperimentKind::Coverage, c),
            Command::VbFit(c) => (ExperimentKind::VbFit, c),
            Command::VbScaling(c) => (ExperimentKind::VbScaling, c),
            Command::Mmle(c) => (ExperimentKind::Mmle, c),
        }
    }
}

fn build_config(kind: ExperimentKind, args: &Common) -> spikeslab::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(kind, path)?,
        None => ExperimentConfig::new(kind),
    };
    for kv in args.set.iter().chain(&args.overrides) {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(Error::Config(vec![spikeslab::error::FieldError {
                field: kv.clone(),
                message: "override must have the form KEY=VALUE".into(),
            }]));
        };
        cfg.set(k, v.trim());
    }
    if let Some(seed) = args.seed {
        cfg.set("seed", seed.to_string());
    }
    if let Some(reps) = args.reps {
        cfg.set("reps", reps.to_string());
    }
    Ok(cfg)
}

fn write_state(out: &Path, err: &Error) -> Option<PathBuf> {
    let state = match err {
        Error::Optimization { state: Some(s), .. } => {
            serde_json::from_str::<serde_json::Value>(s).unwrap_or(serde_json::Value::String(s.clone()))
        }
        _ => serde_json::Value::Null,
    };
    let doc = serde_json::json!({ "error": err.to_string(), "state": state });
    let path = with_suffix(out, "state.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).ok()? + "\n").ok()?;
    Some(path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(kind.name()));
    let config = match build_config(kind, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let result = run_with_workers(&config, args.workers)
        .and_then(|output| write_outputs(&out, &config, &output).map(|_| output));
    match result {
        Ok(output) => {
            for w in &output.validated.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "wrote {} and {} ({} rows, {:.2}s)",
                with_suffix(&out, "csv").display(),
                with_suffix(&out, "json").display(),
                output.table.rows.len(),
                start.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match write_state(&out, &e) {
                Some(p) => eprintln!("diagnostic state: {}", p.display()),
                None => eprintln!("diagnostic state could not be written"),
            }
            ExitCode::from(3)
        }
    }
}

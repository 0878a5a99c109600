use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spikeslab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spikeslab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn suffixed(out: &Path, ext: &str) -> PathBuf {
    PathBuf::from(format!("{}.{ext}", out.display()))
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir = scratch("workers");
    let mut files = Vec::new();
    for w in ["1", "3"] {
        let out = dir.join(format!("w{w}"));
        let o = run(&[
            "risk-boundary", "--seed", "5", "--reps", "10", "--workers", w,
            "--out", out.to_str().unwrap(), "n=2000", "s=20", "procedure=mmle",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        files.push((fs::read(suffixed(&out, "csv")).unwrap(), fs::read(suffixed(&out, "json")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn missing_field_exits_with_2_and_names_it() {
    let dir = scratch("missing");
    let o = run(&["mmle", "--out", dir.join("x").to_str().unwrap(), "n=100"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("s:"), "{err}");
    assert!(!suffixed(&dir.join("x"), "csv").exists());
}

#[test]
fn file_values_yield_to_overrides() {
    let dir = scratch("file");
    let cfg = dir.join("mmle.conf");
    fs::write(&cfg, "# small run\nn = 300\ns = 5\nb = 2\n").unwrap();
    let out = dir.join("m");
    let o = run(&[
        "mmle", "--config", cfg.to_str().unwrap(), "--set", "b=0.5", "--reps", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(suffixed(&out, "csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,replicate,n,s,b,alpha_true,alpha_hat,log_likelihood,boundary,iterations"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("0.5")));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(suffixed(&out, "json")).unwrap()).unwrap();
    assert_eq!(json["config"]["b"], "0.5");
    assert_eq!(json["replicates"], 3);
}

#[test]
fn numerical_failure_exits_with_3_and_writes_state() {
    let dir = scratch("fail");
    let out = dir.join("f");
    let o = run(&[
        "risk-boundary", "--reps", "1", "--out", out.to_str().unwrap(),
        "n=200", "s=4", "procedure=betabinomial", "k_max=0",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    let state = suffixed(&out, "state.json");
    assert!(err.contains(&state.display().to_string()), "{err}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(state).unwrap()).unwrap();
    assert!(doc["error"].is_string());
}

#[test]
fn every_subcommand_writes_its_header() {
    let dir = scratch("headers");
    let cases: [(&str, &[&str], &str); 8] = [
        ("risk-boundary", &["n=500", "s=5", "b=1"], "experiment,procedure,n,s,b1,b2,boundary,fdr,fnr,estimate,std_error,replicates"),
        ("lower-bound", &["n=500", "s=5"], "experiment,n,s,b,rho,rho_upper_limit,admissible,boundary,estimate,std_error,replicates"),
        ("bayes-fdr", &["n=500", "t=0.3"], "experiment,n,alpha,slab,t,estimate,std_error,replicates"),
        ("contraction", &["ns=256"], "experiment,n,alpha_prior,beta,truncation,spread,bias,tail,estimate,std_error,replicates"),
        ("coverage", &["ns=256"], "experiment,n,alpha_n,nominal,width,estimate,std_error,replicates"),
        ("vb-fit", &["n=40", "p=60", "s=2", "max_sweeps=50"], "experiment,replicate,n,p,s,sweeps,elbo,min_elbo_increment,l2_error,log_marginal,oracle_inclusion_linf,oracle_mean_l2"),
        ("vb-scaling", &["ns=40", "p=60", "s=2"], "experiment,n,p,s,mean_l2_error,min_elbo_increment,estimate,std_error,replicates"),
        ("mmle", &["n=200", "s=5"], "experiment,replicate,n,s,b,alpha_true,alpha_hat,log_likelihood,boundary,iterations"),
    ];
    for (cmd, kv, head) in cases {
        let out = dir.join(cmd);
        let mut args = vec![cmd, "--reps", "2", "--seed", "1", "--out", out.to_str().unwrap()];
        args.extend_from_slice(kv);
        let o = run(&args);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read_to_string(suffixed(&out, "csv")).unwrap();
        assert_eq!(csv.lines().next(), Some(head), "{cmd}");
        assert!(csv.lines().count() >= 2, "{cmd}");
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(suffixed(&out, "json")).unwrap()).unwrap();
        assert_eq!(json["kind"], cmd);
        assert!(json["environment"]["version"].is_string());
    }
}

//! `raman <scenario> --config <path>`: runs one scenario and writes
//! `timeseries.csv`, `metrics.json` and `config.resolved.json`.
//!
//! Exit codes: 0 success, 1 numerical or I/O failure, 2 infeasible pulse
//! design, 3 configuration error.

mod config;
mod output;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ConfigError, Model, Scenario};
use crate::run::Failure;

#[derive(Debug, Parser)]
#[command(name = "raman", version, about = "Pulse design and network simulation for cavity Raman spin-photon interfaces")]
struct Cli {
    scenario: Scenario,
    /// Scenario file, TOML (or JSON when it ends in .json).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trajectory seed; selects the trajectory engine.
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory count; selects the trajectory engine.
    #[arg(long = "n-traj")]
    n_traj: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<Model>,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors; 2 is reserved
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("raman: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let mut tree = config::read_tree(&cli.config)?;
    if let Some(given) = tree.get("scenario") {
        if given != &json!(cli.scenario.name()) {
            return Err(Failure::Config(format!("scenario: the file says {given} but the command line says {}", cli.scenario.name())));
        }
    }
    config::set_key(&mut tree, &["scenario"], json!(cli.scenario.name()))?;
    let effective = if cli.scenario == Scenario::Sweep {
        let inner = tree.pointer("/sweep/scenario").cloned().ok_or_else(|| Failure::Config("sweep.scenario: missing".into()))?;
        serde_json::from_value::<Scenario>(inner).map_err(|e| Failure::Config(format!("sweep.scenario: {e}")))?
    } else {
        cli.scenario
    };
    if let Some(m) = cli.model {
        config::set_key(&mut tree, &["model"], serde_json::to_value(m).expect("enum"))?;
    }
    if cli.seed.is_some() || cli.n_traj.is_some() {
        if !matches!(effective, Scenario::Transfer | Scenario::Entangle) {
            return Err(Failure::Config("--seed and --n-traj only apply to transfer and entangle".into()));
        }
        config::set_key(&mut tree, &["link", "engine"], json!("trajectories"))?;
        if let Some(s) = cli.seed {
            config::set_key(&mut tree, &["trajectories", "seed"], json!(s))?;
        }
        if let Some(n) = cli.n_traj {
            config::set_key(&mut tree, &["trajectories", "n_traj"], json!(n))?;
        }
    }
    if let Some(out) = &cli.out {
        config::set_key(&mut tree, &["output", "dir"], json!(out.to_string_lossy()))?;
    }
    if cli.scenario == Scenario::Sweep {
        run_sweep(tree, effective)
    } else {
        if let Some((path, _)) = sweep::find_axes(&tree).first() {
            return Err(Failure::Config(format!("{}: swept values need the sweep scenario", path.join("."))));
        }
        let cfg = config::from_tree(tree)?;
        let (echo, plan) = config::resolve(&cfg, cli.scenario)?;
        let outcome = run::run(&plan)?;
        let dir = PathBuf::from(&plan.out_dir);
        output::write_outcome(&dir, &outcome).map_err(io)?;
        output::write_json(&dir.join("config.resolved.json"), &serde_json::to_value(&echo).expect("config serialises")).map_err(io)
    }
}

fn run_sweep(mut tree: Value, inner: Scenario) -> Result<(), Failure> {
    if inner == Scenario::Sweep {
        return Err(Failure::Config("sweep.scenario: cannot be sweep".into()));
    }
    let axis = sweep::take_axis(&mut tree)?;
    let key = axis.key();
    let mut base = tree.clone();
    base.as_object_mut().expect("table").remove("sweep");
    config::set_key(&mut base, &["scenario"], json!(inner.name()))?;

    let mut plans = Vec::new();
    let mut echoes = Vec::new();
    for v in &axis.points {
        let mut t = base.clone();
        let path: Vec<&str> = axis.path.iter().map(String::as_str).collect();
        config::set_key(&mut t, &path, v.clone())?;
        let cfg = config::from_tree(t).map_err(|e| Failure::Config(format!("{e} (at {key} = {v})")))?;
        let (echo, plan) = config::resolve(&cfg, inner).map_err(|e| Failure::Config(format!("{e} (at {key} = {v})")))?;
        echoes.push(serde_json::to_value(&echo).expect("config serialises"));
        plans.push(plan);
    }
    let dir = PathBuf::from(&plans[0].out_dir);

    // points are independent; collect keeps their order
    let results: Vec<Result<run::Outcome, Failure>> = plans.par_iter().map(run::run).collect();
    let mut rows = Vec::with_capacity(results.len());
    for (v, r) in axis.points.iter().zip(results) {
        let o = r.map_err(|f| match f {
            Failure::Config(m) => Failure::Config(format!("{m} (at {key} = {v})")),
            Failure::Infeasible(m) => Failure::Infeasible(format!("{m} (at {key} = {v})")),
            Failure::Runtime(m) => Failure::Runtime(format!("{m} (at {key} = {v})")),
        })?;
        rows.push((v.clone(), o.metrics));
    }
    output::write_sweep(&dir, &key, &rows).map_err(io)?;
    let metrics = json!({
        "scenario": "sweep",
        "axis": key,
        "points": rows.iter().map(|(v, m)| json!({ "value": v, "metrics": m })).collect::<Vec<_>>(),
    });
    output::write_json(&dir.join("metrics.json"), &metrics).map_err(io)?;

    let mut echo = sweep::common(&echoes, Some(&base)).unwrap_or_else(|| json!({}));
    config::set_key(&mut echo, &["scenario"], json!("sweep"))?;
    config::set_key(&mut echo, &["sweep", "scenario"], json!(inner.name()))?;
    let path: Vec<&str> = axis.path.iter().map(String::as_str).collect();
    config::set_key(&mut echo, &path, axis.spec.clone())?;
    output::write_json(&dir.join("config.resolved.json"), &echo).map_err(io)
}

//! Command-line driver for the error sweeps.
//!
//! `tssq run <experiment>` evaluates one sweep and writes its error table
//! as CSV (stdout or `--out`), with a human-readable summary on stderr.
//! Identical configuration and seed reproduce identical CSV bytes.
//!
//! Exit codes: 0 on success, 2 when the reference failed to converge at
//! every distance (no statistics at all), 3 on configuration errors.

use std::fs::File;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use tssq_bench::experiments::{self, Experiment, ExperimentConfig, MethodSel, RunError};
use tssq_bench::report::{emit_csv, emit_summary, sort_records};

#[derive(Parser)]
#[command(name = "tssq", version, about = "Error sweeps for near-singular line integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and emit its error table.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Which sweep: prototype, filament or starfish.
    experiment: String,
    /// Basis-switch tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Panelization tolerance (filament only).
    #[arg(long)]
    eps: Option<f64>,
    /// Nodes per panel (open curves) or periodic grid size (closed).
    #[arg(long)]
    n: Option<usize>,
    /// Numerator offset of the prototype integrand.
    #[arg(long)]
    delta: Option<f64>,
    /// Sweep grid LO:HI:COUNT, log-spaced and inclusive.
    #[arg(long)]
    distances: Option<String>,
    /// Targets per distance.
    #[arg(long)]
    targets: Option<usize>,
    /// Seed of the target-placement stream.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// ssq, tssq or both.
    #[arg(long)]
    method: Option<String>,
    /// Also run the prototype with the raw Vandermonde leading coefficient.
    #[arg(long)]
    ablate_d1: bool,
}

fn parse_distances(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected LO:HI:COUNT, got `{spec}`"));
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("bad HI: {e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("bad COUNT: {e}"))?;
    if !(lo > 0.0 && hi >= lo) || count == 0 {
        return Err(format!("need 0 < LO <= HI and COUNT >= 1, got `{spec}`"));
    }
    Ok(experiments::logspace(lo, hi, count))
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let experiment = match args.experiment.as_str() {
        "prototype" => Experiment::Prototype,
        "filament" => Experiment::Filament,
        "starfish" => Experiment::Starfish,
        other => return Err(format!("unknown experiment `{other}`")),
    };
    let mut cfg = ExperimentConfig::preset(experiment);
    if let Some(t) = args.tol {
        cfg.tol = t;
    }
    if let Some(e) = args.eps {
        cfg.eps_panel = e;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    if let Some(spec) = &args.distances {
        cfg.distances = parse_distances(spec)?;
    }
    if let Some(k) = args.targets {
        cfg.targets_per_distance = k;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = &args.method {
        cfg.method = match m.as_str() {
            "ssq" => MethodSel::Ssq,
            "tssq" => MethodSel::Tssq,
            "both" => MethodSel::Both,
            other => return Err(format!("unknown method `{other}`")),
        };
    }
    cfg.ablate_d1 = args.ablate_d1;
    cfg.validate()?;
    Ok(cfg)
}

fn run_command(args: &RunArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let mut output = match experiments::run(&cfg) {
        Ok(out) => out,
        Err(e @ (RunError::Engine(_) | RunError::Targets(_))) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    sort_records(&mut output.records);

    let mut by_distance: std::collections::BTreeMap<u64, usize> = Default::default();
    for r in &output.records {
        *by_distance.entry(r.d.to_bits()).or_default() += r.targets_used;
    }
    let all_failed = by_distance.values().all(|&used| used == 0);

    let csv = |w: &mut dyn Write| emit_csv(&output.records, w);
    let written = match &args.out {
        Some(path) => File::create(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
            .and_then(|mut f| csv(&mut f)),
        None => csv(&mut std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    let _ = emit_summary(&output, &mut std::io::stderr().lock());

    if all_failed {
        eprintln!("error: reference did not converge at any distance");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(args) => run_command(&args),
    }
}

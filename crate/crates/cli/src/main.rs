use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use levyglass::ErrorKind;
use levyglass_cli::config::ExperimentConfig;
use levyglass_cli::runner;

/// Simulation and exact analysis of Glauber dynamics for heavy-tailed
/// mean-field spin glasses.
///
/// Exit codes: 0 ok, 2 configuration error, 3 resource cap, 4 structural
/// error (non-disjoint top edges, frustrated clusters, replay mismatch).
#[derive(Parser)]
#[command(name = "levyglass", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $LEVYGLASS_OUT/<name> or ./runs/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the system size.
    #[arg(long)]
    n: Option<usize>,
    /// Override the tail exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and export the coupling matrix.
    Sample(RunArgs),
    /// Structural-diagnostics pass rates over system sizes.
    Diagnose(RunArgs),
    /// One trajectory of the (restricted) Glauber dynamics.
    Simulate(RunArgs),
    /// Escape-time ensembles and the exponential approximation.
    Escape(RunArgs),
    /// Two-time autocorrelation vs. the replica overlap law.
    Autocorr(RunArgs),
    /// Well decomposition and critical-bond rates.
    Wells(RunArgs),
    /// Y-process rates, stationary law, and occupancy checks.
    Yproc(RunArgs),
    /// Skeleton-vs-Y finite-dimensional comparison.
    Compare(RunArgs),
    /// Exact spectral reports (gaps, mixing, blocks, congestion).
    Exact(RunArgs),
    /// Random-cluster reports (correlation identity, overlaps, uniformity).
    Fk(RunArgs),
    /// Re-run a manifest and verify byte-identical artifacts.
    Replay {
        /// Path to a manifest.json from a previous run.
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for the replayed run.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    if let Ok(workers) = std::env::var("LEVYGLASS_WORKERS") {
        if let Ok(count) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build_global();
        }
    }
    let cli = Cli::parse();
    if let Command::Replay { manifest, out } = &cli.command {
        return match runner::replay(manifest, out) {
            Ok(outcome) if outcome.identical() => {
                println!("replay ok: {} files identical", outcome.files_checked);
                ExitCode::SUCCESS
            }
            Ok(outcome) => {
                eprintln!("replay mismatch in {:?}", outcome.mismatched);
                ExitCode::from(4)
            }
            Err(e) => exit_for(e),
        };
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(e),
    }
}

fn exit_for(e: levyglass::Error) -> ExitCode {
    eprintln!("error: {e}");
    let code = match e.kind() {
        ErrorKind::Input => 2,
        ErrorKind::ResourceCap => 3,
        ErrorKind::Structural => 4,
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<(), levyglass::Error> {
    let (expected, args) = match &cli.command {
        Command::Sample(a) => ("sample", a),
        Command::Diagnose(a) => ("diagnose", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Escape(a) => ("escape", a),
        Command::Autocorr(a) => ("autocorr", a),
        Command::Wells(a) => ("wells", a),
        Command::Yproc(a) => ("yproc", a),
        Command::Compare(a) => ("compare", a),
        Command::Exact(a) => ("exact", a),
        Command::Fk(a) => ("fk", a),
        Command::Replay { .. } => unreachable!("handled in main"),
    };
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| levyglass::Error::Input(format!("read {:?}: {e}", args.config)))?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    if config.experiment.subcommand() != expected {
        return Err(levyglass::Error::Input(format!(
            "config kind {:?} does not match subcommand {expected:?}",
            config.experiment.subcommand()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.n {
        config.law.n = n;
    }
    if let Some(alpha) = args.alpha {
        config.law.alpha = alpha;
    }
    if let Some(beta) = args.beta {
        config.regime.beta = beta;
    }
    config.validate()?;
    let out = args.out.clone().unwrap_or_else(|| {
        let base = std::env::var("LEVYGLASS_OUT").unwrap_or_else(|_| "runs".into());
        PathBuf::from(base).join(&config.name)
    });
    let report = runner::run_experiment(&config, &out)?;
    println!(
        "{}: wrote {} (report.json, manifest.json)",
        report.experiment,
        out.display()
    );
    for (k, t) in &report.tests {
        let verdict = match t.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "n/a",
        };
        println!("  test {k}: stat {:.6} p {:?} [{verdict}]", t.statistic, t.p_value);
    }
    Ok(())
}

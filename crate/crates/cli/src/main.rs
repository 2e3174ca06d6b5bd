use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use flagrep_cli::{RunConfig, Settings};
use flagrep_core::experiment::Backend;
use flagrep_core::layout::LogicalState;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "flagrep", version, about = "Flag-qubit repetition-code memory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Place each circuit on the device and attach noise.
    BuildCircuit,
    /// Sample measurement records from the noisy circuits.
    Sample,
    /// Turn measurement records into syndrome arrays.
    Syndromes,
    /// Build the weighted matching graph.
    Graph,
    /// Decode every shot.
    Decode,
    /// Per-point statistics and the grid summary.
    Analyze,
    /// Run the whole grid in memory.
    Sweep,
}

#[derive(Args, Debug)]
struct Opts {
    /// JSON config; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    distance: Option<Vec<usize>>,
    #[arg(long, global = true, value_delimiter = ',')]
    flags: Option<Vec<usize>>,
    /// Logical states, e.g. `0_L,+_L`.
    #[arg(long, global = true, value_delimiter = ',')]
    state: Option<Vec<LogicalState>>,
    #[arg(long, global = true)]
    rounds: Option<usize>,
    #[arg(long, global = true)]
    shots: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Calibration JSON; the bundled average profile when absent.
    #[arg(long, global = true)]
    calib: Option<PathBuf>,
    /// Multiplies every calibrated error rate.
    #[arg(long, global = true)]
    noise_scale: Option<f64>,
    #[arg(long, global = true)]
    backend: Option<Backend>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let o = cli.opts;
    let flags = Settings {
        distances: o.distance,
        flags: o.flags,
        states: o.state,
        rounds: o.rounds,
        shots: o.shots,
        seed: o.seed,
        calib: o.calib,
        backend: o.backend,
        out: o.out,
        threads: o.threads,
        noise_scale: o.noise_scale,
    };
    let env_out = std::env::var_os("FLAGREP_OUT").map(PathBuf::from);
    let cfg = RunConfig::resolve(flags, o.config.as_deref(), env_out)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::BuildCircuit => {
            for d in flagrep_cli::build_circuits(&cfg)? {
                println!("{}", d.display());
            }
        }
        Command::Sample => flagrep_cli::sample_shots(&cfg)?,
        Command::Syndromes => flagrep_cli::extract_syndromes(&cfg)?,
        Command::Graph => flagrep_cli::build_graphs(&cfg)?,
        Command::Decode => flagrep_cli::decode(&cfg)?,
        Command::Analyze => print_summary(&flagrep_cli::analyze(&cfg)?),
        Command::Sweep => print_summary(&flagrep_cli::sweep(&cfg)?),
    }
    Ok(())
}

fn print_summary(report: &flagrep_core::analysis::ExperimentReport) {
    println!("flags distance failures shots rate");
    for s in &report.structures {
        let e = &s.logical_error;
        println!("{:5} {:8} {:8} {:5} {:.3e}", s.flags, s.distance, e.failures, e.shots, e.rate);
    }
    for (f, lam) in &report.suppression {
        match lam {
            Some(l) => println!("f={f} suppression factor {l:.3}"),
            None => println!("f={f} suppression factor undetermined"),
        }
    }
}

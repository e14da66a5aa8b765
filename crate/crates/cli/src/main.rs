use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use unsharp_core::Engine;
use unsharp_monitor::commands;
use unsharp_monitor::config::{Preset, RunConfig};
use unsharp_monitor::sweep::{self, Grid};

/// Simulates a driven two-level system monitored by sequences of unsharp
/// measurements and analyzes the resulting readout.
#[derive(Parser)]
#[command(name = "unsharp-monitor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory; writes trajectory.csv, spectrum.json and report.json.
    Simulate(RunArgs),
    /// Run a grid of configurations with several seeds each; writes sweep.csv.
    Sweep(SweepArgs),
    /// Process an existing trajectory CSV; writes spectrum.json and processed.csv.
    Analyze(AnalyzeArgs),
    /// Print regime quantities of a configuration as JSON without simulating.
    Report(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON config file; its fields override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Caption parameter set to start from.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_engine)]
    engine: Option<Engine>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of N-series to record.
    #[arg(long)]
    m_series: Option<usize>,
    /// Measurements per series.
    #[arg(long)]
    n_per_series: Option<u32>,
    /// Time between measurements, as a fraction of T_R.
    #[arg(long)]
    tau: Option<f64>,
    /// Also write a gnuplot script.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// JSON grid file with p0, dp, tau, n_per_series and seeds.
    #[arg(long, conflicts_with_all = ["p0", "dp", "taus", "ns"])]
    grid: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    p0: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    dp: Vec<f64>,
    #[arg(long = "taus", value_delimiter = ',')]
    taus: Vec<f64>,
    #[arg(long = "ns", value_delimiter = ',')]
    ns: Vec<u32>,
    /// Trajectories per grid point.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trajectory CSV to process.
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    gnuplot: bool,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    match s {
        "povm" => Ok(Engine::Povm),
        "dilation" => Ok(Engine::Dilation),
        _ => Err(format!("expected `povm` or `dilation`, got `{s}`")),
    }
}

impl RunArgs {
    /// Preset, then config file, then flags.
    fn layered(&self) -> Result<RunConfig> {
        let mut cfg = self.preset.map(Preset::config).unwrap_or_default();
        if let Some(path) = &self.config {
            cfg = cfg.overlay(RunConfig::from_file(path)?);
        }
        Ok(cfg.overlay(RunConfig {
            seed: self.seed,
            engine: self.engine,
            out_dir: self.out_dir.clone(),
            m_series: self.m_series,
            n_per_series: self.n_per_series,
            tau: self.tau,
            ..RunConfig::default()
        }))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let resolved = args.layered()?.resolve()?;
            for path in commands::simulate(&resolved, args.gnuplot)? {
                println!("{}", path.display());
            }
        }
        Command::Report(args) => {
            let resolved = args.layered()?.resolve()?;
            print!("{}", commands::report(&resolved)?);
        }
        Command::Analyze(args) => {
            for path in commands::analyze(&args.input, &args.out_dir, args.gnuplot)? {
                println!("{}", path.display());
            }
        }
        Command::Sweep(args) => {
            let base = args.run.layered()?;
            let grid = match &args.grid {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    sweep::grid_from_json(&text)?
                }
                None => {
                    Grid::with_defaults(&base, args.p0, args.dp, args.taus, args.ns, args.seeds)?
                }
            };
            let out_dir = base.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            println!("{}", sweep::sweep(&base, &grid, &out_dir)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

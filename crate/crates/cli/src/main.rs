//! `mzchaos`: spectral polynomial-chaos Burgers solver with
//! Mori-Zwanzig reduced models.

mod compare;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Scenario};
use run::{emit, render_stability_report, render_tensor, run_scenario, sig17};

#[derive(Parser)]
#[command(name = "mzchaos", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file (paper defaults when omitted).
    Run(RunArgs),
    /// Pick memory lengths (t0, t1) from the linear stability bracket.
    SelectMemory(SelectArgs),
    /// Print the nonzero Legendre triple-product entries as CSV.
    Tensor(TensorArgs),
    /// Compare two series files (second file is the reference).
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Output path (default: config `out`, else series.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// Largest wavenumber to stabilize.
    #[arg(long)]
    kmax: i64,
    /// Step size of the full system.
    #[arg(long)]
    dt: f64,
    /// Mean viscosity.
    #[arg(long)]
    nu0: f64,
    /// Viscosity uncertainty amplitude.
    #[arg(long)]
    nu1: f64,
}

#[derive(Args)]
struct TensorArgs {
    /// Number of Legendre polynomials.
    #[arg(long = "M")]
    m: usize,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

/// Prints to stdout, treating a closed pipe as a clean exit.
fn write_stdout(text: &str) -> Result<(), String> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(format!("cannot write to stdout: {e}")),
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::SelectMemory(args) => select_command(args),
        Command::Tensor(args) => {
            if args.m < 1 {
                return Err("M must be >= 1".into());
            }
            write_stdout(&render_tensor(args.m))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let csv = compare::compare_files(&args.a, &args.b)?;
            match args.out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => write_stdout(&csv)?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_command(args: RunArgs) -> Result<ExitCode, String> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&text).map_err(|e| e.to_string())?;
    if let Some(name) = &args.scenario {
        cfg.scenario = Scenario::parse(name)
            .ok_or_else(|| format!("unknown scenario `{name}`"))?;
    }
    if let Some(out) = args.out {
        cfg.out = Some(out);
    }

    let output = run_scenario(&cfg)?;
    let path = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("series.csv"));
    emit(&output, &path)?;
    if output.blow_up {
        eprintln!(
            "error: state became non-finite mid-run; partial series written to {}",
            path.display()
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn select_command(args: SelectArgs) -> Result<ExitCode, String> {
    use mzchaos_core::basis::TripleTensor;
    use mzchaos_core::chaos::ViscosityExpansion;
    use mzchaos_core::select::{select_memory_lengths, SelectGrid};

    let nu = ViscosityExpansion::new(args.nu0, args.nu1)
        .map_err(|e| e.to_string())?;
    let tensor = TripleTensor::<f64>::with_default_rule(7);
    let selection = select_memory_lengths(args.kmax, args.dt, &nu, &tensor, SelectGrid::default())
        .map_err(|e| e.to_string())?;
    let header = [
        ("kmax", args.kmax.to_string()),
        ("dt", sig17(args.dt)),
        ("nu0", sig17(args.nu0)),
        ("nu1", sig17(args.nu1)),
    ];
    write_stdout(&render_stability_report(&selection.report, &header))?;
    Ok(ExitCode::SUCCESS)
}

//! Command-line runner for the numerical experiment checks.
//!
//! `polyfock-cli list` prints the registered checks; `polyfock-cli run
//! <check>` executes one and emits a JSON report (stdout by default,
//! `--out` for a file), optionally a CSV metrics table (`--csv`) and a
//! gnuplot script for it (`--plot-script`).
//!
//! Exit codes: 0 when every metric passes, 1 when a metric fails, 2 for
//! configuration errors (unknown check, bad flag values), 3 when a
//! quadrature rule cannot resolve the requested integrand.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use polyfock_cli::checks::{run_check, CheckConfig, CliError, CHECKS};

#[derive(Parser)]
#[command(
    name = "polyfock-cli",
    about = "Numerical checks for truncated polyanalytic Fock space operators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one named check and emit its report.
    Run(RunArgs),
    /// List the registered checks.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Name of the check, as printed by `list`.
    check: String,
    /// Restrict a component sweep to this component (1-based).
    #[arg(long)]
    k: Option<usize>,
    /// Component count for the block checks.
    #[arg(long)]
    n: Option<usize>,
    /// Basis truncation per component.
    #[arg(long, default_value_t = 64)]
    trunc: usize,
    /// Distinguished phase-space point, as "RE,IM".
    #[arg(long, value_parser = parse_complex)]
    xi: Option<Complex64>,
    /// Time parameter for heat kernels and Gaussian symbols.
    #[arg(long)]
    t: Option<f64>,
    /// Radial order of the Gaussian-measure quadrature rule.
    #[arg(long, default_value_t = 80)]
    grid_radial: usize,
    /// Angular order of the Gaussian-measure quadrature rule.
    #[arg(long, default_value_t = 160)]
    grid_angular: usize,
    /// Per-axis order of Lebesgue-measure quadrature rules.
    #[arg(long, default_value_t = 40)]
    lebesgue_order: usize,
    /// Override the check's headline tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for the jittered sample points.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Relative error injected into one reference quantity (failure-path probe).
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the metrics as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write a gnuplot script reading the CSV (requires --csv).
    #[arg(long)]
    plot_script: Option<PathBuf>,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM but got '{s}'"))?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|e| format!("bad real part '{re}': {e}"))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|e| format!("bad imaginary part '{im}': {e}"))?;
    Ok(Complex64::new(re, im))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for (name, desc, _) in CHECKS {
                println!("{name:<24} {desc}");
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => match run(&args) {
            Ok(pass) => {
                if pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(CliError::Config(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Err(CliError::Quadrature(msg)) => {
                eprintln!("error: quadrature insufficient: {msg}");
                ExitCode::from(3)
            }
        },
    }
}

fn run(args: &RunArgs) -> Result<bool, CliError> {
    if args.plot_script.is_some() && args.csv.is_none() {
        return Err(CliError::Config(
            "--plot-script needs --csv, the script reads the CSV file".into(),
        ));
    }
    let cfg = CheckConfig {
        k: args.k,
        n: args.n,
        trunc: args.trunc,
        xi: args.xi,
        t: args.t,
        grid_radial: args.grid_radial,
        grid_angular: args.grid_angular,
        lebesgue_order: args.lebesgue_order,
        tol: args.tol,
        seed: args.seed,
        perturb: args.perturb,
    };

    let started = Instant::now();
    let mut report = run_check(&args.check, &cfg)?;
    report.runtime_ms = started.elapsed().as_millis() as u64;

    let json = report.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, &json)
            .map_err(|e| CliError::Config(format!("writing {}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, report.to_csv())
            .map_err(|e| CliError::Config(format!("writing {}: {e}", csv_path.display())))?;
        if let Some(script_path) = &args.plot_script {
            let csv_name = csv_path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| csv_path.display().to_string());
            std::fs::write(script_path, report.plot_script(&csv_name))
                .map_err(|e| CliError::Config(format!("writing {}: {e}", script_path.display())))?;
        }
    }
    Ok(report.overall_pass)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logit_cli::error::{EXIT_CONFIG, EXIT_OK};
use logit_cli::{run_analyze, run_simulate, run_sweep, run_verify, BetaSpec, CliError, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "logit-dynamics", version, about = "Exact and simulated analysis of logit dynamics in games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary summary, welfare, mixing time and bounds per beta
    Analyze(RunArgs),
    /// Run the full check suite; exit 2 if any check fails
    Verify(RunArgs),
    /// Coupled-chain coalescence campaigns
    Simulate(RunArgs),
    /// OR weight schedules and XOR hitting times over player counts
    Sweep(RunArgs),
    /// Print the effective configuration as TOML
    Config(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; built-in defaults when absent
    #[arg(long)]
    config: Option<PathBuf>,
    /// Game name (ck, coordination, anti_coordination, matching_pennies, stairs, or, xor)
    #[arg(long)]
    game: Option<String>,
    /// Player count for stairs, or and xor
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated a,b,c,d for the coordination games
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Option<Vec<f64>>,
    /// Comma-separated beta grid; entries are numbers or `c ln n`
    #[arg(long, value_delimiter = ',', value_parser = parse_beta)]
    beta: Option<Vec<BetaSpec>>,
    /// Target distance for mixing times
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Break one weight of the large-beta schedule (verify only)
    #[arg(long)]
    corrupt_schedule: bool,
}

fn parse_beta(s: &str) -> Result<BetaSpec, String> {
    BetaSpec::parse(s).map_err(|e| e.to_string())
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        game: args.game.clone(),
        n: args.n,
        params: args.params.clone(),
        beta: args.beta.clone(),
        epsilon: args.eps,
        seed: args.seed,
        out: args.out.clone(),
        corrupt_schedule: args.corrupt_schedule,
    });
    cfg.validate()?;
    Ok(cfg)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Analyze(a) => report(&run_analyze(&load(&a)?)?),
        Command::Verify(a) => {
            let summary = run_verify(&load(&a)?)?;
            report(std::slice::from_ref(&summary.report));
            println!("{} checks, {} failed", summary.total, summary.failures.len());
            for c in &summary.failures {
                eprintln!("FAIL [{}] {}: value {} bound {}", c.group, c.name, c.value, c.bound);
            }
            return Ok(summary.exit_code());
        }
        Command::Simulate(a) => report(&run_simulate(&load(&a)?)?.0),
        Command::Sweep(a) => report(&run_sweep(&load(&a)?)?),
        Command::Config(a) => print!("{}", load(&a)?.to_toml()?),
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hopf_lab::{cmd_check, cmd_solve, cmd_verify, LabError, Outcome, RunConfig, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "hopf-lab", version, about = "Barrier and Hopf-estimate pipeline on convex rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid resolution override.
    #[arg(long)]
    grid: Option<usize>,
    /// Exponent override for power laws.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Structural conditions on F and the Dini test.
    Check(Common),
    /// Harmonic and H-potentials of the ring.
    Solve(Common),
    /// Barrier, sub-solution, Hopf and comparison checks.
    Verify(Common),
}

type Stage = fn(&RunConfig, &std::path::Path) -> Result<Outcome, LabError>;

fn run(cli: Cli) -> anyhow::Result<u8> {
    let (args, cmd): (Common, Stage) = match cli.command {
        Command::Check(a) => (a, cmd_check),
        Command::Solve(a) => (a, cmd_solve),
        Command::Verify(a) => (a, cmd_verify),
    };
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.override_with(args.grid, args.p)?;
    let out = args.out.or_else(|| cfg.out.clone()).ok_or_else(|| anyhow::anyhow!("no output directory: pass --out or set `out`"))?;
    let outcome = cmd(&cfg, &out)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.downcast_ref::<LabError>().map_or(EXIT_CONFIG, LabError::exit_code))
        }
    }
}

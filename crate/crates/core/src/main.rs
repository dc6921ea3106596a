use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fpk_chaos::config::RunConfig;
use fpk_chaos::runner;
use fpk_chaos::Result;

#[derive(Parser)]
#[command(
    name = "fpk-chaos",
    version,
    about = "Wiener-chaos spectral solver for Kolmogorov equations of 1-D SPDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral Galerkin solution surface.
    Run(RunArgs),
    /// Finite-difference reference surface.
    Reference(RunArgs),
    /// Monte-Carlo mean surface with standard errors.
    Mc(RunArgs),
    /// Error metrics of surface A against reference surface B.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Runs every invariant suite and writes a pass/fail report.
    Validate {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let written = match cli.command {
        Command::Run(a) => runner::run_spectral(&load(&a)?)?,
        Command::Reference(a) => runner::run_reference(&load(&a)?)?,
        Command::Mc(a) => runner::run_mc(&load(&a)?)?,
        Command::Compare { a, b, out } => {
            let (report, path) = runner::run_compare(&a, &b, &out)?;
            println!("l2={} sup={}", report.l2, report.sup);
            vec![path]
        }
        Command::Validate { out } => {
            let result = runner::run_validate(&out);
            if let Ok(text) = std::fs::read_to_string(out.join("validation.txt")) {
                print!("{text}");
            }
            vec![result?.1]
        }
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use srng_lab::cli::{cmd_analyze, cmd_construct, cmd_oracle, cmd_rdp, cmd_sweep, CommandOutput, Options, Units};
use srng_lab::config::RunConfig;
use srng_lab::probability::DEFAULT_ATOM_CAP;

#[derive(Parser)]
#[command(name = "srng", about = "Self-random-number-generation bounds, constructions and sweeps")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; artifacts go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = UnitArg::Nats)]
    units: UnitArg,
    /// Exact rational arithmetic (default).
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Floating-point arithmetic.
    #[arg(long, global = true)]
    float: bool,
    /// Largest outcome space expanded atom by atom.
    #[arg(long, global = true, default_value_t = DEFAULT_ATOM_CAP)]
    caps: u128,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Spectrum table and rate reports.
    Analyze,
    /// Threshold and smooth-set mappings against their bounds.
    Construct,
    /// Brute-force optimum against the construction and the converse.
    Oracle,
    /// Rate-distortion-perception bounds.
    Rdp,
    /// Rates across blocklengths.
    Sweep,
}

#[derive(ValueEnum, Clone, Copy)]
enum UnitArg {
    Nats,
    Bits,
}

fn run(args: &Args) -> srng_lab::Result<CommandOutput> {
    let path = args.config.as_ref().ok_or_else(|| srng_lab::Error::Io("--config is required".into()))?;
    let cfg = RunConfig::parse(&std::fs::read_to_string(path)?)?;
    let opts = Options {
        units: match args.units {
            UnitArg::Nats => Units::Nats,
            UnitArg::Bits => Units::Bits,
        },
        exact: !args.float,
        cap: args.caps,
    };
    let output = match args.command {
        Command::Analyze => cmd_analyze(&cfg, &opts)?,
        Command::Construct => cmd_construct(&cfg, &opts)?,
        Command::Oracle => cmd_oracle(&cfg, &opts)?,
        Command::Rdp => cmd_rdp(&cfg, &opts)?,
        Command::Sweep => cmd_sweep(&cfg, &opts)?,
    };
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for a in &output.artifacts {
                std::fs::write(dir.join(&a.name), &a.contents)?;
            }
        }
        None => {
            for a in &output.artifacts {
                println!("== {} ==\n{}", a.name, a.contents);
            }
        }
    }
    Ok(output)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(out) if out.violations.is_empty() => ExitCode::SUCCESS,
        Ok(out) => {
            for v in &out.violations {
                eprintln!("violation: {v}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

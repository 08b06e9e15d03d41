use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stokes_string::acceptance;
use stokes_string::cli::{format_record, load_snapshot, parse_config, run_and_emit, TIMESERIES_HEADER};
use stokes_string::diagnostics::record;
use stokes_string::dynamics::Termination;
use stokes_string::spectral::Spectral;
use stokes_string::Error;

#[derive(Parser)]
#[command(name = "stokes-string", version, about = "Elastic string in 2-D Stokes flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a key = value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the diagnostics record of a snapshot file.
    Diagnose {
        #[arg(long)]
        snapshot: PathBuf,
        /// Config supplying the force parameters (defaults otherwise).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Verify,
}

const EXIT_ABORT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidArgument(_) | Error::NonClosable(_) => EXIT_CONFIG,
        _ => EXIT_ABORT,
    }
}

fn run(config: PathBuf, out: Option<PathBuf>) -> ExitCode {
    let mut cfg = match parse_config(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    cfg.out_dir = dir.display().to_string();
    match run_and_emit(&cfg, &dir) {
        Ok((output, _)) => {
            println!("{} after t = {:.6}, outputs in {}", output.termination.name(), output.final_state.t, dir.display());
            match output.termination {
                Termination::Completed => ExitCode::SUCCESS,
                _ => {
                    if let Some(reason) = output.abort {
                        eprintln!("abort: {reason}");
                    }
                    ExitCode::from(EXIT_ABORT)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn diagnose(snapshot: PathBuf, config: Option<PathBuf>) -> ExitCode {
    let params = match config.map(parse_config).transpose() {
        Ok(c) => c.unwrap_or_default().params,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = load_snapshot(&snapshot).and_then(|state| {
        let sp = Spectral::new(state.n())?;
        record(&sp, &state, &params)
    });
    match result {
        Ok(r) => {
            for (k, v) in TIMESERIES_HEADER.split(',').zip(format_record(&r).split(',')) {
                println!("{k:>14} = {v}");
            }
            for (k, (a, b)) in r.modes.iter().enumerate().skip(2) {
                println!("{:>14} = {a:.16e}\n{:>14} = {b:.16e}", format!("a{}", k + 1), format!("b{}", k + 1));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn verify() -> ExitCode {
    let results = acceptance::run_all(|r| println!("{}", r.line()));
    let failed = results.iter().filter(|r| !r.passed()).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ABORT)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Diagnose { snapshot, config } => diagnose(snapshot, config),
        Command::Verify => verify(),
    }
}

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tailorder_cli::commands::{
    cmd_figure1, cmd_replay, cmd_sample, cmd_tail_order, cmd_verify, Figure1Args, ReplayArgs, SampleArgs, TailOrderArgs,
    VerifyArgs,
};
use tailorder_cli::error::{CliError, CliResult};

/// Tail-order analysis of copula models.
#[derive(Parser)]
#[command(name = "tailorder", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a copula sample and write it as CSV.
    Sample(SampleArgs),
    /// Estimate the tail order of a model, analytically or by simulation.
    TailOrder(TailOrderArgs),
    /// Run the acceptance criteria and print a JSON report.
    Verify(VerifyArgs),
    /// Write the Dagum-simplex scatter data.
    Figure1(Figure1Args),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sample(a) => {
            let m = cmd_sample(&a)?;
            log::info!("wrote {} rows to {}", a.n, m.outputs[0].display());
        }
        Command::TailOrder(a) => print!("{}", cmd_tail_order(&a)?.0),
        Command::Verify(a) => {
            let (report, json) = cmd_verify(&a)?;
            print!("{json}");
            for c in &report.criteria {
                eprintln!("{}", c.summary_line());
            }
            if !report.passed {
                return Err(CliError::Verification(report.failed.join(", ")));
            }
        }
        Command::Figure1(a) => {
            let m = cmd_figure1(&a)?;
            for p in &m.outputs {
                log::info!("wrote {}", p.display());
            }
        }
        Command::Replay(a) => {
            let m = cmd_replay(&a)?;
            for p in &m.outputs {
                log::info!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use chained_steer::io::{run_plan, run_simulate, IoError, SimulateOptions};
use clap::{Parser, Subcommand};

/// State-switching sinusoidal motion planner for the second-order chained form.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a plan and print it as JSON.
    Plan { problem: PathBuf },
    /// Plan, simulate and write trajectory.csv, plan.json, report.json and plot.svg.
    Simulate {
        problem: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Integrator step; must divide every phase duration.
        #[arg(long)]
        dt: Option<f64>,
        /// Keep zero-amplitude phases.
        #[arg(long)]
        no_compress: bool,
    },
}

fn run(cli: Cli) -> Result<(), IoError> {
    match cli.command {
        Command::Plan { problem } => {
            println!("{}", run_plan(&problem)?);
        }
        Command::Simulate { problem, out, dt, no_compress } => {
            let report = run_simulate(&problem, &out, &SimulateOptions { dt, no_compress })?;
            println!("{}", serde_json::to_string_pretty(&report).expect("reports always serialize"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

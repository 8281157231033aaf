use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use chartforce_cli::batch::{self, CliError};
use chartforce_cli::{server, LOG_ENV};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chartforce", version, about = "Turn static vector charts into manipulable scenes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer a scene document from a chart.
    Parse {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a manipulation script, streaming frames per command.
    Run {
        /// Chart or scene document.
        input: PathBuf,
        script: PathBuf,
        #[arg(long)]
        frames: PathBuf,
        #[arg(long = "final")]
        final_out: PathBuf,
    },
    /// Write a synthetic chart and its ground truth (`<out>.meta.json`).
    Generate {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the session protocol over WebSocket at `/ws`.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Parse { input, out } => {
            for w in batch::parse(&input, &out)? {
                eprintln!("warning: {w}");
            }
        }
        Command::Run { input, script, frames, final_out } => {
            let summary = batch::run(&input, &script, &frames, &final_out)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            log::info!("{} steps applied", summary.steps);
        }
        Command::Generate { spec, out } => {
            let meta = batch::generate(&spec, &out)?;
            log::info!("metadata written to {}", meta.display());
        }
        Command::Serve { port, host } => {
            let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io { path: "tokio runtime".into(), source })?;
            runtime
                .block_on(server::serve(SocketAddr::new(host, port)))
                .map_err(|source| CliError::Io { path: format!("{host}:{port}").into(), source })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use triage_cli::commands;
use triage_cli::config::{parse_pairs, RunConfig};
use triage_cli::serve;

#[derive(Parser)]
#[command(
    name = "triage",
    version,
    about = "Train, evaluate and serve helpdesk ticket classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split, train, evaluate on the held-out part and write an artifact.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Extra `key=value` settings applied after the config file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Score a saved artifact on a labeled file.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Config supplying column names and delimiter.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Classify one description.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        text: String,
    },
    /// Run the bagging, boosting and voting comparison suites.
    Bench {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Serve POST /classify and GET /health.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut config = match path {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let pairs = parse_pairs(&overrides.join("\n")).context("--set")?;
    config.apply(&pairs).context("--set")?;
    Ok(config)
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            data,
            config,
            out,
            set,
        } => {
            let config = load_config(config.as_deref(), &set)?;
            print!("{}", commands::train(&data, &config, &out)?.text);
        }
        Command::Evaluate {
            data,
            model,
            config,
            json,
        } => {
            let config = load_config(config.as_deref(), &[])?;
            let (report, warnings) = commands::evaluate(&data, &model, &config)?;
            warn(&warnings);
            print!(
                "{}",
                triage_core::evaluate::comparison_table(std::slice::from_ref(&report))
            );
            if let Some(path) = json {
                std::fs::write(&path, report.to_json())
                    .with_context(|| format!("{}", path.display()))?;
            }
        }
        Command::Predict { model, text } => {
            let (prediction, warnings) = commands::predict(&model, &text)?;
            warn(&warnings);
            println!("{}", commands::format_prediction(&prediction));
        }
        Command::Bench { data, config, set } => {
            let config = load_config(config.as_deref(), &set)?;
            print!("{}", commands::bench(&data, &config)?.text);
        }
        Command::Serve { model, port, host } => {
            let (pipeline, loaded) = commands::load_model(&model)?;
            warn(&loaded.warnings);
            let router = serve::router(pipeline, &loaded.artifact);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve::run(router, SocketAddr::new(host, port)))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // one line: the chain joined by ": "
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};
use weakgrad::experiment::render;
use weakgrad::{run_experiment, ExperimentConfig};

/// Gradient estimation experiments on stochastic networks.
#[derive(Parser, Debug)]
#[command(name = "weakgrad", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one or more estimators on a model and write a result table.
    #[command(allow_negative_numbers = true)]
    Run(RunArgs),
    /// Resolve and validate a configuration, then print it as TOML.
    #[command(allow_negative_numbers = true)]
    Check(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML file with the same field names as the flags (snake_case).
    /// Flags override values from the file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// mm1 | san_bridge
    #[arg(long)]
    model: Option<String>,

    #[arg(long)]
    n_customers: Option<i64>,

    /// Mean service time (queue) or mean arc duration (activity network).
    #[arg(long)]
    service_mean: Option<f64>,

    #[arg(long)]
    arrival_mean: Option<f64>,

    /// Comma-separated list of wd, iswd, sf, fd.
    #[arg(long)]
    estimator: Option<String>,

    /// Replications per estimator.
    #[arg(long, conflicts_with = "time_budget_s")]
    n: Option<i64>,

    /// Wall-clock budget per estimator, in seconds.
    #[arg(long)]
    time_budget_s: Option<f64>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    confidence: Option<f64>,

    #[arg(long)]
    fd_step: Option<f64>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// csv | json
    #[arg(long)]
    format: Option<String>,

    /// Spread replications across threads (fixed-n runs only).
    #[arg(long)]
    parallel: bool,

    /// Leave wall-time and efficiency fields empty so fixed-n outputs are
    /// byte-for-byte reproducible.
    #[arg(long)]
    redact_timing: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut table = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                text.parse::<Table>()
                    .with_context(|| format!("parsing config file {}", path.display()))?
            }
            None => Table::new(),
        };

        let mut set = |key: &str, v: Value| {
            table.insert(key.to_string(), v);
        };
        if let Some(v) = &self.model {
            set("model", Value::String(v.clone()));
        }
        if let Some(v) = self.n_customers {
            set("n_customers", Value::Integer(v));
        }
        if let Some(v) = self.service_mean {
            set("service_mean", Value::Float(v));
        }
        if let Some(v) = self.arrival_mean {
            set("arrival_mean", Value::Float(v));
        }
        if let Some(v) = &self.estimator {
            set("estimator", Value::String(v.clone()));
        }
        if let Some(v) = self.seed {
            let v = i64::try_from(v).context("--seed does not fit the config file's integer range")?;
            set("seed", Value::Integer(v));
        }
        if let Some(v) = self.confidence {
            set("confidence", Value::Float(v));
        }
        if let Some(v) = self.fd_step {
            set("fd_step", Value::Float(v));
        }
        if let Some(v) = &self.out {
            set("out", Value::String(v.display().to_string()));
        }
        if let Some(v) = &self.format {
            set("format", Value::String(v.clone()));
        }
        if self.parallel {
            set("parallel", Value::Boolean(true));
        }
        // A budget flag replaces whichever budget the file chose.
        if let Some(v) = self.n {
            table.remove("time_budget_s");
            table.insert("n".into(), Value::Integer(v));
        }
        if let Some(v) = self.time_budget_s {
            table.remove("n");
            table.insert("time_budget_s".into(), Value::Float(v));
        }
        // The service distribution table wins over a mean only when the
        // mean came from the same source; an explicit flag always wins.
        if self.service_mean.is_some() {
            table.remove("service_dist");
        }
        if self.arrival_mean.is_some() {
            table.remove("arrival_dist");
        }

        let config: ExperimentConfig = Value::Table(table)
            .try_into()
            .context("invalid configuration")?;
        config.validate()?;
        Ok(config)
    }
}

/// Writes through a temporary file in the destination directory, then
/// renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let reports = run_experiment(&config)?;
            let text = render(&config, &reports, args.redact_timing);
            match &config.out {
                Some(path) => write_atomic(path, &text)?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
        Command::Check(args) => {
            let config = args.resolve()?;
            print!("{}", toml::to_string(&config)?);
        }
    }
    Ok(())
}

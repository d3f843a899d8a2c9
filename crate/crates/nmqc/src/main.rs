use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nmqc::config::{self, ConfigError, JobConfig, Task};
use nmqc::{run_task, Format};

#[derive(Parser)]
#[command(name = "nmqc", version, about = "Bell inequalities from linear-side-processing MBQC")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Job configuration file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Use a bundled instance instead of a config file: h3, or3, or3_x1x3, nand2.
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "config")]
    instance: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Random optimizer starts.
    #[arg(long, global = true)]
    starts: Option<usize>,

    /// Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<u64>,

    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Optimizer gradient-norm tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Party (1-based) held local for the tripartite bound; defaults to the last.
    #[arg(long, global = true)]
    local_party: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Exact maximum over local deterministic strategies.
    ClassicalBound,
    /// Maximum over planar measurements on the GHZ state.
    QuantumBound,
    /// Maximum with one party answering deterministically.
    TripartiteBound,
    /// Monte Carlo run of the protocol.
    Simulate,
    /// Classical, quantum and tripartite bounds with the rendered inequality.
    Report,
}

#[derive(ValueEnum, Clone, Copy)]
enum OutputFormat {
    Text,
    Json,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::ClassicalBound => Task::ClassicalBound,
            Command::QuantumBound => Task::QuantumBound,
            Command::TripartiteBound => Task::TripartiteBound,
            Command::Simulate => Task::Simulate,
            Command::Report => Task::Report,
        }
    }
}

fn load(cli: &Cli) -> Result<JobConfig, ConfigError> {
    let mut job = match (&cli.config, &cli.instance) {
        (Some(path), _) => config::load_config(path)?,
        (None, Some(name)) => config::bundled(name)?,
        (None, None) => {
            return Err(ConfigError::Field {
                field: "--config".into(),
                message: "a config file or --instance is required".into(),
            })
        }
    };
    let opts = &mut job.options;
    if let Some(s) = cli.seed {
        opts.seed = s;
    }
    if let Some(s) = cli.starts {
        opts.starts = s;
    }
    if let Some(t) = cli.trials {
        opts.trials = t;
    }
    if let Some(w) = cli.workers {
        opts.workers = w;
    }
    if let Some(t) = cli.tolerance {
        opts.tolerance = t;
    }
    if let Some(k) = cli.local_party {
        opts.local_party = Some(k);
    }
    Ok(job)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let job = load(cli).map_err(|e| Failure::Config(e.to_string()))?;
    let task = cli
        .command
        .map(Command::task)
        .or(job.task)
        .ok_or_else(|| Failure::Config("no subcommand given and the config names no task".into()))?;
    let output = run_task(&job, task).map_err(|e| match e {
        nmqc_core::Error::InvalidArgument(_) => Failure::Config(e.to_string()),
        other => Failure::Runtime(other.to_string()),
    })?;
    let format = match cli.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Json => Format::Json,
    };
    print!("{}", output.render(format));
    Ok(output.converged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("nmqc: optimizer did not reach the gradient tolerance");
            ExitCode::from(3)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("nmqc: config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("nmqc: {msg}");
            ExitCode::from(1)
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use adaptive_lb::presets::{self, CATALOG};
use adaptive_lb::sweep::{run_sweep, seed_list, Axis, CsvOptions, Execution, SweepResult, SweepSpec};
use adaptive_lb::{load_config, Error, ScenarioConfig};

#[derive(Parser)]
#[command(name = "adaptive-lb", version, about = "Multi-agent adaptive load balancing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Output {
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add per-agent mean/deviation columns.
    #[arg(long)]
    agent_stats: bool,
    /// Run cells one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the file.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Run a catalog experiment.
    Preset {
        name: String,
        /// Number of seeds (1..=k).
        #[arg(long)]
        seeds: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Sweep Ω parameters over a scenario file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `w=<list>`, `n=<list>`, `n=2..10`, or `n@<group>=<list>`.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[arg(long, default_value_t = adaptive_lb::sweep::DEFAULT_SEEDS)]
        seeds: usize,
        #[command(flatten)]
        output: Output,
    },
    /// List the catalog experiments.
    ListPresets,
}

/// An unreadable scenario file is bad input, not a failed run.
fn read_config(path: &Path) -> Result<ScenarioConfig, Error> {
    load_config(path).map_err(|e| match e {
        Error::Io { path, source } => Error::Validation {
            field: "config".to_string(),
            message: format!("cannot read {}: {source}", path.display()),
        },
        other => other,
    })
}

fn execute(command: Command) -> Result<(), Error> {
    let (spec, output) = match command {
        Command::ListPresets => {
            for (name, description) in CATALOG {
                println!("{name:<24} {description}");
            }
            return Ok(());
        }
        Command::Run { config, seed, output } => {
            let config = read_config(&config)?;
            let seed = seed.unwrap_or(config.seed);
            (SweepSpec::single(config, vec![seed]), output)
        }
        Command::Preset { name, seeds, output } => {
            let mut spec = presets::preset(&name)?;
            if let Some(k) = seeds {
                spec = spec.with_seeds(seed_list(k));
            }
            (spec, output)
        }
        Command::Sweep {
            config,
            axes,
            seeds,
            output,
        } => {
            let base = read_config(&config)?;
            let axes = axes
                .iter()
                .map(|a| a.parse::<Axis>())
                .collect::<Result<Vec<_>, _>>()?;
            (SweepSpec::from_axes(&base, &axes, seed_list(seeds))?, output)
        }
    };
    let execution = if output.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = run_sweep(&spec, execution)?;
    write(&result, &output)
}

fn write(result: &SweepResult, output: &Output) -> Result<(), Error> {
    let options = CsvOptions {
        agent_stats: output.agent_stats,
        ..CsvOptions::standard()
    };
    match &output.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            result.write_csv(BufWriter::new(file), options)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            result.write_csv(&mut lock, options)?;
            lock.flush().map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 on success, 2 for configuration problems (bad file,
//! bad flag, invalid field), 3 for runtime failures (agent invariant
//! breach, non-finite value, unwritable output).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phieb::agent::{ActionSelection, Architecture};
use phieb::bonus::PseudoCountVariant;
use phieb_harness::config::{ConfigFileError, EnvConfig, ExperimentConfig};
use phieb_harness::oracle;
use phieb_harness::runner::{self, RunError};

/// Prints one line to stdout. Exits quietly when the consumer has
/// closed the pipe (e.g. `phieb run ... | head`), which must not be
/// reported as a failure.
fn emit(line: impl Display) {
    let mut out = io::stdout().lock();
    if let Err(err) = writeln!(out, "{line}") {
        if err.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {err}");
        std::process::exit(3);
    }
}

#[derive(Parser)]
#[command(
    name = "phieb",
    version,
    about = "Count-based exploration benchmarks: train agents, sweep bonus scales, query oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config, writing CSV learning curves.
    Run(RunArgs),
    /// Run the config once per beta value and tabulate the results.
    Sweep(SweepArgs),
    /// Brute-force reference computations, for tests and spot checks.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: PathBuf,
    /// Swap in this environment with default parameters
    /// (sparse_chain, keyed_rooms, or dense_grid), keeping the
    /// config's feature map.
    #[arg(long)]
    env: Option<String>,
    /// Agent architecture: split, combined, or baseline.
    #[arg(long)]
    agent: Option<String>,
    /// Bonus scale.
    #[arg(long)]
    beta: Option<f64>,
    /// Pseudo-count variant: exact or ratio.
    #[arg(long)]
    variant: Option<String>,
    /// Action selection: egreedy or boltzmann.
    #[arg(long)]
    selection: Option<String>,
    /// Training budget in agent steps.
    #[arg(long)]
    frames: Option<u64>,
    /// Number of independently seeded trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: PathBuf,
    /// Beta values to sweep, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    betas: Vec<f64>,
    /// Training budget in agent steps.
    #[arg(long)]
    frames: Option<u64>,
    /// Number of independently seeded trials per beta.
    #[arg(long)]
    trials: Option<u64>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; each beta writes to a subdirectory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Per-feature probabilities from activation histories.
    Kt {
        /// JSON array of per-feature activation arrays,
        /// e.g. '[[true,false,true],[false,false,false]]'.
        histories: String,
    },
    /// Direct-product visit density from a table of activation counts.
    Density {
        /// JSON object mapping feature id to activation count,
        /// e.g. '{"0":2,"7":0}'.
        #[arg(long)]
        counts: String,
        /// Number of observations the counts come from.
        #[arg(long)]
        t: u64,
        /// Active feature ids, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        active: Vec<u64>,
    },
    /// Exact per-state visit counts of a tabular trajectory.
    Counts {
        /// State ids in visit order, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        trajectory: Vec<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(cmd) => cmd_oracle(cmd).map_err(RunError::Config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn parse_architecture(value: &str) -> Result<Architecture, ConfigFileError> {
    match value {
        "split" => Ok(Architecture::Split),
        "combined" => Ok(Architecture::Combined),
        "baseline" => Ok(Architecture::Baseline),
        _ => Err(ConfigFileError::BadFlag {
            flag: "--agent",
            value: value.to_owned(),
        }),
    }
}

fn parse_variant(value: &str) -> Result<PseudoCountVariant, ConfigFileError> {
    match value {
        "exact" => Ok(PseudoCountVariant::Exact),
        "ratio" => Ok(PseudoCountVariant::Ratio),
        _ => Err(ConfigFileError::BadFlag {
            flag: "--variant",
            value: value.to_owned(),
        }),
    }
}

fn parse_selection(value: &str) -> Result<ActionSelection, ConfigFileError> {
    match value {
        "egreedy" => Ok(ActionSelection::EGreedy),
        "boltzmann" => Ok(ActionSelection::Boltzmann),
        _ => Err(ConfigFileError::BadFlag {
            flag: "--selection",
            value: value.to_owned(),
        }),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), RunError> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if let Some(name) = &args.env {
        config.env = EnvConfig::default_for(name, config.env.map()).ok_or_else(|| {
            ConfigFileError::BadFlag {
                flag: "--env",
                value: name.clone(),
            }
        })?;
    }
    if let Some(agent) = &args.agent {
        config.agent.architecture = Some(parse_architecture(agent)?);
    }
    if let Some(beta) = args.beta {
        config.agent.beta = Some(beta);
    }
    if let Some(variant) = &args.variant {
        config.agent.variant = Some(parse_variant(variant)?);
    }
    if let Some(selection) = &args.selection {
        config.agent.selection = Some(parse_selection(selection)?);
    }
    if let Some(frames) = args.frames {
        config.frames = frames;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.out = out;
    }

    let summary = runner::run_experiment(&config)?;
    for file in &summary.files {
        emit(format_args!("wrote {}", file.display()));
    }
    emit(format_args!(
        "final-quartile return: {}",
        runner::final_quartile_mean(&summary.trials)
    ));
    match summary.eval_mean {
        Some(mean) => emit(format_args!("eval return: {mean}")),
        None => emit("eval return: (no evaluation episodes)"),
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), RunError> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if let Some(frames) = args.frames {
        config.frames = frames;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.out = out;
    }

    let rows = runner::beta_sweep(&config, &args.betas)?;
    emit("beta,final_quartile_return,eval_return");
    for row in &rows {
        match row.eval_return {
            Some(eval) => emit(format_args!("{},{},{eval}", row.beta, row.final_quartile_return)),
            None => emit(format_args!("{},{},", row.beta, row.final_quartile_return)),
        }
    }
    emit(format_args!("wrote {}", config.out.join("sweep.csv").display()));
    Ok(())
}

fn cmd_oracle(cmd: OracleCommand) -> Result<(), ConfigFileError> {
    match cmd {
        OracleCommand::Kt { histories } => {
            let histories: Vec<Vec<bool>> =
                serde_json::from_str(&histories).map_err(|source| ConfigFileError::JsonArg {
                    flag: "histories",
                    source,
                })?;
            let probs = oracle::oracle_kt(&histories);
            emit(serde_json::to_string(&probs).expect("probabilities serialise"));
        }
        OracleCommand::Density { counts, t, active } => {
            let counts: BTreeMap<u64, u64> =
                serde_json::from_str(&counts).map_err(|source| ConfigFileError::JsonArg {
                    flag: "--counts",
                    source,
                })?;
            emit(oracle::oracle_density(&counts, t, &active));
        }
        OracleCommand::Counts { trajectory } => {
            let counts = oracle::oracle_tabular_counts(&trajectory);
            emit(serde_json::to_string(&counts).expect("counts serialise"));
        }
    }
    Ok(())
}

//! Multi-trial experiment execution and CSV output.
//!
//! An experiment is `trials` independently seeded training runs of the
//! same configuration.  Trials run on separate threads; aggregation and
//! file output happen in a single-threaded pass afterwards, so output is
//! byte-for-byte reproducible for a given config.
//!
//! Files written under the output directory:
//!
//! * `trial_NNN.csv` — one learning-curve row per training episode;
//! * `summary.csv` — mean/min/max/std of the extrinsic return per
//!   episode index across trials;
//! * `eval.csv` — greedy evaluation returns collected after training;
//! * `sweep.csv` — one row per beta value (beta sweeps only).

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use phieb::agent::{Agent, AgentError, NonFiniteValue};

use crate::config::{ConfigFileError, ExperimentConfig};

/// Column header shared by every per-trial CSV file.
pub const CSV_HEADER: &str =
    "trial,episode,global_step,ext_return,int_return,steps,distinct_features,mean_bonus,epsilon";

/// One training episode as it appears in a trial CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// Trial index within the experiment.
    pub trial: u64,
    /// Episode index within the trial.
    pub episode: u64,
    /// Agent steps taken in the whole trial after this episode.
    pub global_step: u64,
    /// Sum of extrinsic rewards in the episode.
    pub ext_return: f64,
    /// Sum of exploration bonuses in the episode.
    pub int_return: f64,
    /// Transitions taken in the episode.
    pub steps: u64,
    /// Distinct feature ids the agent has seen so far.
    pub distinct_features: u64,
    /// Average bonus per step in the episode.
    pub mean_bonus: f64,
    /// Exploration rate in force when the episode ended.
    pub epsilon: f64,
}

/// Everything one trial produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Trial index within the experiment.
    pub trial: u64,
    /// One record per training episode, in order.
    pub records: Vec<EpisodeRecord>,
    /// Extrinsic return of each greedy evaluation episode.
    pub eval_returns: Vec<f64>,
}

/// Per-episode-index statistics across trials, as written to
/// `summary.csv`.  Trials may run different episode counts (the frame
/// budget can end a trial early), so `trials` records how many
/// contributed to this row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    /// Episode index.
    pub episode: u64,
    /// Number of trials that reached this episode.
    pub trials: u64,
    /// Mean extrinsic return across those trials.
    pub mean: f64,
    /// Minimum extrinsic return.
    pub min: f64,
    /// Maximum extrinsic return.
    pub max: f64,
    /// Sample standard deviation (zero with a single trial).
    pub std: f64,
}

/// Results of a full experiment, with the paths of every file written.
#[derive(Debug)]
pub struct ExperimentSummary {
    /// Per-trial results, ordered by trial index.
    pub trials: Vec<TrialResult>,
    /// Per-episode-index statistics across trials.
    pub per_episode: Vec<EpisodeSummary>,
    /// Mean greedy-evaluation return pooled over all trials, if any
    /// evaluation episodes ran.
    pub eval_mean: Option<f64>,
    /// Every file written, trial CSVs first.
    pub files: Vec<PathBuf>,
}

/// One row of a beta sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// The bonus scale this row was trained with.
    pub beta: f64,
    /// Mean extrinsic return over the final quarter of each trial's
    /// episodes, pooled across trials.
    pub final_quartile_return: f64,
    /// Mean greedy-evaluation return, if evaluation episodes ran.
    pub eval_return: Option<f64>,
}

/// Anything that can stop an experiment.
#[derive(Debug)]
pub enum RunError {
    /// The configuration is invalid; the run never started.
    Config(ConfigFileError),
    /// The agent reported an error mid-run (a non-increasing density,
    /// or an invalid configuration that slipped past validation).
    Agent {
        /// The trial that failed.
        trial: u64,
        /// The underlying agent error.
        source: AgentError,
    },
    /// A weight, trace, or density factor left the finite range.
    NonFinite {
        /// The trial that failed.
        trial: u64,
        /// The episode after which the check tripped.
        episode: u64,
        /// Where the bad value sits.
        source: NonFiniteValue,
    },
    /// A result file could not be written.
    Io {
        /// The path that failed.
        path: PathBuf,
        /// The underlying I/O error.
        source: std::io::Error,
    },
}

impl RunError {
    /// The process exit code the CLI maps this error to: 2 for config
    /// problems, 3 for anything that broke at runtime.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(source) => write!(f, "config error: {source}"),
            RunError::Agent { trial, source } => write!(f, "trial {trial} failed: {source}"),
            RunError::NonFinite {
                trial,
                episode,
                source,
            } => write!(
                f,
                "trial {trial} produced a non-finite value after episode {episode}: {source}"
            ),
            RunError::Io { path, source } => {
                write!(f, "cannot write {}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            RunError::Config(source) => Some(source),
            RunError::Agent { source, .. } => Some(source),
            RunError::NonFinite { .. } => None,
            RunError::Io { source, .. } => Some(source),
        }
    }
}

impl From<ConfigFileError> for RunError {
    fn from(err: ConfigFileError) -> Self {
        RunError::Config(err)
    }
}

/// The environment seed for one episode of one trial: derived from the
/// trial seed by a fixed-odd-constant xor so that trial `n + 1`'s
/// episode seeds do not collide with trial `n`'s.
pub fn episode_seed(trial_seed: u64, episode: u64) -> u64 {
    (trial_seed ^ 0x9E37_79B9_7F4A_7C15).wrapping_add(episode)
}

/// Runs one trial to completion: training episodes until the episode cap
/// or the frame budget is exhausted, then greedy evaluation episodes.
/// The agent seed is `config.seed + trial`.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialResult, RunError> {
    let mut env = config.env.build()?;
    let trial_seed = config.seed.wrapping_add(trial);
    let mut agent = Agent::new(config.agent_config(), env.num_actions(), trial_seed)
        .map_err(|source| RunError::Agent {
            trial,
            source: AgentError::Config(source),
        })?;
    let cap = env.step_cap();

    let mut records = Vec::new();
    let mut episode = 0u64;
    while episode < config.episodes && agent.step_count() < config.frames {
        let stats = agent
            .run_episode(env.as_mut(), episode_seed(trial_seed, episode), cap)
            .map_err(|source| RunError::Agent { trial, source })?;
        agent.check_finite().map_err(|source| RunError::NonFinite {
            trial,
            episode,
            source,
        })?;
        records.push(EpisodeRecord {
            trial,
            episode,
            global_step: agent.step_count(),
            ext_return: stats.ext_return,
            int_return: stats.int_return,
            steps: stats.steps,
            distinct_features: stats.distinct_features as u64,
            mean_bonus: stats.int_return / stats.steps as f64,
            epsilon: agent.epsilon(),
        });
        episode += 1;
    }

    let mut eval_returns = Vec::new();
    for eval in 0..config.eval_episodes {
        let stats = agent.eval_episode(
            env.as_mut(),
            episode_seed(trial_seed, config.episodes + eval),
            cap,
        );
        eval_returns.push(stats.ext_return);
    }

    Ok(TrialResult {
        trial,
        records,
        eval_returns,
    })
}

/// Runs every trial of the experiment on its own thread and returns the
/// results ordered by trial index.  No files are written.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialResult>, RunError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.trials)
            .map(|trial| scope.spawn(move || run_trial(config, trial)))
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("trial thread panicked"))
            .collect()
    })
}

/// Validates the configuration, runs every trial, and writes the trial,
/// summary, and evaluation CSV files under `config.out`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary, RunError> {
    config.validate()?;
    let trials = run_trials(config)?;

    create_dir(&config.out)?;
    let mut files = Vec::new();
    for trial in &trials {
        let path = config.out.join(format!("trial_{:03}.csv", trial.trial));
        write_file(&path, &render_trial_csv(trial))?;
        files.push(path);
    }

    let per_episode = summarize(&trials);
    let summary_path = config.out.join("summary.csv");
    write_file(&summary_path, &render_summary_csv(&per_episode))?;
    files.push(summary_path);

    let eval_path = config.out.join("eval.csv");
    write_file(&eval_path, &render_eval_csv(&trials))?;
    files.push(eval_path);

    Ok(ExperimentSummary {
        eval_mean: eval_mean(&trials),
        per_episode,
        trials,
        files,
    })
}

/// Runs the experiment once per beta value (ascending), each into its own
/// subdirectory of `config.out`, and writes `sweep.csv` tabulating the
/// results.
pub fn beta_sweep(config: &ExperimentConfig, betas: &[f64]) -> Result<Vec<SweepRow>, RunError> {
    config.validate()?;
    let mut betas = betas.to_vec();
    betas.sort_by(f64::total_cmp);

    let mut rows = Vec::new();
    for beta in betas {
        let mut sub = config.clone();
        sub.agent.beta = Some(beta);
        sub.out = config.out.join(format!("beta_{beta}"));
        let summary = run_experiment(&sub)?;
        rows.push(SweepRow {
            beta,
            final_quartile_return: final_quartile_mean(&summary.trials),
            eval_return: summary.eval_mean,
        });
    }

    let path = config.out.join("sweep.csv");
    write_file(&path, &render_sweep_csv(&rows))?;
    Ok(rows)
}

/// Per-episode-index statistics of the extrinsic return across trials.
/// The result has one row per episode index up to the longest trial;
/// rows past a shorter trial's end simply draw on fewer trials.
pub fn summarize(trials: &[TrialResult]) -> Vec<EpisodeSummary> {
    let longest = trials.iter().map(|t| t.records.len()).max().unwrap_or(0);
    (0..longest)
        .map(|index| {
            let returns: Vec<f64> = trials
                .iter()
                .filter_map(|t| t.records.get(index))
                .map(|r| r.ext_return)
                .collect();
            let n = returns.len() as f64;
            let mean = returns.iter().sum::<f64>() / n;
            let min = returns.iter().copied().fold(f64::INFINITY, f64::min);
            let max = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let std = if returns.len() > 1 {
                let ss: f64 = returns.iter().map(|r| (r - mean) * (r - mean)).sum();
                (ss / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            EpisodeSummary {
                episode: index as u64,
                trials: returns.len() as u64,
                mean,
                min,
                max,
                std,
            }
        })
        .collect()
}

/// The last quarter of a trial's episodes (at least one, when any exist).
pub fn final_quartile(records: &[EpisodeRecord]) -> &[EpisodeRecord] {
    let keep = (records.len() / 4).max(1).min(records.len());
    &records[records.len() - keep..]
}

/// Mean extrinsic return over every trial's final quartile, pooled.
/// `NaN` when there are no episodes at all.
pub fn final_quartile_mean(trials: &[TrialResult]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0u64;
    for trial in trials {
        for record in final_quartile(&trial.records) {
            sum += record.ext_return;
            n += 1;
        }
    }
    sum / n as f64
}

/// Mean greedy-evaluation return pooled over all trials, or `None` when
/// no evaluation episodes ran.
pub fn eval_mean(trials: &[TrialResult]) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0u64;
    for trial in trials {
        for r in &trial.eval_returns {
            sum += r;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

fn render_trial_csv(trial: &TrialResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &trial.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.episode,
            r.global_step,
            r.ext_return,
            r.int_return,
            r.steps,
            r.distinct_features,
            r.mean_bonus,
            r.epsilon
        )
        .expect("writing to a String cannot fail");
    }
    out
}

fn render_summary_csv(rows: &[EpisodeSummary]) -> String {
    let mut out = String::from("episode,trials,mean_return,min_return,max_return,std_return\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.episode, r.trials, r.mean, r.min, r.max, r.std
        )
        .expect("writing to a String cannot fail");
    }
    out
}

fn render_eval_csv(trials: &[TrialResult]) -> String {
    let mut out = String::from("trial,episode,ext_return\n");
    for trial in trials {
        for (episode, ext_return) in trial.eval_returns.iter().enumerate() {
            writeln!(out, "{},{episode},{ext_return}", trial.trial)
                .expect("writing to a String cannot fail");
        }
    }
    out
}

fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("beta,final_quartile_return,eval_return\n");
    for r in rows {
        match r.eval_return {
            Some(eval) => writeln!(out, "{},{},{eval}", r.beta, r.final_quartile_return),
            None => writeln!(out, "{},{},", r.beta, r.final_quartile_return),
        }
        .expect("writing to a String cannot fail");
    }
    out
}

fn create_dir(path: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

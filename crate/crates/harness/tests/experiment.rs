//! Properties of full experiment runs: reproducibility, CSV layout, and
//! the summary file's arithmetic.

use std::path::{Path, PathBuf};

use phieb_harness::config::{AgentOverrides, EnvConfig, ExperimentConfig};
use phieb_harness::runner::{self, CSV_HEADER};
use phieb::agent::Architecture;
use phieb::envs::FeatureMapKind;

fn chain_config(out: PathBuf) -> ExperimentConfig {
    ExperimentConfig {
        env: EnvConfig::SparseChain {
            length: 10,
            slip: 0.2,
            map: FeatureMapKind::Tabular,
        },
        agent: AgentOverrides {
            alpha: Some(0.1),
            ..AgentOverrides::default()
        },
        frames: 5_000,
        episodes: 80,
        trials: 3,
        seed: 9,
        out,
        eval_episodes: 4,
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Same config, same seeds: every output file must be byte-identical
/// between runs, including across the trial-thread boundary.
#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = chain_config(dir.path().join("a"));
    let second = chain_config(dir.path().join("b"));
    let summary_a = runner::run_experiment(&first).unwrap();
    let summary_b = runner::run_experiment(&second).unwrap();

    assert_eq!(summary_a.files.len(), summary_b.files.len());
    assert_eq!(summary_a.files.len(), 5, "3 trials + summary + eval");
    for (a, b) in summary_a.files.iter().zip(&summary_b.files) {
        assert_eq!(read(a), read(b), "{} differs between reruns", a.display());
    }
}

/// The summary file must be recomputable from the trial files alone, and
/// the trial files must honour the documented header and global-step
/// bookkeeping.
#[test]
fn summary_matches_recomputation_from_trial_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = chain_config(dir.path().join("out"));
    runner::run_experiment(&config).unwrap();

    // Parse every trial file: (episode -> returns across trials).
    let mut per_episode: Vec<Vec<f64>> = Vec::new();
    let mut trial_lengths = Vec::new();
    for trial in 0..config.trials {
        let text = read(&config.out.join(format!("trial_{trial:03}.csv")));
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "trial,episode,global_step,ext_return,int_return,steps,distinct_features,mean_bonus,epsilon"
        );
        assert_eq!(CSV_HEADER, text.lines().next().unwrap());

        let mut rows = 0usize;
        let mut last_global_step = 0u64;
        for (index, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 9);
            assert_eq!(fields[0].parse::<u64>().unwrap(), trial);
            assert_eq!(fields[1].parse::<usize>().unwrap(), index);

            // global_step advances by exactly the episode's step count.
            let global_step: u64 = fields[2].parse().unwrap();
            let steps: u64 = fields[5].parse().unwrap();
            assert_eq!(global_step, last_global_step + steps);
            last_global_step = global_step;

            let ext_return: f64 = fields[3].parse().unwrap();
            let int_return: f64 = fields[4].parse().unwrap();
            let mean_bonus: f64 = fields[7].parse().unwrap();
            assert!((mean_bonus - int_return / steps as f64).abs() < 1e-12);

            if per_episode.len() <= index {
                per_episode.push(Vec::new());
            }
            per_episode[index].push(ext_return);
            rows += 1;
        }
        trial_lengths.push(rows);
    }

    // The summary has exactly one row per episode index of the longest
    // trial, and its statistics match a direct recomputation.
    let summary_text = read(&config.out.join("summary.csv"));
    let mut summary_lines = summary_text.lines();
    assert_eq!(
        summary_lines.next().unwrap(),
        "episode,trials,mean_return,min_return,max_return,std_return"
    );
    let summary_rows: Vec<&str> = summary_lines.collect();
    assert_eq!(summary_rows.len(), *trial_lengths.iter().max().unwrap());

    for (index, line) in summary_rows.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let returns = &per_episode[index];
        let n = returns.len() as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let min = returns.iter().copied().fold(f64::INFINITY, f64::min);
        let max = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let std = if returns.len() > 1 {
            (returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };

        assert_eq!(fields[0].parse::<usize>().unwrap(), index);
        assert_eq!(fields[1].parse::<usize>().unwrap(), returns.len());
        assert!((fields[2].parse::<f64>().unwrap() - mean).abs() < 1e-9);
        assert!((fields[3].parse::<f64>().unwrap() - min).abs() < 1e-9);
        assert!((fields[4].parse::<f64>().unwrap() - max).abs() < 1e-9);
        assert!((fields[5].parse::<f64>().unwrap() - std).abs() < 1e-9);
    }
}

/// A dense-reward environment is a sanity floor: even the plain epsilon-
/// greedy baseline collects strictly positive return there.
#[test]
fn baseline_collects_reward_on_the_dense_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        env: EnvConfig::DenseGrid {
            width: 8,
            height: 8,
            distractors: 0,
            distractor_pool: 0,
            map: FeatureMapKind::Tabular,
        },
        agent: AgentOverrides {
            architecture: Some(Architecture::Baseline),
            alpha: Some(0.1),
            ..AgentOverrides::default()
        },
        frames: 100_000,
        episodes: 50,
        trials: 1,
        seed: 3,
        out: dir.path().join("grid"),
        eval_episodes: 0,
    };
    let summary = runner::run_experiment(&config).unwrap();
    let records = &summary.trials[0].records;
    assert_eq!(records.len(), 50);
    let mean: f64 = records.iter().map(|r| r.ext_return).sum::<f64>() / records.len() as f64;
    assert!(mean > 0.0, "dense grid must pay the baseline, got {mean}");
    assert_eq!(summary.eval_mean, None);
}

/// A beta sweep writes one subdirectory per beta plus a sorted table.
#[test]
fn beta_sweep_tabulates_each_scale() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = chain_config(dir.path().join("sweep"));
    config.trials = 1;
    config.episodes = 20;
    let rows = runner::beta_sweep(&config, &[0.1, 0.02]).unwrap();

    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].beta, 0.02, "rows are sorted ascending");
    assert_eq!(rows[1].beta, 0.1);
    for row in &rows {
        assert!(row.final_quartile_return.is_finite());
        assert!(row.eval_return.unwrap().is_finite());
    }

    let table = read(&config.out.join("sweep.csv"));
    assert!(table.starts_with("beta,final_quartile_return,eval_return\n"));
    assert_eq!(table.lines().count(), 3);
    assert!(config.out.join("beta_0.02").join("summary.csv").exists());
    assert!(config.out.join("beta_0.1").join("trial_000.csv").exists());
}

/// A learning rate far past the stability limit makes the weights blow
/// up. The run must end in the runtime-error path (exit code 3), not a
/// panic inside the trial thread.
#[test]
fn diverging_weights_are_reported_not_panicked() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        env: EnvConfig::DenseGrid {
            width: 8,
            height: 8,
            distractors: 24,
            distractor_pool: 240,
            map: FeatureMapKind::Tabular,
        },
        agent: AgentOverrides {
            // ~26 active features per step; alpha * ||phi||^2 >> 1.
            alpha: Some(0.5),
            ..AgentOverrides::default()
        },
        frames: 30_000,
        episodes: 100,
        trials: 1,
        seed: 1,
        out: dir.path().join("diverge"),
        eval_episodes: 0,
    };
    let err = runner::run_experiment(&config).unwrap_err();
    assert_eq!(err.exit_code(), 3, "runtime breach must map to exit 3: {err}");
    assert!(
        matches!(err, runner::RunError::NonFinite { .. }),
        "expected the non-finite report, got: {err}"
    );
}

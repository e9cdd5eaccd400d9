//! Experiment configuration: JSON files, per-architecture defaults, and
//! validation.
//!
//! A config file is a single JSON document mirroring [`ExperimentConfig`]
//! field for field.  Command-line flags override individual fields after
//! the file is loaded, so a base config can be reused across runs.

use std::fmt;
use std::path::{Path, PathBuf};

use phieb::agent::{
    ActionSelection, AgentConfig, Architecture, ConfigError as AgentConfigError, EpsilonSchedule,
};
use phieb::bonus::{BonusConfig, PseudoCountVariant};
use phieb::envs::{
    DenseGrid, DenseGridConfig, Environment, FeatureMapKind, KeyedRooms, LayoutError, SparseChain,
};
use serde::{Deserialize, Serialize};

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Which environment to run, selected by name, plus its parameters.
    pub env: EnvConfig,
    /// Agent settings; unset fields fall back to per-architecture defaults.
    #[serde(default)]
    pub agent: AgentOverrides,
    /// Training budget in agent steps.  A trial stops starting new episodes
    /// once the budget is spent, so the final episode may run a little past
    /// it.
    pub frames: u64,
    /// Hard cap on the number of training episodes per trial.
    pub episodes: u64,
    /// Number of independently seeded trials, run in parallel.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Base RNG seed; trial `i` uses `seed + i`.
    #[serde(default)]
    pub seed: u64,
    /// Directory that receives the per-trial and summary CSV files.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Greedy evaluation episodes run after training in each trial.
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: u64,
}

fn default_trials() -> u64 {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_eval_episodes() -> u64 {
    10
}

impl ExperimentConfig {
    /// Reads and parses a JSON config file.  The result is not yet
    /// validated; call [`ExperimentConfig::validate`] before running.
    pub fn from_file(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigFileError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Checks every field, including the fully resolved agent
    /// configuration and the environment (loading a layout file if one is
    /// named).  Returns the first problem found.
    pub fn validate(&self) -> Result<(), ConfigFileError> {
        if self.frames == 0 {
            return Err(ConfigFileError::ZeroFrames);
        }
        if self.episodes == 0 {
            return Err(ConfigFileError::ZeroEpisodes);
        }
        if self.trials == 0 {
            return Err(ConfigFileError::ZeroTrials);
        }
        self.agent.resolve(self.frames).validate()?;
        self.env.build().map(|_| ())
    }

    /// The agent configuration this experiment runs with.
    pub fn agent_config(&self) -> AgentConfig {
        self.agent.resolve(self.frames)
    }
}

/// Environment choice plus parameters, tagged by name in JSON:
/// `{"name": "sparse_chain", "length": 20}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    /// The slippery corridor with a single rewarding terminal state.
    SparseChain {
        /// Number of cells; the goal sits at the far end.
        #[serde(default = "default_chain_length")]
        length: u64,
        /// Probability that a move is slip-reversed.
        #[serde(default = "default_chain_slip")]
        slip: f64,
        /// Tabular or factored observations.
        #[serde(default)]
        map: FeatureMapKind,
    },
    /// The four-room grid with a key-locked goal.
    KeyedRooms {
        /// Side length of each room when generating the default layout.
        #[serde(default = "default_room_size")]
        room_size: usize,
        /// Optional text-grid file; when set it wins over `room_size`.
        #[serde(default)]
        layout_file: Option<PathBuf>,
        /// Tabular or factored observations.
        #[serde(default)]
        map: FeatureMapKind,
    },
    /// The dense-reward open grid, optionally with distractor features.
    DenseGrid {
        /// Grid width in cells.
        #[serde(default = "default_grid_side")]
        width: usize,
        /// Grid height in cells.
        #[serde(default = "default_grid_side")]
        height: usize,
        /// Number of distractor features appended to each observation.
        #[serde(default)]
        distractors: usize,
        /// Size of the pool the distractor window rotates through.
        #[serde(default)]
        distractor_pool: usize,
        /// Tabular or factored observations.
        #[serde(default)]
        map: FeatureMapKind,
    },
}

fn default_chain_length() -> u64 {
    SparseChain::DEFAULT_LENGTH
}

fn default_chain_slip() -> f64 {
    SparseChain::DEFAULT_SLIP
}

fn default_room_size() -> usize {
    KeyedRooms::DEFAULT_ROOM_SIZE
}

fn default_grid_side() -> usize {
    8
}

impl EnvConfig {
    /// A config for `name` with that environment's default parameters.
    pub fn default_for(name: &str, map: FeatureMapKind) -> Option<Self> {
        match name {
            "sparse_chain" => Some(EnvConfig::SparseChain {
                length: default_chain_length(),
                slip: default_chain_slip(),
                map,
            }),
            "keyed_rooms" => Some(EnvConfig::KeyedRooms {
                room_size: default_room_size(),
                layout_file: None,
                map,
            }),
            "dense_grid" => Some(EnvConfig::DenseGrid {
                width: default_grid_side(),
                height: default_grid_side(),
                distractors: 0,
                distractor_pool: 0,
                map,
            }),
            _ => None,
        }
    }

    /// The environment's name string, as used in configs and file names.
    pub fn name(&self) -> &'static str {
        match self {
            EnvConfig::SparseChain { .. } => "sparse_chain",
            EnvConfig::KeyedRooms { .. } => "keyed_rooms",
            EnvConfig::DenseGrid { .. } => "dense_grid",
        }
    }

    /// The feature map this environment is configured with.
    pub fn map(&self) -> FeatureMapKind {
        match self {
            EnvConfig::SparseChain { map, .. }
            | EnvConfig::KeyedRooms { map, .. }
            | EnvConfig::DenseGrid { map, .. } => *map,
        }
    }

    /// Constructs the environment, reading and parsing the layout file if
    /// one is named.
    pub fn build(&self) -> Result<Box<dyn Environment + Send>, ConfigFileError> {
        match self {
            EnvConfig::SparseChain { length, slip, map } => {
                if *length < 2 {
                    return Err(ConfigFileError::ChainTooShort { length: *length });
                }
                if !(0.0..=1.0).contains(slip) {
                    return Err(ConfigFileError::BadSlip { slip: *slip });
                }
                Ok(Box::new(SparseChain::new(*length, *slip, *map)))
            }
            EnvConfig::KeyedRooms {
                room_size,
                layout_file,
                map,
            } => {
                let rooms = match layout_file {
                    Some(path) => {
                        let text = std::fs::read_to_string(path).map_err(|source| {
                            ConfigFileError::Read {
                                path: path.clone(),
                                source,
                            }
                        })?;
                        KeyedRooms::from_layout(&text, *map).map_err(|source| {
                            ConfigFileError::Layout {
                                path: path.clone(),
                                source,
                            }
                        })?
                    }
                    None => {
                        if *room_size < 2 {
                            return Err(ConfigFileError::RoomTooSmall {
                                room_size: *room_size,
                            });
                        }
                        let text = KeyedRooms::generate_layout(*room_size);
                        KeyedRooms::from_layout(&text, *map)
                            .expect("generated layout is always valid")
                    }
                };
                Ok(Box::new(rooms))
            }
            EnvConfig::DenseGrid {
                width,
                height,
                distractors,
                distractor_pool,
                map,
            } => {
                if width * height < 2 {
                    return Err(ConfigFileError::GridTooSmall {
                        width: *width,
                        height: *height,
                    });
                }
                if *distractors > 0 && distractor_pool < distractors {
                    return Err(ConfigFileError::DistractorPool {
                        distractors: *distractors,
                        pool: *distractor_pool,
                    });
                }
                Ok(Box::new(DenseGrid::new(
                    DenseGridConfig {
                        width: *width,
                        height: *height,
                        distractors: *distractors,
                        distractor_pool: *distractor_pool,
                    },
                    *map,
                )))
            }
        }
    }
}

/// Agent settings as they appear in a config file.  Every field is
/// optional; [`AgentOverrides::resolve`] fills the gaps with
/// per-architecture defaults, which is why this is not a plain
/// [`AgentConfig`]: the default epsilon schedule depends on both the
/// architecture and the frame budget.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentOverrides {
    /// `split`, `combined`, or `baseline`.
    pub architecture: Option<Architecture>,
    /// `egreedy` or `boltzmann`.
    pub selection: Option<ActionSelection>,
    /// Learning rate.
    pub alpha: Option<f64>,
    /// Discount factor.
    pub gamma: Option<f64>,
    /// Eligibility-trace decay.
    pub lambda: Option<f64>,
    /// Bonus scale.
    pub beta: Option<f64>,
    /// `exact` or `ratio` pseudo-count variant.
    pub variant: Option<PseudoCountVariant>,
    /// Exploration schedule; defaults to a linear anneal over the first
    /// tenth of the frame budget, or to constant 0.1 for the baseline.
    pub epsilon_schedule: Option<EpsilonSchedule>,
}

impl AgentOverrides {
    /// Fills unset fields: library defaults for the numeric knobs, and an
    /// epsilon schedule chosen by architecture — the baseline explores at
    /// a constant 0.1, while the bonus-driven agents anneal from 1.0 to
    /// 0.01 over the first tenth of `frames`.
    pub fn resolve(&self, frames: u64) -> AgentConfig {
        let base = AgentConfig::default();
        let architecture = self.architecture.unwrap_or(base.architecture);
        let epsilon_schedule = self.epsilon_schedule.unwrap_or(match architecture {
            Architecture::Baseline => EpsilonSchedule::Constant { epsilon: 0.1 },
            Architecture::Split | Architecture::Combined => EpsilonSchedule::Linear {
                start: 1.0,
                min: 0.01,
                anneal_steps: (frames / 10).max(1),
            },
        });
        AgentConfig {
            alpha: self.alpha.unwrap_or(base.alpha),
            gamma: self.gamma.unwrap_or(base.gamma),
            lambda: self.lambda.unwrap_or(base.lambda),
            bonus: BonusConfig {
                beta: self.beta.unwrap_or(base.bonus.beta),
                variant: self.variant.unwrap_or(base.bonus.variant),
            },
            epsilon_schedule,
            selection: self.selection.unwrap_or(base.selection),
            architecture,
        }
    }
}

/// Anything that can be wrong with a config before a run starts: file
/// problems, parse problems, or invalid field values.
#[derive(Debug)]
pub enum ConfigFileError {
    /// A config or layout file could not be read.
    Read {
        /// The file that failed.
        path: PathBuf,
        /// The underlying I/O error.
        source: std::io::Error,
    },
    /// The config file is not valid JSON for [`ExperimentConfig`].
    Parse {
        /// The file that failed.
        path: PathBuf,
        /// The underlying parse error.
        source: serde_json::Error,
    },
    /// A layout file was read but is not a valid room grid.
    Layout {
        /// The file that failed.
        path: PathBuf,
        /// The underlying layout error.
        source: LayoutError,
    },
    /// The resolved agent configuration is invalid.
    Agent(AgentConfigError),
    /// `frames` must be positive.
    ZeroFrames,
    /// `episodes` must be positive.
    ZeroEpisodes,
    /// `trials` must be positive.
    ZeroTrials,
    /// The generated layout needs rooms at least two cells on a side.
    RoomTooSmall {
        /// The rejected room size.
        room_size: usize,
    },
    /// The chain needs at least a start and a goal cell.
    ChainTooShort {
        /// The rejected length.
        length: u64,
    },
    /// The slip probability is outside `[0, 1]`.
    BadSlip {
        /// The rejected value.
        slip: f64,
    },
    /// The grid needs at least two cells.
    GridTooSmall {
        /// The rejected width.
        width: usize,
        /// The rejected height.
        height: usize,
    },
    /// More distractors requested than the pool can supply.
    DistractorPool {
        /// The rejected distractor count.
        distractors: usize,
        /// The rejected pool size.
        pool: usize,
    },
    /// A flag value was not one of the accepted names.
    BadFlag {
        /// The flag that failed, e.g. `--agent`.
        flag: &'static str,
        /// The rejected value.
        value: String,
    },
    /// A JSON value passed on the command line could not be parsed.
    JsonArg {
        /// The argument that failed.
        flag: &'static str,
        /// The underlying parse error.
        source: serde_json::Error,
    },
}

impl From<AgentConfigError> for ConfigFileError {
    fn from(err: AgentConfigError) -> Self {
        ConfigFileError::Agent(err)
    }
}

impl fmt::Display for ConfigFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigFileError::Read { path, source } => {
                write!(f, "cannot read {}: {source}", path.display())
            }
            ConfigFileError::Parse { path, source } => {
                write!(f, "cannot parse {}: {source}", path.display())
            }
            ConfigFileError::Layout { path, source } => {
                write!(f, "bad layout in {}: {source}", path.display())
            }
            ConfigFileError::Agent(source) => write!(f, "bad agent config: {source}"),
            ConfigFileError::ZeroFrames => write!(f, "frames must be positive"),
            ConfigFileError::ZeroEpisodes => write!(f, "episodes must be positive"),
            ConfigFileError::ZeroTrials => write!(f, "trials must be positive"),
            ConfigFileError::RoomTooSmall { room_size } => {
                write!(f, "room_size {room_size} is too small; need at least 2")
            }
            ConfigFileError::ChainTooShort { length } => {
                write!(f, "chain length {length} is too short; need at least 2")
            }
            ConfigFileError::BadSlip { slip } => {
                write!(f, "slip probability {slip} is outside [0, 1]")
            }
            ConfigFileError::GridTooSmall { width, height } => {
                write!(f, "grid {width}x{height} is too small; need at least 2 cells")
            }
            ConfigFileError::DistractorPool { distractors, pool } => write!(
                f,
                "distractor pool {pool} is smaller than the {distractors} distractors requested"
            ),
            ConfigFileError::BadFlag { flag, value } => {
                write!(f, "unrecognised value {value:?} for {flag}")
            }
            ConfigFileError::JsonArg { flag, source } => {
                write!(f, "cannot parse {flag}: {source}")
            }
        }
    }
}

impl std::error::Error for ConfigFileError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigFileError::Read { source, .. } => Some(source),
            ConfigFileError::Parse { source, .. } => Some(source),
            ConfigFileError::Layout { source, .. } => Some(source),
            ConfigFileError::Agent(source) => Some(source),
            ConfigFileError::JsonArg { source, .. } => Some(source),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(env: &str) -> String {
        format!(r#"{{"env": {{"name": "{env}"}}, "frames": 1000, "episodes": 50}}"#)
    }

    #[test]
    fn minimal_configs_parse_with_defaults() {
        for name in ["sparse_chain", "keyed_rooms", "dense_grid"] {
            let cfg: ExperimentConfig = serde_json::from_str(&minimal(name)).unwrap();
            assert_eq!(cfg.env.name(), name);
            assert_eq!(cfg.trials, 1);
            assert_eq!(cfg.seed, 0);
            assert_eq!(cfg.eval_episodes, 10);
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn epsilon_defaults_depend_on_architecture() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal("sparse_chain")).unwrap();
        let split = cfg.agent.resolve(cfg.frames);
        assert_eq!(
            split.epsilon_schedule,
            EpsilonSchedule::Linear {
                start: 1.0,
                min: 0.01,
                anneal_steps: 100
            }
        );

        let mut overrides = AgentOverrides::default();
        overrides.architecture = Some(Architecture::Baseline);
        assert_eq!(
            overrides.resolve(1000).epsilon_schedule,
            EpsilonSchedule::Constant { epsilon: 0.1 }
        );

        overrides.epsilon_schedule = Some(EpsilonSchedule::Constant { epsilon: 0.3 });
        assert_eq!(
            overrides.resolve(1000).epsilon_schedule,
            EpsilonSchedule::Constant { epsilon: 0.3 }
        );
    }

    #[test]
    fn explicit_fields_override_defaults() {
        let text = r#"{
            "env": {"name": "sparse_chain", "length": 10, "slip": 0.2, "map": "factored"},
            "agent": {"architecture": "combined", "alpha": 0.1, "beta": 0.2, "variant": "ratio"},
            "frames": 500,
            "episodes": 20,
            "trials": 4,
            "seed": 7,
            "out": "results",
            "eval_episodes": 3
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        let agent = cfg.agent_config();
        assert_eq!(agent.architecture, Architecture::Combined);
        assert_eq!(agent.alpha, 0.1);
        assert_eq!(agent.bonus.beta, 0.2);
        assert_eq!(agent.bonus.variant, PseudoCountVariant::Ratio);
        assert_eq!(agent.gamma, 0.99);
        assert_eq!(cfg.trials, 4);
        assert_eq!(cfg.out, PathBuf::from("results"));
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"env": {"name": "sparse_chain"}, "frames": 1, "episodes": 1, "typo": 3}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
        let text = r#"{"env": {"name": "sparse_chain", "speed": 3}, "frames": 1, "episodes": 1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut cfg: ExperimentConfig = serde_json::from_str(&minimal("sparse_chain")).unwrap();
        cfg.trials = 0;
        assert!(matches!(cfg.validate(), Err(ConfigFileError::ZeroTrials)));

        let mut cfg: ExperimentConfig = serde_json::from_str(&minimal("sparse_chain")).unwrap();
        cfg.agent.alpha = Some(-1.0);
        assert!(matches!(cfg.validate(), Err(ConfigFileError::Agent(_))));

        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"env": {"name": "sparse_chain", "slip": 1.5}, "frames": 1, "episodes": 1}"#,
        )
        .unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigFileError::BadSlip { .. })));

        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"env": {"name": "dense_grid", "distractors": 5, "distractor_pool": 2},
                "frames": 1, "episodes": 1}"#,
        )
        .unwrap();
        assert!(matches!(
            cfg.validate(),
            Err(ConfigFileError::DistractorPool { .. })
        ));
    }

    #[test]
    fn layout_file_is_loaded_and_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rooms.txt");
        std::fs::write(&path, KeyedRooms::generate_layout(3)).unwrap();
        let cfg = EnvConfig::KeyedRooms {
            room_size: 8,
            layout_file: Some(path.clone()),
            map: FeatureMapKind::Tabular,
        };
        let env = cfg.build().unwrap();
        assert_eq!(env.name(), "keyed_rooms");

        std::fs::write(&path, "###\n#S#\n###\n").unwrap();
        assert!(matches!(
            cfg.build(),
            Err(ConfigFileError::Layout { .. })
        ));

        let cfg = EnvConfig::KeyedRooms {
            room_size: 8,
            layout_file: Some(dir.path().join("missing.txt")),
            map: FeatureMapKind::Tabular,
        };
        assert!(matches!(cfg.build(), Err(ConfigFileError::Read { .. })));
    }

    #[test]
    fn default_for_covers_every_env() {
        for name in ["sparse_chain", "keyed_rooms", "dense_grid"] {
            let cfg = EnvConfig::default_for(name, FeatureMapKind::Tabular).unwrap();
            assert_eq!(cfg.name(), name);
            cfg.build().unwrap();
        }
        assert!(EnvConfig::default_for("mystery", FeatureMapKind::Tabular).is_none());
    }
}

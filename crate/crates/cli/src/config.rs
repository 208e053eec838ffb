//! Pipeline settings from a `key=value` file and command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use subembed::merge::AlirInit;
use subembed::{MergeConfig, MergeMethod, Strategy, TrainConfig};

/// Bad flag, config key or value. The binary maps it to exit code 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub strategy: Strategy,
    pub rate: f64,
    pub train: TrainConfig,
    pub min_count: u64,
    pub max_vocab: usize,
    /// Minimum count inside an equal or random sub-corpus. Defaults to
    /// `min_count` scaled by the sampling rate.
    pub sub_min_count: Option<u64>,
    pub merge: MergeConfig,
    pub benchmarks: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// Sub-models trained at the same time.
    pub jobs: usize,
    pub removal_fraction: f64,
    /// Also train a single model on the full corpus.
    pub baseline: bool,
    /// Sampling rates covered by `stats`; empty means just `rate`.
    pub stats_rates: Vec<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let seed = 1;
        PipelineConfig {
            corpus: None,
            strategy: Strategy::Shuffle,
            rate: 10.0,
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            min_count: 5,
            max_vocab: usize::MAX,
            sub_min_count: None,
            merge: MergeConfig {
                seed,
                ..MergeConfig::default()
            },
            benchmarks: None,
            out: PathBuf::from("out"),
            seed,
            jobs: 1,
            removal_fraction: 0.5,
            baseline: false,
            stats_rates: Vec::new(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
    value
        .trim()
        .parse()
        .map_err(|_| UsageError(format!("invalid value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, UsageError> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(UsageError(format!("invalid value '{value}' for {key}"))),
    }
}

impl PipelineConfig {
    /// Keys accepted by [`PipelineConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "corpus",
        "rate",
        "strategy",
        "dim",
        "window",
        "negatives",
        "epochs",
        "min-count",
        "max-vocab",
        "sub-min-count",
        "subsample",
        "lr",
        "workers",
        "jobs",
        "merge",
        "alir-init",
        "alir-epochs",
        "alir-threshold",
        "alir-present-only",
        "target-dim",
        "seed",
        "out",
        "benchmarks",
        "removal-fraction",
        "baseline",
        "stats-rates",
    ];

    /// Sets one option by its flag name (without the leading dashes).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        let key = key.trim().replace('_', "-");
        let k = key.as_str();
        match k {
            "corpus" => self.corpus = Some(PathBuf::from(value.trim())),
            "rate" => self.rate = parse(k, value)?,
            "strategy" => {
                self.strategy = value
                    .trim()
                    .parse()
                    .map_err(|e: subembed::Error| UsageError(e.to_string()))?
            }
            "dim" => {
                self.train.dim = parse(k, value)?;
                self.merge.target_dim = self.train.dim;
            }
            "window" => self.train.window = parse(k, value)?,
            "negatives" => self.train.negatives = parse(k, value)?,
            "epochs" => self.train.epochs = parse(k, value)?,
            "min-count" => self.min_count = parse(k, value)?,
            "max-vocab" => self.max_vocab = parse(k, value)?,
            "sub-min-count" => self.sub_min_count = Some(parse(k, value)?),
            "subsample" => {
                let t: f64 = parse(k, value)?;
                self.train.subsample = (t > 0.0).then_some(t);
            }
            "lr" => self.train.initial_lr = parse(k, value)?,
            "workers" => self.train.workers = parse(k, value)?,
            "jobs" => self.jobs = parse(k, value)?,
            "merge" => {
                self.merge.method = value
                    .trim()
                    .parse::<MergeMethod>()
                    .map_err(|e| UsageError(e.to_string()))?
            }
            "alir-init" => {
                self.merge.alir_init = value
                    .trim()
                    .parse::<AlirInit>()
                    .map_err(|e| UsageError(e.to_string()))?
            }
            "alir-epochs" => self.merge.max_epochs = parse(k, value)?,
            "alir-threshold" => self.merge.displacement_threshold = parse(k, value)?,
            "alir-present-only" => self.merge.mean_over_present_only = parse_bool(k, value)?,
            "target-dim" => self.merge.target_dim = parse(k, value)?,
            "seed" => {
                self.seed = parse(k, value)?;
                self.train.seed = self.seed;
                self.merge.seed = self.seed;
            }
            "out" => self.out = PathBuf::from(value.trim()),
            "benchmarks" => self.benchmarks = Some(PathBuf::from(value.trim())),
            "removal-fraction" => self.removal_fraction = parse(k, value)?,
            "baseline" => self.baseline = parse_bool(k, value)?,
            "stats-rates" => {
                self.stats_rates = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse(k, s))
                    .collect::<Result<_, _>>()?
            }
            _ => return Err(UsageError(format!("unknown option '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(UsageError(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    i + 1
                ))
                .into());
            };
            self.set(key, value).map_err(|e| {
                UsageError(format!("{}:{}: {}", path.display(), i + 1, e.0))
            })?;
        }
        Ok(())
    }

    /// Checks ranges that the core types do not check on construction.
    pub fn validate(&self) -> Result<(), UsageError> {
        if !(self.rate > 0.0 && self.rate <= 100.0) {
            return Err(UsageError(format!("rate must be in (0, 100], got {}", self.rate)));
        }
        if self.min_count < 1 {
            return Err(UsageError("min-count must be >= 1".into()));
        }
        if self.jobs < 1 {
            return Err(UsageError("jobs must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.removal_fraction) {
            return Err(UsageError("removal-fraction must be in [0, 1]".into()));
        }
        self.train
            .validate()
            .map_err(|e| UsageError(e.to_string()))?;
        Ok(())
    }

    pub fn corpus_path(&self) -> anyhow::Result<&Path> {
        self.corpus
            .as_deref()
            .ok_or_else(|| UsageError("--corpus is required".into()).into())
    }

    pub fn benchmarks_path(&self) -> anyhow::Result<&Path> {
        self.benchmarks
            .as_deref()
            .ok_or_else(|| UsageError("--benchmarks is required".into()).into())
    }

    pub fn effective_sub_min_count(&self) -> u64 {
        self.sub_min_count
            .unwrap_or_else(|| ((self.min_count as f64 * self.rate / 100.0).ceil() as u64).max(1))
    }

    pub fn specs_dir(&self) -> PathBuf {
        self.out.join("specs")
    }

    pub fn models_dir(&self) -> PathBuf {
        self.out.join("models")
    }

    pub fn stats_dir(&self) -> PathBuf {
        self.out.join("stats")
    }

    pub fn merged_path(&self) -> PathBuf {
        self.out.join("merged.vec")
    }

    pub fn baseline_path(&self) -> PathBuf {
        self.out.join("full.vec")
    }
}

//! Run configuration: `key = value` text, one setting per line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use codec_core::model::{Optimizer, TrainConfig};

use crate::UsageError;

/// Every setting a pipeline stage can read. Loaded from an optional config
/// file, then overridden by command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub latent_dim: usize,
    pub learning_rate: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub z_samples: usize,
    pub optimizer: Optimizer,
    pub clip_norm: f64,
    /// Importance samples per entry for `log P(Y)` at index time.
    pub index_mc_samples: usize,
    /// Latent draws per query for the sampling baseline.
    pub oracle_mc_samples: usize,
    /// 0 means one shard per thread.
    pub shards: usize,
    /// 0 means the command's default.
    pub threads: usize,
    pub k: usize,
    pub depth: usize,
    /// 0 means every eligible class.
    pub tasks: usize,
    pub corpus: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub queries: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            seed: 0,
            latent_dim: t.latent_dim,
            learning_rate: t.learning_rate,
            steps: t.steps,
            batch_size: t.batch_size,
            z_samples: t.z_samples,
            optimizer: t.optimizer,
            clip_norm: t.clip_norm,
            index_mc_samples: codec_core::model::DEFAULT_LOG_PY_SAMPLES,
            oracle_mc_samples: 30,
            shards: 0,
            threads: 0,
            k: 10,
            depth: codec_core::eval::DEFAULT_RESULT_DEPTH,
            tasks: 0,
            corpus: None,
            checkpoint: None,
            index: None,
            queries: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, UsageError> {
    v.parse()
        .map_err(|_| UsageError(format!("invalid value `{v}` for `{key}`")))
}

impl RunConfig {
    pub const KEYS: [&'static str; 19] = [
        "seed",
        "latent_dim",
        "learning_rate",
        "steps",
        "batch_size",
        "z_samples",
        "optimizer",
        "clip_norm",
        "index_mc_samples",
        "oracle_mc_samples",
        "shards",
        "threads",
        "k",
        "depth",
        "tasks",
        "corpus",
        "checkpoint",
        "index",
        "queries",
    ];

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), UsageError> {
        match key {
            "seed" => self.seed = num(key, v)?,
            "latent_dim" => self.latent_dim = num(key, v)?,
            "learning_rate" => self.learning_rate = num(key, v)?,
            "steps" => self.steps = num(key, v)?,
            "batch_size" => self.batch_size = num(key, v)?,
            "z_samples" => self.z_samples = num(key, v)?,
            "optimizer" => self.optimizer = v.parse().map_err(|e| UsageError(format!("{e}")))?,
            "clip_norm" => self.clip_norm = num(key, v)?,
            "index_mc_samples" => self.index_mc_samples = num(key, v)?,
            "oracle_mc_samples" => self.oracle_mc_samples = num(key, v)?,
            "shards" => self.shards = num(key, v)?,
            "threads" => self.threads = num(key, v)?,
            "k" => self.k = num(key, v)?,
            "depth" => self.depth = num(key, v)?,
            "tasks" => self.tasks = num(key, v)?,
            "corpus" => self.corpus = Some(v.into()),
            "checkpoint" => self.checkpoint = Some(v.into()),
            "index" => self.index = Some(v.into()),
            "queries" => self.queries = Some(v.into()),
            _ => return Err(UsageError(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        Some(match key {
            "seed" => self.seed.to_string(),
            "latent_dim" => self.latent_dim.to_string(),
            "learning_rate" => format!("{:?}", self.learning_rate),
            "steps" => self.steps.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "z_samples" => self.z_samples.to_string(),
            "optimizer" => match self.optimizer {
                Optimizer::Sgd => "sgd".into(),
                Optimizer::Adam => "adam".into(),
            },
            "clip_norm" => format!("{:?}", self.clip_norm),
            "index_mc_samples" => self.index_mc_samples.to_string(),
            "oracle_mc_samples" => self.oracle_mc_samples.to_string(),
            "shards" => self.shards.to_string(),
            "threads" => self.threads.to_string(),
            "k" => self.k.to_string(),
            "depth" => self.depth.to_string(),
            "tasks" => self.tasks.to_string(),
            "corpus" => return path(&self.corpus),
            "checkpoint" => return path(&self.checkpoint),
            "index" => return path(&self.index),
            "queries" => return path(&self.queries),
            _ => return None,
        })
    }

    /// Parses config text. Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut c = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected `key = value`", i + 1)))?;
            c.set(k.trim(), v.trim())
                .map_err(|e| UsageError(format!("config line {}: {}", i + 1, e.0)))?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::Error::new(e).context(format!("reading config {}", path.display())))?;
        Ok(Self::parse(&text)?)
    }

    /// The `key = value` form read back by [`RunConfig::parse`]. Unset paths
    /// are omitted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            if let Some(v) = self.get(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            latent_dim: self.latent_dim,
            learning_rate: self.learning_rate,
            steps: self.steps,
            batch_size: self.batch_size,
            z_samples: self.z_samples,
            seed: self.seed,
            optimizer: self.optimizer,
            clip_norm: self.clip_norm,
        }
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        self.train_config().validate().map_err(|e| UsageError(e.to_string()))?;
        let positive = [
            ("index_mc_samples", self.index_mc_samples),
            ("oracle_mc_samples", self.oracle_mc_samples),
            ("k", self.k),
            ("depth", self.depth),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(UsageError(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Worker threads for a stage whose default is `fallback`.
    pub fn threads_or(&self, fallback: usize) -> usize {
        if self.threads == 0 {
            fallback
        } else {
            self.threads
        }
    }

    pub fn shards_for(&self, threads: usize) -> usize {
        if self.shards == 0 {
            threads
        } else {
            self.shards
        }
    }

    pub fn require(&self, key: &str) -> Result<PathBuf, UsageError> {
        self.get(key)
            .map(PathBuf::from)
            .ok_or_else(|| UsageError(format!("missing `{key}`: pass --{key} or set it in the config file")))
    }
}

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::objective::{elbo_grad, Example, Scratch};
use super::params::ModelParams;
use crate::context::{ContextBundle, CorpusRecord};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng};
use crate::sketch::{parse_sketch, SketchAst};

const INIT_TAG: u64 = 0x1;
const NOISE_TAG: u64 = 0x2;
const SHUFFLE_TAG: u64 = 0x3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// Plain gradient ascent.
    Sgd,
    Adam,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::Adam),
            _ => Err(Error::InvalidArgument(format!(
                "unknown optimizer `{s}` (expected sgd or adam)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub latent_dim: usize,
    pub learning_rate: f64,
    pub steps: usize,
    /// Examples per step; 0 means the full dataset.
    pub batch_size: usize,
    /// Latent draws per example per step.
    pub z_samples: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Gradient norm cap applied before the update.
    pub clip_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            latent_dim: 16,
            learning_rate: 0.001,
            steps: 2000,
            batch_size: 0,
            z_samples: 1,
            seed: 0,
            optimizer: Optimizer::Adam,
            clip_norm: 10.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.latent_dim == 0 {
            return bad("latent_dim must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.z_samples == 0 {
            return bad("z_samples must be positive");
        }
        if !(self.clip_norm > 0.0) {
            return bad("clip_norm must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean per-example objective of the batch at each step, before the update.
    pub trace: Vec<f64>,
}

/// `(evidence, sketch)` training pairs from ingested records.
pub fn dataset_from_records(records: &[CorpusRecord]) -> Result<Vec<(ContextBundle, SketchAst)>> {
    records
        .iter()
        .map(|r| Ok((r.evidences.clone(), parse_sketch(&r.sketch)?)))
        .collect()
}

/// Parameters before any update: vocabularies from `dataset`, weights drawn
/// from the config seed.
pub fn initial_params(dataset: &[(ContextBundle, SketchAst)], cfg: &TrainConfig) -> ModelParams {
    ModelParams::initialize(
        cfg.latent_dim,
        dataset.iter().map(|(x, _)| x),
        dataset.iter().map(|(_, s)| s),
        derive_seed(cfg.seed, INIT_TAG),
    )
}

/// Maximizes the mean per-example objective by gradient ascent.
pub fn train(dataset: &[(ContextBundle, SketchAst)], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let params = initial_params(dataset, cfg);
    train_from(params, dataset, cfg)
}

/// Continues training from `params`.
pub fn train_from(
    mut params: ModelParams,
    dataset: &[(ContextBundle, SketchAst)],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let examples: Vec<Example> = dataset
        .iter()
        .map(|(x, s)| Example::new(&params, x, s))
        .collect();
    let n = examples.len();
    let batch = if cfg.batch_size == 0 || cfg.batch_size >= n {
        n
    } else {
        cfg.batch_size
    };
    let d = params.d();
    let dim = params.theta().len();

    let mut grad = vec![0.0; dim];
    let mut m = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let (b1, b2, adam_eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut order: Vec<usize> = (0..n).collect();
    let mut noise = vec![0.0; d * cfg.z_samples];
    let mut sc = Scratch::default();
    let mut trace = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        let start = (step * batch) % n;
        if batch < n && (step == 0 || start < batch) {
            let epoch = (step * batch / n) as u64;
            order = (0..n).collect();
            order.shuffle(&mut rng(derive_seed(cfg.seed ^ SHUFFLE_TAG, epoch)));
        }
        let idx: Vec<usize> = (0..batch).map(|k| order[(start + k) % n]).collect();

        grad.fill(0.0);
        let mut r = rng(derive_seed(derive_seed(cfg.seed, NOISE_TAG), step as u64));
        let w = 1.0 / batch as f64;
        let mut obj = 0.0;
        for &i in &idx {
            for e in noise.iter_mut() {
                *e = StandardNormal.sample(&mut r);
            }
            obj += w * elbo_grad(&params, &examples[i], &noise, w, Some(&mut grad), &mut sc);
        }
        if !obj.is_finite() {
            return Err(Error::NonFiniteObjective {
                step,
                detail: format!("objective = {obj}"),
            });
        }
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFiniteObjective {
                step,
                detail: "gradient is not finite".into(),
            });
        }
        trace.push(obj);
        log::debug!("step {step}: objective {obj:.6} grad-norm {norm:.4}");

        let scale = if norm > cfg.clip_norm {
            cfg.clip_norm / norm
        } else {
            1.0
        };
        match cfg.optimizer {
            Optimizer::Sgd => {
                for (t, g) in params.theta_mut().iter_mut().zip(&grad) {
                    *t += cfg.learning_rate * scale * g;
                }
            }
            Optimizer::Adam => {
                let t = (step + 1) as i32;
                let c1 = 1.0 - b1.powi(t);
                let c2 = 1.0 - b2.powi(t);
                let theta = params.theta_mut();
                for k in 0..dim {
                    let g = scale * grad[k];
                    m[k] = b1 * m[k] + (1.0 - b1) * g;
                    v[k] = b2 * v[k] + (1.0 - b2) * g * g;
                    theta[k] += cfg.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + adam_eps);
                }
            }
        }
    }
    Ok(TrainOutcome { params, trace })
}

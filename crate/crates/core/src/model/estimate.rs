//! Monte-Carlo estimators of `log P(Y)` and `log P(Y|X)`.

use super::encode::{DecodeWork, EncodedSketch};
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::gauss::{log_mean_exp, log_mean_exp_se, DiagGaussian};
use crate::rng::rng;
use crate::sketch::SketchAst;

/// Default number of importance samples for `log P(Y)` at indexing time.
pub const DEFAULT_LOG_PY_SAMPLES: usize = 64;

/// An estimate of a log-probability with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Importance-sampling estimate of `log P(Y) = log ∫ N(z; 0, I) P(Y|z) dz`
/// with `Q(Z|Y)` as the proposal.
pub fn estimate_log_py_encoded(
    p: &ModelParams,
    s: &EncodedSketch,
    n: usize,
    seed: u64,
) -> Result<Estimate> {
    check_n(n)?;
    let q = p.reverse(s)?;
    let prior = DiagGaussian::standard(p.d());
    let mut r = rng(seed);
    let mut z = vec![0.0; p.d()];
    let mut scratch = DecodeWork::default();
    let mut w = Vec::with_capacity(n);
    for _ in 0..n {
        q.sample_into(&mut r, &mut z);
        let lw = prior.log_density(&z)? + p.decoder_log_prob_with(s, &z, &mut scratch)
            - q.log_density(&z)?;
        w.push(lw);
    }
    Ok(Estimate {
        value: log_mean_exp(&w),
        std_err: log_mean_exp_se(&w),
    })
}

pub fn estimate_log_py(p: &ModelParams, s: &SketchAst, n: usize, seed: u64) -> Result<f64> {
    Ok(estimate_log_py_encoded(p, &p.encode_sketch(s), n, seed)?.value)
}

/// `log (1/n) Σ_j P(Y | z_j)` with `z_j ~ gx`. The same seed gives the same
/// draws for every sketch, so rankings built from it use common random numbers.
pub fn mc_score_encoded(
    p: &ModelParams,
    gx: &DiagGaussian,
    s: &EncodedSketch,
    n: usize,
    seed: u64,
) -> Result<Estimate> {
    check_n(n)?;
    if gx.dim() != p.d() {
        return Err(Error::DimensionMismatch {
            expected: p.d(),
            got: gx.dim(),
        });
    }
    let mut r = rng(seed);
    let mut z = vec![0.0; p.d()];
    let mut scratch = DecodeWork::default();
    let mut w = Vec::with_capacity(n);
    for _ in 0..n {
        gx.sample_into(&mut r, &mut z);
        w.push(p.decoder_log_prob_with(s, &z, &mut scratch));
    }
    Ok(Estimate {
        value: log_mean_exp(&w),
        std_err: log_mean_exp_se(&w),
    })
}

pub fn mc_score(
    p: &ModelParams,
    gx: &DiagGaussian,
    s: &SketchAst,
    n: usize,
    seed: u64,
) -> Result<f64> {
    Ok(mc_score_encoded(p, gx, &p.encode_sketch(s), n, seed)?.value)
}

/// Draws `n` latent samples from `gx`, row-major `n × d`.
pub fn draw_latents(gx: &DiagGaussian, n: usize, seed: u64) -> Vec<f64> {
    let d = gx.dim();
    let mut r = rng(seed);
    let mut out = vec![0.0; n * d];
    for row in out.chunks_mut(d) {
        gx.sample_into(&mut r, row);
    }
    out
}

/// [`mc_score_encoded`] over pre-drawn latents (`n × d`), evaluating the full
/// decoder for every sample. `w` receives the per-sample log-likelihoods.
pub fn mc_score_latents(
    p: &ModelParams,
    s: &EncodedSketch,
    latents: &[f64],
    scratch: &mut DecodeWork,
    w: &mut Vec<f64>,
) -> f64 {
    w.clear();
    for z in latents.chunks(p.d()) {
        w.push(p.decoder_log_prob_with(s, z, scratch));
    }
    log_mean_exp(w)
}

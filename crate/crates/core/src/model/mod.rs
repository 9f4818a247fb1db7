//! The latent model: evidence encoders fused by Normal-Normal conjugacy into
//! `P(Z|X)`, a reverse encoder `Q(Z|Y)`, and a decoder `P(Y|Z)`.
//!
//! The decoder is a factorized categorical over the sketch token sequence,
//! `log P(Y|z) = log Geom(L; ρ) + Σ_t log softmax(Wᵀz + b)[y_t]`, and every
//! evidence encoder averages token embeddings. Both keep the objective's
//! gradient available in closed form.

mod checkpoint;
mod encode;
mod estimate;
mod objective;
mod params;
mod train;
mod vocab;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION,
};
pub use encode::{
    decoder_log_prob, encode_evidence, reverse_encode, DecodeWork, EncodedBundle, EncodedSketch,
};
pub use estimate::{
    draw_latents, estimate_log_py, estimate_log_py_encoded, mc_score, mc_score_encoded,
    mc_score_latents, Estimate, DEFAULT_LOG_PY_SAMPLES,
};
pub use objective::{
    decoder_grad_z, draw_noise, elbo, elbo_and_gradient, elbo_grad, elbo_with_noise, Example,
    Scratch,
};
pub use params::{Block, Layout, ModelParams, DECODER_POSITIONS, INITIAL_LENGTH_RATE, INIT_STD};
pub use train::{
    dataset_from_records, initial_params, train, train_from, Optimizer, TrainConfig, TrainOutcome,
};
pub use vocab::Vocab;

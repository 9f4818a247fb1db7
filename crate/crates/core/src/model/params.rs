//! Parameter storage. All learnable values live in one flat vector so that
//! optimizers, gradient checks and checkpoints treat them uniformly; blocks
//! are addressed through [`Layout`].

use std::ops::Range;
use std::sync::OnceLock;

use rand_distr::{Distribution, Normal};

use super::encode::DecoderCache;
use super::vocab::Vocab;
use crate::context::{ContextBundle, EvidenceType};
use crate::rng::{derive_seed, rng};
use crate::sketch::{sketch_tokens, SketchAst, DEPTH_BINS};

const N_TYPES: usize = EvidenceType::COUNT;

/// Parameter blocks in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// `vocab_j × d`, row per token.
    Embedding(EvidenceType),
    /// `ln σ_j²`, one per evidence type.
    LogVar,
    /// Reverse-encoder mean weights, `features × d`.
    RevMeanW,
    RevMeanB,
    /// Reverse-encoder log-variance weights, `features × d`.
    RevLogVarW,
    RevLogVarB,
    /// Decoder weights, `d × sketch_vocab`.
    DecW,
    DecB,
    /// Position-indexed logit offsets, `DECODER_POSITIONS × sketch_vocab`.
    DecPos,
    /// Logit of the geometric length rate.
    LengthLogit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub d: usize,
    pub evidence_vocab: [usize; N_TYPES],
    pub sketch_vocab: usize,
    emb_offsets: [usize; N_TYPES],
    log_var: usize,
    rev_mean_w: usize,
    rev_mean_b: usize,
    rev_logvar_w: usize,
    rev_logvar_b: usize,
    dec_w: usize,
    dec_b: usize,
    dec_pos: usize,
    length: usize,
    total: usize,
}

impl Layout {
    pub fn new(d: usize, evidence_vocab: [usize; N_TYPES], sketch_vocab: usize) -> Self {
        let mut off = 0;
        let mut emb_offsets = [0; N_TYPES];
        for (o, v) in emb_offsets.iter_mut().zip(evidence_vocab) {
            *o = off;
            off += v * d;
        }
        let f = sketch_vocab + DEPTH_BINS;
        let mut next = |n: usize| {
            let at = off;
            off += n;
            at
        };
        let log_var = next(N_TYPES);
        let rev_mean_w = next(f * d);
        let rev_mean_b = next(d);
        let rev_logvar_w = next(f * d);
        let rev_logvar_b = next(d);
        let dec_w = next(d * sketch_vocab);
        let dec_b = next(sketch_vocab);
        let dec_pos = next(DECODER_POSITIONS * sketch_vocab);
        let length = next(1);
        Self {
            d,
            evidence_vocab,
            sketch_vocab,
            emb_offsets,
            log_var,
            rev_mean_w,
            rev_mean_b,
            rev_logvar_w,
            rev_logvar_b,
            dec_w,
            dec_b,
            dec_pos,
            length,
            total: off,
        }
    }

    /// Reverse-encoder input width: sketch-token counts plus depth histogram.
    pub fn features(&self) -> usize {
        self.sketch_vocab + DEPTH_BINS
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn range(&self, b: Block) -> Range<usize> {
        let (start, len) = match b {
            Block::Embedding(t) => (
                self.emb_offsets[t.index()],
                self.evidence_vocab[t.index()] * self.d,
            ),
            Block::LogVar => (self.log_var, N_TYPES),
            Block::RevMeanW => (self.rev_mean_w, self.features() * self.d),
            Block::RevMeanB => (self.rev_mean_b, self.d),
            Block::RevLogVarW => (self.rev_logvar_w, self.features() * self.d),
            Block::RevLogVarB => (self.rev_logvar_b, self.d),
            Block::DecW => (self.dec_w, self.d * self.sketch_vocab),
            Block::DecB => (self.dec_b, self.sketch_vocab),
            Block::DecPos => (self.dec_pos, DECODER_POSITIONS * self.sketch_vocab),
            Block::LengthLogit => (self.length, 1),
        };
        start..start + len
    }

    pub fn blocks() -> Vec<Block> {
        let mut v: Vec<Block> = EvidenceType::ALL
            .into_iter()
            .map(Block::Embedding)
            .collect();
        v.extend([
            Block::LogVar,
            Block::RevMeanW,
            Block::RevMeanB,
            Block::RevLogVarW,
            Block::RevLogVarB,
            Block::DecW,
            Block::DecB,
            Block::DecPos,
            Block::LengthLogit,
        ]);
        v
    }

    pub(crate) fn emb_offset(&self, t: usize) -> usize {
        self.emb_offsets[t]
    }
    pub(crate) fn log_var_offset(&self) -> usize {
        self.log_var
    }
    pub(crate) fn rev_offsets(&self) -> (usize, usize, usize, usize) {
        (
            self.rev_mean_w,
            self.rev_mean_b,
            self.rev_logvar_w,
            self.rev_logvar_b,
        )
    }
    pub(crate) fn dec_offsets(&self) -> (usize, usize, usize) {
        (self.dec_w, self.dec_b, self.length)
    }
    pub(crate) fn dec_pos_offset(&self) -> usize {
        self.dec_pos
    }
}

/// Token positions with their own logit offsets; later positions share the last row.
pub const DECODER_POSITIONS: usize = 64;

/// All learnable parameters plus the vocabularies they are indexed by.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub(crate) layout: Layout,
    pub(super) theta: Vec<f64>,
    pub(crate) evidence_vocab: Vec<Vocab>,
    pub(crate) sketch_vocab: Vocab,
    pub(crate) dec_cache: OnceLock<DecoderCache>,
}

impl PartialEq for ModelParams {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout
            && self.theta == other.theta
            && self.evidence_vocab == other.evidence_vocab
            && self.sketch_vocab == other.sketch_vocab
    }
}

/// Initial length rate of the geometric length model.
pub const INITIAL_LENGTH_RATE: f64 = 0.9;
/// Standard deviation of the initial weights.
pub const INIT_STD: f64 = 0.01;

impl ModelParams {
    /// Vocabularies from the training data; weights `N(0, 0.01²)`, log-variances
    /// and biases zero, length rate 0.9.
    pub fn initialize<'a>(
        d: usize,
        bundles: impl IntoIterator<Item = &'a ContextBundle>,
        sketches: impl IntoIterator<Item = &'a SketchAst>,
        seed: u64,
    ) -> Self {
        let mut per_type: Vec<Vec<String>> = vec![Vec::new(); N_TYPES];
        for b in bundles {
            for (t, insts) in b.iter() {
                per_type[t.index()].extend(insts.iter().flatten().cloned());
            }
        }
        let evidence_vocab: Vec<Vocab> = per_type
            .iter()
            .map(|ts| Vocab::build(ts.iter().map(String::as_str)))
            .collect();
        let sk_tokens: Vec<String> = sketches
            .into_iter()
            .flat_map(|s| sketch_tokens(s).tokens)
            .collect();
        let sketch_vocab = Vocab::build(sk_tokens.iter().map(String::as_str));
        let mut p = Self::zeros(d, evidence_vocab, sketch_vocab);
        p.randomize(seed);
        p
    }

    /// All parameters zero, length rate 0.9: every Gaussian is the prior and
    /// the decoder ignores `z`.
    pub fn zeros(d: usize, evidence_vocab: Vec<Vocab>, sketch_vocab: Vocab) -> Self {
        assert!(d >= 1, "latent dimension must be at least 1");
        assert_eq!(evidence_vocab.len(), N_TYPES);
        let sizes = std::array::from_fn(|j| evidence_vocab[j].len());
        let layout = Layout::new(d, sizes, sketch_vocab.len());
        let mut theta = vec![0.0; layout.total()];
        theta[layout.range(Block::LengthLogit).start] =
            (INITIAL_LENGTH_RATE / (1.0 - INITIAL_LENGTH_RATE)).ln();
        Self::from_parts(layout, theta, evidence_vocab, sketch_vocab)
    }

    pub(crate) fn from_parts(
        layout: Layout,
        theta: Vec<f64>,
        evidence_vocab: Vec<Vocab>,
        sketch_vocab: Vocab,
    ) -> Self {
        Self {
            layout,
            theta,
            evidence_vocab,
            sketch_vocab,
            dec_cache: OnceLock::new(),
        }
    }

    /// Draws every weight block from `N(0, 0.01²)`, one derived stream per block.
    pub fn randomize(&mut self, seed: u64) {
        let normal = Normal::new(0.0, INIT_STD).expect("valid normal");
        let weight_blocks = EvidenceType::ALL.into_iter().map(Block::Embedding).chain([
            Block::RevMeanW,
            Block::RevLogVarW,
            Block::DecW,
        ]);
        for (k, b) in weight_blocks.enumerate() {
            let mut r = rng(derive_seed(seed, k as u64));
            let range = self.layout.range(b);
            for x in &mut self.theta_mut()[range] {
                *x = normal.sample(&mut r);
            }
        }
    }

    pub fn d(&self) -> usize {
        self.layout.d
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        self.dec_cache = OnceLock::new();
        &mut self.theta
    }

    pub fn block(&self, b: Block) -> &[f64] {
        &self.theta[self.layout.range(b)]
    }

    pub fn block_mut(&mut self, b: Block) -> &mut [f64] {
        let r = self.layout.range(b);
        &mut self.theta_mut()[r]
    }

    pub fn evidence_vocab(&self, t: EvidenceType) -> &Vocab {
        &self.evidence_vocab[t.index()]
    }

    pub fn sketch_vocab(&self) -> &Vocab {
        &self.sketch_vocab
    }

    pub fn log_var(&self, t: EvidenceType) -> f64 {
        self.theta[self.layout.log_var_offset() + t.index()]
    }

    pub fn length_rate(&self) -> f64 {
        let eta = self.theta[self.layout.range(Block::LengthLogit).start];
        1.0 / (1.0 + (-eta).exp())
    }

    /// Zeroes the decoder weights, making `P(Y|z)` independent of `z`.
    pub fn zero_decoder_weights(&mut self) {
        self.block_mut(Block::DecW).fill(0.0);
    }

    /// Zeroes the reverse encoder, making every `Q(Z|Y)` the prior.
    pub fn zero_reverse_encoder(&mut self) {
        for b in [
            Block::RevMeanW,
            Block::RevMeanB,
            Block::RevLogVarW,
            Block::RevLogVarB,
        ] {
            self.block_mut(b).fill(0.0);
        }
    }
}

//! Inference-time maps: evidence → `P(Z|X)`, sketch → `Q(Z|Y)`, and the
//! decoder likelihood `P(Y|z)`.

use super::params::{Block, ModelParams, DECODER_POSITIONS};
use crate::context::{ContextBundle, EvidenceType};
use crate::error::{Error, Result};
use crate::gauss::DiagGaussian;
use crate::sketch::{sketch_tokens, SketchAst, DEPTH_BINS};

/// A bundle with tokens resolved to vocabulary ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBundle {
    /// `(evidence type index, token ids)`, one entry per instance.
    pub(crate) instances: Vec<(usize, Vec<u32>)>,
    pub(crate) counts: [usize; EvidenceType::COUNT],
}

/// A sketch reduced to what the decoder and reverse encoder read.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSketch {
    /// `(token id, occurrences)`, ascending ids.
    pub(crate) counts: Vec<(u32, f64)>,
    pub(crate) len: usize,
    /// Token ids in sequence order.
    pub(crate) seq: Vec<u32>,
    /// Sparse reverse-encoder input `(feature index, value)`.
    pub(crate) features: Vec<(u32, f64)>,
}

impl EncodedSketch {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// `exp(B − rowmax)` and the row maxima of the position table, derived
/// from the parameters on first use.
#[derive(Debug, Clone)]
pub(crate) struct DecoderCache {
    pos_exp: Vec<f64>,
    pos_max: Vec<f64>,
}

/// Reusable buffers for decoder evaluations.
#[derive(Debug, Default)]
pub struct DecodeWork {
    /// `Wᵀz + b`.
    pub(crate) u: Vec<f64>,
    e: Vec<f64>,
    m: f64,
    /// Log normalizer of each position row.
    pub(crate) lse: Vec<f64>,
    fast: Vec<bool>,
}

/// Row of the position table used for token `t`.
pub(crate) fn position_row(t: usize) -> usize {
    t.min(DECODER_POSITIONS - 1)
}

/// Number of tokens of a length-`len` sketch that read position row `r`.
pub(crate) fn row_count(len: usize, r: usize) -> f64 {
    if r + 1 == DECODER_POSITIONS && len >= DECODER_POSITIONS {
        (len - DECODER_POSITIONS + 1) as f64
    } else {
        1.0
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl ModelParams {
    pub fn encode_bundle(&self, x: &ContextBundle) -> EncodedBundle {
        let mut instances = Vec::new();
        let mut counts = [0; EvidenceType::COUNT];
        for (t, insts) in x.iter() {
            let vocab = self.evidence_vocab(t);
            for inst in insts {
                instances.push((t.index(), inst.iter().map(|tok| vocab.id(tok)).collect()));
                counts[t.index()] += 1;
            }
        }
        EncodedBundle { instances, counts }
    }

    pub fn encode_sketch(&self, s: &SketchAst) -> EncodedSketch {
        let st = sketch_tokens(s);
        let len = st.tokens.len();
        let seq: Vec<u32> = st.tokens.iter().map(|t| self.sketch_vocab.id(t)).collect();
        let mut ids = seq.clone();
        ids.sort_unstable();
        let mut counts: Vec<(u32, f64)> = Vec::new();
        for id in ids {
            match counts.last_mut() {
                Some((last, c)) if *last == id => *c += 1.0,
                _ => counts.push((id, 1.0)),
            }
        }
        let mut features: Vec<(u32, f64)> =
            counts.iter().map(|&(id, c)| (id, c / len as f64)).collect();
        let nodes: u32 = st.depth_histogram.iter().sum();
        let base = self.layout.sketch_vocab as u32;
        for (k, &h) in st.depth_histogram.iter().enumerate() {
            if h > 0 {
                features.push((base + k as u32, h as f64 / nodes as f64));
            }
        }
        debug_assert!(features
            .iter()
            .all(|(f, _)| (*f as usize) < self.layout.sketch_vocab + DEPTH_BINS));
        EncodedSketch {
            counts,
            len,
            seq,
            features,
        }
    }

    /// Mean of the embeddings of one instance's tokens, added into `out` scaled by `w`.
    pub(crate) fn add_instance_mean(&self, t: usize, tokens: &[u32], w: f64, out: &mut [f64]) {
        let d = self.layout.d;
        let base = self.layout.emb_offset(t);
        let scale = w / tokens.len() as f64;
        for &tok in tokens {
            let row = &self.theta[base + tok as usize * d..base + (tok as usize + 1) * d];
            for (o, r) in out.iter_mut().zip(row) {
                *o += scale * r;
            }
        }
    }

    /// Posterior mean and precision `1 + Σ_j |X_j| / σ_j²` (the variance is
    /// its reciprocal on every dimension).
    pub(crate) fn posterior_parts(&self, x: &EncodedBundle) -> (Vec<f64>, f64) {
        let lv = self.layout.log_var_offset();
        let inv_var: Vec<f64> = (0..EvidenceType::COUNT)
            .map(|j| (-self.theta[lv + j]).exp())
            .collect();
        let prec = 1.0
            + x.counts
                .iter()
                .zip(&inv_var)
                .map(|(&n, s)| n as f64 * s)
                .sum::<f64>();
        let mut mu = vec![0.0; self.layout.d];
        for (t, toks) in &x.instances {
            self.add_instance_mean(*t, toks, inv_var[*t], &mut mu);
        }
        for m in &mut mu {
            *m /= prec;
        }
        (mu, prec)
    }

    pub fn posterior(&self, x: &EncodedBundle) -> DiagGaussian {
        let (mu, prec) = self.posterior_parts(x);
        DiagGaussian::isotropic(mu, 1.0 / prec).expect("posterior variance lies in (0, 1]")
    }

    /// `(μ_Y, ln σ_Y²)` of the reverse encoder.
    pub(crate) fn reverse_parts(&self, s: &EncodedSketch) -> (Vec<f64>, Vec<f64>) {
        let d = self.layout.d;
        let (mw, mb, vw, vb) = self.layout.rev_offsets();
        let mut mu = self.theta[mb..mb + d].to_vec();
        let mut lv = self.theta[vb..vb + d].to_vec();
        for &(f, x) in &s.features {
            let f = f as usize;
            for (m, w) in mu.iter_mut().zip(&self.theta[mw + f * d..mw + (f + 1) * d]) {
                *m += x * w;
            }
            for (l, w) in lv.iter_mut().zip(&self.theta[vw + f * d..vw + (f + 1) * d]) {
                *l += x * w;
            }
        }
        (mu, lv)
    }

    pub fn reverse(&self, s: &EncodedSketch) -> Result<DiagGaussian> {
        let (mu, lv) = self.reverse_parts(s);
        DiagGaussian::new(mu, lv.into_iter().map(f64::exp).collect())
    }

    /// `log P(L)` under the geometric length model.
    pub(crate) fn log_length_prob(&self, len: usize) -> f64 {
        let eta = self.block(Block::LengthLogit)[0];
        // ln ρ = −softplus(−η), ln(1 − ρ) = −softplus(η)
        -(len as f64 - 1.0) * softplus(-eta) - softplus(eta)
    }

    pub(crate) fn decoder_cache(&self) -> &DecoderCache {
        self.dec_cache.get_or_init(|| {
            let v = self.layout.sketch_vocab.max(1);
            let table = self.block(Block::DecPos);
            let mut pos_exp = Vec::with_capacity(table.len());
            let mut pos_max = Vec::with_capacity(DECODER_POSITIONS);
            for row in table.chunks_exact(v) {
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                pos_max.push(m);
                pos_exp.extend(row.iter().map(|x| (x - m).exp()));
            }
            DecoderCache { pos_exp, pos_max }
        })
    }

    /// Fills `w` with `Wᵀz + b` and the normalizers of the first `rows`
    /// position rows.
    pub(crate) fn decode(&self, z: &[f64], rows: usize, w: &mut DecodeWork) {
        let v = self.layout.sketch_vocab;
        let (wo, bo, _) = self.layout.dec_offsets();
        w.u.clear();
        w.u.extend_from_slice(&self.theta[bo..bo + v]);
        for (i, &zi) in z.iter().enumerate() {
            let row = &self.theta[wo + i * v..wo + (i + 1) * v];
            for (l, r) in w.u.iter_mut().zip(row) {
                *l += zi * r;
            }
        }
        w.m = w.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let m = w.m;
        w.e.clear();
        w.e.extend(w.u.iter().map(|x| (x - m).exp()));
        let cache = self.decoder_cache();
        let table = self.block(Block::DecPos);
        w.lse.clear();
        w.fast.clear();
        for r in 0..rows {
            let pe = &cache.pos_exp[r * v..(r + 1) * v];
            let sum: f64 = w.e.iter().zip(pe).map(|(a, b)| a * b).sum();
            if sum > 1e-250 && sum.is_finite() {
                w.lse.push(m + cache.pos_max[r] + sum.ln());
                w.fast.push(true);
            } else {
                let row = &table[r * v..(r + 1) * v];
                let mm =
                    w.u.iter()
                        .zip(row)
                        .map(|(a, b)| a + b)
                        .fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = w.u.iter().zip(row).map(|(a, b)| (a + b - mm).exp()).sum();
                w.lse.push(mm + sum.ln());
                w.fast.push(false);
            }
        }
    }

    /// Softmax of position row `r` after [`Self::decode`].
    pub(crate) fn softmax_row(&self, w: &DecodeWork, r: usize, out: &mut Vec<f64>) {
        let v = self.layout.sketch_vocab;
        out.clear();
        if w.fast[r] {
            let cache = self.decoder_cache();
            let scale = (w.m + cache.pos_max[r] - w.lse[r]).exp();
            out.extend(
                w.e.iter()
                    .zip(&cache.pos_exp[r * v..(r + 1) * v])
                    .map(|(a, b)| a * b * scale),
            );
        } else {
            let row = &self.block(Block::DecPos)[r * v..(r + 1) * v];
            out.extend(w.u.iter().zip(row).map(|(a, b)| (a + b - w.lse[r]).exp()));
        }
    }

    /// `log P(Y|z)` reusing the buffers in `w`.
    pub fn decoder_log_prob_with(&self, s: &EncodedSketch, z: &[f64], w: &mut DecodeWork) -> f64 {
        self.decode(z, s.len.min(DECODER_POSITIONS), w);
        self.sequence_log_prob(s, w)
    }

    pub(crate) fn sequence_log_prob(&self, s: &EncodedSketch, w: &DecodeWork) -> f64 {
        let v = self.layout.sketch_vocab;
        let table = self.block(Block::DecPos);
        let mut acc = self.log_length_prob(s.len);
        for (t, &y) in s.seq.iter().enumerate() {
            let r = position_row(t);
            let y = y as usize;
            acc += w.u[y] + table[r * v + y] - w.lse[r];
        }
        acc
    }

    fn check_z(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.layout.d {
            return Err(Error::DimensionMismatch {
                expected: self.layout.d,
                got: z.len(),
            });
        }
        Ok(())
    }
}

/// Conjugate fusion of encoded evidence into `P(Z|X) = N(μ, σ²I)`.
pub fn encode_evidence(p: &ModelParams, x: &ContextBundle) -> DiagGaussian {
    p.posterior(&p.encode_bundle(x))
}

/// `Q(Z|Y)`: an affine map of normalized token counts and depth histogram.
pub fn reverse_encode(p: &ModelParams, s: &SketchAst) -> Result<DiagGaussian> {
    p.reverse(&p.encode_sketch(s))
}

/// `log P(L) + Σ_t log softmax(Wᵀz + b + B_t)[y_t]`.
pub fn decoder_log_prob(p: &ModelParams, s: &SketchAst, z: &[f64]) -> Result<f64> {
    p.check_z(z)?;
    Ok(p.decoder_log_prob_with(&p.encode_sketch(s), z, &mut DecodeWork::default()))
}

//! The training objective and its exact gradient.
//!
//! ```text
//! E = −KL(Q(Z|Y) ‖ P(Z|X)) − KL(P(Z|X) ‖ N(0, I)) + (1/S) Σ_s log P(Y | z_s)
//! z_s = μ_X + σ_X ε_s,   ε_s ~ N(0, I)
//! ```
//!
//! `P(Z|X) = N(μ_X, v I)` with `v = 1/P`, `P = 1 + Σ_j n_j e^{−ℓ_j}` and
//! `μ_X = v Σ_{j,k} e^{−ℓ_j} f_{jk}`, where `f_{jk}` is the mean embedding of
//! instance `k` of evidence type `j`.

use rand_distr::{Distribution, StandardNormal};

use super::encode::{position_row, row_count, DecodeWork, EncodedBundle, EncodedSketch};
use super::params::ModelParams;
use super::params::DECODER_POSITIONS;
use crate::context::{ContextBundle, EvidenceType};
use crate::rng::rng;
use crate::sketch::SketchAst;

/// One training pair with tokens already resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub bundle: EncodedBundle,
    pub sketch: EncodedSketch,
}

impl Example {
    pub fn new(p: &ModelParams, x: &ContextBundle, s: &SketchAst) -> Self {
        Self {
            bundle: p.encode_bundle(x),
            sketch: p.encode_sketch(s),
        }
    }
}

/// Reused buffers for [`elbo_grad`].
#[derive(Debug, Default)]
pub struct Scratch {
    work: DecodeWork,
    sm: Vec<f64>,
    resid: Vec<f64>,
    z: Vec<f64>,
    gz: Vec<f64>,
}

/// Objective value for one example given explicit noise `eps` (`S × d`,
/// row-major). When `grad` is given, `weight · ∂E/∂θ` is added into it.
pub fn elbo_grad(
    p: &ModelParams,
    ex: &Example,
    eps: &[f64],
    weight: f64,
    grad: Option<&mut [f64]>,
    sc: &mut Scratch,
) -> f64 {
    let d = p.layout.d;
    let n_samples = eps.len() / d;
    assert!(
        n_samples >= 1 && eps.len() == n_samples * d,
        "noise must hold S × d values"
    );
    let inv_s = 1.0 / n_samples as f64;

    let (mu_x, prec) = p.posterior_parts(&ex.bundle);
    let vx = 1.0 / prec;
    let sx = vx.sqrt();
    let (mu_y, lam) = p.reverse_parts(&ex.sketch);
    let vy: Vec<f64> = lam.iter().map(|l| l.exp()).collect();

    let ln_vx = vx.ln();
    let mut kl1 = 0.0;
    let mut kl2 = 0.0;
    for i in 0..d {
        let diff = mu_x[i] - mu_y[i];
        kl1 += ln_vx - lam[i] - 1.0 + vy[i] / vx + diff * diff / vx;
        kl2 += mu_x[i] * mu_x[i];
    }
    kl1 *= 0.5;
    kl2 = 0.5 * (kl2 - d as f64 * ln_vx - d as f64 + d as f64 * vx);

    let v = p.layout.sketch_vocab;
    let mut recon = 0.0;
    let mut g_mu = vec![0.0; d];
    let mut g_v = 0.0;
    let mut grad = grad;
    sc.z.resize(d, 0.0);
    sc.gz.resize(d, 0.0);
    for s in 0..n_samples {
        let e = &eps[s * d..(s + 1) * d];
        for i in 0..d {
            sc.z[i] = mu_x[i] + sx * e[i];
        }
        let rows = ex.sketch.len.min(DECODER_POSITIONS);
        p.decode(&sc.z, rows, &mut sc.work);
        recon += p.sequence_log_prob(&ex.sketch, &sc.work) * inv_s;

        if let Some(g) = grad.as_deref_mut() {
            let ws = weight * inv_s;
            let (w_off, b_off, _) = p.layout.dec_offsets();
            let pos_off = p.layout.dec_pos_offset();
            // r = cnt − Σ_rows n_r · softmax_r
            sc.resid.clear();
            sc.resid.resize(v, 0.0);
            for r in 0..rows {
                let n_r = row_count(ex.sketch.len, r);
                p.softmax_row(&sc.work, r, &mut sc.sm);
                let gb = &mut g[pos_off + r * v..pos_off + (r + 1) * v];
                for ((res, gb), sm) in sc.resid.iter_mut().zip(gb).zip(&sc.sm) {
                    *res -= n_r * sm;
                    *gb -= ws * n_r * sm;
                }
            }
            for (t, &y) in ex.sketch.seq.iter().enumerate() {
                g[pos_off + position_row(t) * v + y as usize] += ws;
            }
            for &(id, c) in &ex.sketch.counts {
                sc.resid[id as usize] += c;
            }
            for i in 0..d {
                let row = &p.theta[w_off + i * v..w_off + (i + 1) * v];
                sc.gz[i] = row.iter().zip(&sc.resid).map(|(w, r)| w * r).sum();
                let zi = sc.z[i] * ws;
                for (gw, r) in g[w_off + i * v..w_off + (i + 1) * v]
                    .iter_mut()
                    .zip(&sc.resid)
                {
                    *gw += zi * r;
                }
            }
            for (gb, r) in g[b_off..b_off + v].iter_mut().zip(&sc.resid) {
                *gb += ws * r;
            }
            for i in 0..d {
                g_mu[i] += sc.gz[i] * inv_s;
                g_v += sc.gz[i] * e[i] / (2.0 * sx) * inv_s;
            }
        }
    }
    let value = -kl1 - kl2 + recon;

    let Some(g) = grad else { return value };

    let rho = p.length_rate();
    let (_, _, len_off) = p.layout.dec_offsets();
    g[len_off] += weight * ((ex.sketch.len as f64 - 1.0) * (1.0 - rho) - rho);

    // Reverse encoder.
    let mut g_muy = vec![0.0; d];
    let mut g_lam = vec![0.0; d];
    for i in 0..d {
        let diff = mu_x[i] - mu_y[i];
        g_muy[i] = diff / vx;
        g_lam[i] = 0.5 * (1.0 - vy[i] / vx);
        g_mu[i] += -diff / vx - mu_x[i];
        g_v += -0.5 * (1.0 / vx - vy[i] / (vx * vx) - diff * diff / (vx * vx))
            - 0.5 * (1.0 - 1.0 / vx);
    }
    let (mw, mb, lw, lb) = p.layout.rev_offsets();
    for i in 0..d {
        g[mb + i] += weight * g_muy[i];
        g[lb + i] += weight * g_lam[i];
    }
    for &(f, x) in &ex.sketch.features {
        let f = f as usize;
        for i in 0..d {
            g[mw + f * d + i] += weight * x * g_muy[i];
            g[lw + f * d + i] += weight * x * g_lam[i];
        }
    }

    // Evidence encoders and per-type log-variances.
    let lv_off = p.layout.log_var_offset();
    let mut type_sums = vec![vec![0.0; d]; EvidenceType::COUNT];
    for (t, toks) in &ex.bundle.instances {
        p.add_instance_mean(*t, toks, 1.0, &mut type_sums[*t]);
    }
    for j in 0..EvidenceType::COUNT {
        let n = ex.bundle.counts[j];
        if n == 0 {
            continue;
        }
        let s_j = (-p.theta[lv_off + j]).exp();
        let n = n as f64;
        let dot: f64 = (0..d)
            .map(|i| g_mu[i] * (type_sums[j][i] - n * mu_x[i]))
            .sum();
        let ds = dot / prec - g_v * n / (prec * prec);
        g[lv_off + j] += weight * (-s_j * ds);
    }
    for (t, toks) in &ex.bundle.instances {
        let s_j = (-p.theta[lv_off + t]).exp();
        let scale = weight * s_j / prec / toks.len() as f64;
        let base = p.layout.emb_offset(*t);
        for &tok in toks {
            let row = &mut g[base + tok as usize * d..base + (tok as usize + 1) * d];
            for (gr, gm) in row.iter_mut().zip(&g_mu) {
                *gr += scale * gm;
            }
        }
    }
    value
}

/// Draws `n_samples × d` standard normal values.
pub fn draw_noise(d: usize, n_samples: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..d * n_samples)
        .map(|_| StandardNormal.sample(&mut r))
        .collect()
}

/// Reparameterized estimate of the objective for one `(x, s)` pair,
/// averaged over `n_samples` latent draws.
pub fn elbo(p: &ModelParams, x: &ContextBundle, s: &SketchAst, n_samples: usize, seed: u64) -> f64 {
    let ex = Example::new(p, x, s);
    let eps = draw_noise(p.d(), n_samples.max(1), seed);
    elbo_grad(p, &ex, &eps, 1.0, None, &mut Scratch::default())
}

/// Objective and full gradient for fixed noise `eps` (`S × d`).
pub fn elbo_and_gradient(
    p: &ModelParams,
    x: &ContextBundle,
    s: &SketchAst,
    eps: &[f64],
) -> (f64, Vec<f64>) {
    let ex = Example::new(p, x, s);
    let mut g = vec![0.0; p.theta.len()];
    let v = elbo_grad(p, &ex, eps, 1.0, Some(&mut g), &mut Scratch::default());
    (v, g)
}

/// Objective for fixed noise, without gradient.
pub fn elbo_with_noise(p: &ModelParams, x: &ContextBundle, s: &SketchAst, eps: &[f64]) -> f64 {
    let ex = Example::new(p, x, s);
    elbo_grad(p, &ex, eps, 1.0, None, &mut Scratch::default())
}

/// `∂ log P(Y|z) / ∂z = W (cnt − Σ_t softmax(Wᵀz + b + B_t))`.
pub fn decoder_grad_z(p: &ModelParams, s: &SketchAst, z: &[f64]) -> Vec<f64> {
    let es = p.encode_sketch(s);
    let v = p.layout.sketch_vocab;
    let rows = es.len.min(DECODER_POSITIONS);
    let mut work = DecodeWork::default();
    p.decode(z, rows, &mut work);
    let mut r = vec![0.0; v];
    let mut sm = Vec::new();
    for row in 0..rows {
        let n_r = row_count(es.len, row);
        p.softmax_row(&work, row, &mut sm);
        for (a, b) in r.iter_mut().zip(&sm) {
            *a -= n_r * b;
        }
    }
    for &(id, c) in &es.counts {
        r[id as usize] += c;
    }
    let (w, _, _) = p.layout.dec_offsets();
    (0..p.d())
        .map(|i| {
            p.theta[w + i * v..w + (i + 1) * v]
                .iter()
                .zip(&r)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

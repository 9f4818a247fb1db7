//! Exhaustive top-k retrieval over index shards.
//!
//! The query evidence is fused once into `P(Z|X)`; every entry is then scored
//! in closed form against its stored `(μ_Y, σ_Y², log P(Y))`. Shards are
//! scanned in parallel on the ambient rayon pool, each keeping a bounded
//! heap, and the per-shard winners are merged on the calling thread.

mod kernel;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use kernel::{scan_shard, Candidate, QueryKernel, ShardHits, TopK};

use crate::context::ContextBundle;
use crate::error::{Error, Result};
use crate::gauss::DiagGaussian;
use crate::index::IndexShard;
use crate::model::{
    draw_latents, encode_evidence, mc_score_latents, DecodeWork, EncodedSketch, ModelParams,
};
use crate::sketch::parse_sketch;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub rank: usize,
    pub id: u64,
    pub score: f64,
    #[serde(rename = "sketch")]
    pub sketch_text: String,
    #[serde(rename = "source")]
    pub source_text: String,
}

/// An entry left out of the ranking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excluded {
    pub id: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub results: Vec<SearchResult>,
    pub scanned: usize,
    pub excluded: Vec<Excluded>,
}

fn check_query(shards: &[IndexShard], d: usize, k: usize) -> Result<()> {
    if shards.is_empty() {
        return Err(Error::InvalidArgument("no index shards to search".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    for s in shards {
        if s.index().d() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.index().d(),
            });
        }
    }
    Ok(())
}

fn materialize(
    shards: &[IndexShard],
    hits: Vec<ShardHits>,
    k: usize,
    reason: &str,
) -> Result<SearchOutcome> {
    let mut scanned = 0;
    let mut excluded = Vec::new();
    let mut all = Vec::new();
    for h in hits {
        scanned += h.scanned;
        excluded.extend(h.excluded.into_iter().map(|(id, _)| Excluded {
            id,
            reason: reason.to_owned(),
        }));
        all.extend(h.top.into_sorted());
    }
    all.sort_unstable_by(|a, b| b.cmp(a));
    all.truncate(k);
    excluded.sort_by_key(|e| e.id);
    if !excluded.is_empty() {
        log::warn!("{} index entries excluded from ranking", excluded.len());
    }
    let results = all
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let index = shards[c.shard].index();
            Ok(SearchResult {
                rank: i + 1,
                id: c.id,
                score: c.score,
                sketch_text: index.sketch_text(c.row)?.to_owned(),
                source_text: index.source_text(c.row)?.to_owned(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchOutcome {
        results,
        scanned,
        excluded,
    })
}

/// Top-`k` entries by closed-form score against a given `P(Z|X)`.
pub fn search_gaussian(
    shards: &[IndexShard],
    gx: &DiagGaussian,
    k: usize,
) -> Result<SearchOutcome> {
    check_query(shards, gx.dim(), k)?;
    let kernel = QueryKernel::new(gx);
    let hits: Vec<ShardHits> = shards
        .par_iter()
        .enumerate()
        .map(|(i, s)| scan_shard(&kernel, s, i, k))
        .collect();
    materialize(shards, hits, k, "non-integrable convolution")
}

/// Top-`k` entries by `log P(Y|X)` for the query evidence `x`.
pub fn search(
    shards: &[IndexShard],
    p: &ModelParams,
    x: &ContextBundle,
    k: usize,
) -> Result<SearchOutcome> {
    search_gaussian(shards, &encode_evidence(p, x), k)
}

/// Sketches of every shard row, encoded for the decoder.
pub struct McCorpus {
    shards: Vec<Vec<(usize, u64, EncodedSketch)>>,
}

impl McCorpus {
    pub fn prepare(shards: &[IndexShard], p: &ModelParams) -> Result<Self> {
        Self::prepare_limited(shards, p, usize::MAX)
    }

    /// Encodes at most `limit` rows in total, taken shard by shard.
    pub fn prepare_limited(shards: &[IndexShard], p: &ModelParams, limit: usize) -> Result<Self> {
        let mut left = limit;
        let mut out = Vec::with_capacity(shards.len());
        for s in shards {
            let rows: Vec<usize> = s.rows().take(left).collect();
            left -= rows.len();
            let enc = rows
                .par_iter()
                .map(|&row| {
                    let idx = s.index();
                    let sk = parse_sketch(idx.sketch_text(row)?)?;
                    Ok((row, idx.id(row), p.encode_sketch(&sk)))
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(enc);
        }
        Ok(Self { shards: out })
    }

    pub fn len(&self) -> usize {
        self.shards.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Ranks prepared entries by the sampling estimate
/// `log (1/n) Σ_s P(Y | z_s)`, `z_s ~ gx`. One set of draws is shared by
/// every entry, and the decoder is evaluated in full for each (entry, draw).
pub fn search_mc_prepared(
    shards: &[IndexShard],
    corpus: &McCorpus,
    p: &ModelParams,
    gx: &DiagGaussian,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    check_query(shards, gx.dim(), k)?;
    if gx.dim() != p.d() {
        return Err(Error::DimensionMismatch {
            expected: p.d(),
            got: gx.dim(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let latents = draw_latents(gx, n, seed);
    let hits: Vec<ShardHits> = corpus
        .shards
        .par_iter()
        .enumerate()
        .map(|(i, rows)| {
            let mut top = TopK::new(k.min(rows.len()));
            let mut excluded = Vec::new();
            let mut scratch = DecodeWork::default();
            let mut w = Vec::with_capacity(n);
            for (row, id, enc) in rows {
                let score = mc_score_latents(p, enc, &latents, &mut scratch, &mut w);
                if score.is_finite() {
                    top.offer(Candidate {
                        score,
                        id: *id,
                        shard: i,
                        row: *row,
                    });
                } else {
                    excluded.push((*id, *row));
                }
            }
            ShardHits {
                top,
                scanned: rows.len(),
                excluded,
            }
        })
        .collect();
    materialize(shards, hits, k, "non-finite sampling estimate")
}

/// Sampling baseline for [`search`] with `n` draws from `P(Z|X)`.
pub fn search_mc(
    shards: &[IndexShard],
    p: &ModelParams,
    x: &ContextBundle,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let corpus = McCorpus::prepare(shards, p)?;
    search_mc_prepared(shards, &corpus, p, &encode_evidence(p, x), k, n, seed)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchOptions {
    pub repeats: usize,
    pub k: usize,
    pub mc_samples: usize,
    /// Entries scored by the sampling baseline (it is timed on a prefix).
    pub mc_entries: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            repeats: 3,
            k: 10,
            mc_samples: 30,
            mc_entries: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub entries: usize,
    pub d: usize,
    pub threads: usize,
    pub repeats: usize,
    /// Mean wall-clock seconds per full analytic pass.
    pub analytic_secs: f64,
    pub analytic_per_sec: f64,
    pub analytic_per_sec_per_thread: f64,
    pub mc_samples: usize,
    pub mc_entries: usize,
    pub mc_secs: f64,
    pub mc_per_sec: f64,
    /// Per-entry cost of the sampling baseline over the analytic scan.
    pub slowdown: f64,
}

/// Wall-clock throughput of analytic scoring and of the sampling baseline,
/// on the ambient rayon pool.
pub fn bench_scan(
    shards: &[IndexShard],
    p: &ModelParams,
    x: &ContextBundle,
    opts: &BenchOptions,
) -> Result<BenchReport> {
    let gx = encode_evidence(p, x);
    check_query(shards, gx.dim(), opts.k.max(1))?;
    let repeats = opts.repeats.max(1);
    let entries: usize = shards.iter().map(IndexShard::len).sum();
    let threads = rayon::current_num_threads().min(shards.len()).max(1);

    search_gaussian(shards, &gx, opts.k.max(1))?;
    let t = Instant::now();
    for _ in 0..repeats {
        std::hint::black_box(search_gaussian(shards, &gx, opts.k.max(1))?);
    }
    let analytic_secs = t.elapsed().as_secs_f64() / repeats as f64;
    let analytic_per_sec = entries as f64 / analytic_secs;

    let corpus = McCorpus::prepare_limited(shards, p, opts.mc_entries)?;
    let mc_entries = corpus.len();
    let t = Instant::now();
    std::hint::black_box(search_mc_prepared(
        shards,
        &corpus,
        p,
        &gx,
        opts.k.max(1),
        opts.mc_samples.max(1),
        opts.seed,
    )?);
    let mc_secs = t.elapsed().as_secs_f64();
    let mc_per_sec = mc_entries as f64 / mc_secs;

    Ok(BenchReport {
        entries,
        d: gx.dim(),
        threads,
        repeats,
        analytic_secs,
        analytic_per_sec,
        analytic_per_sec_per_thread: analytic_per_sec / threads as f64,
        mc_samples: opts.mc_samples.max(1),
        mc_entries,
        mc_secs,
        mc_per_sec,
        slowdown: analytic_per_sec / mc_per_sec,
    })
}

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::gauss::DiagGaussian;
use crate::index::IndexShard;

/// Per-query constants for scoring raw index records.
///
/// With `c = a_X + ½` and `den = 2c·σ_Y² − 1`, one dimension contributes
/// `½ ln(−2a_X) + b_X²/4a_X − ½ ln(−den) − (μ_Y²·den + (b_X σ_Y² + μ_Y)²) / (2σ_Y²·den)`
/// to the convolution score. The first two terms depend only on the query
/// and are folded into `base`; `den < 0` is the integrability condition.
#[derive(Debug, Clone)]
pub struct QueryKernel {
    d: usize,
    two_c: Vec<f64>,
    bx: Vec<f64>,
    base: f64,
}

/// Logarithms are taken of products of this many factors.
const LN_BLOCK: usize = 8;

impl QueryKernel {
    pub fn new(gx: &DiagGaussian) -> Self {
        let d = gx.dim();
        let mut two_c = Vec::with_capacity(d);
        let mut bx = Vec::with_capacity(d);
        let mut base = 0.0;
        for (&m, &v) in gx.mean().iter().zip(gx.var()) {
            let ax = -0.5 / v;
            let b = m / v;
            two_c.push(2.0 * ax + 1.0);
            bx.push(b);
            base += 0.5 * (-2.0 * ax).ln() + b * b / (4.0 * ax);
        }
        Self { d, two_c, bx, base }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Scores one numeric record (`id, mu × d, var × d, log_py`). Returns
    /// `None` when the entry fails the integrability condition or the score
    /// is not finite.
    #[inline]
    pub fn score_record(&self, rec: &[u8]) -> Option<f64> {
        let d = self.d;
        let mu = &rec[8..8 + 8 * d];
        let var = &rec[8 + 8 * d..8 + 16 * d];
        let log_py = read(&rec[8 + 16 * d..], 0);
        let mut quad = 0.0;
        let mut ln_sum = 0.0;
        let mut ok = true;
        let mut k = 0;
        while k < d {
            let end = (k + LN_BLOCK).min(d);
            let mut prod = 1.0;
            for j in k..end {
                let m = read(mu, j);
                let v = read(var, j);
                let den = self.two_c[j] * v - 1.0;
                ok &= (den < 0.0) & (v > 0.0);
                let t = self.bx[j] * v + m;
                quad += (m * m * den + t * t) / (v * den);
                prod *= -den;
            }
            ln_sum += prod.ln();
            k = end;
        }
        if !ok {
            return None;
        }
        let mut total = self.base + log_py - 0.5 * (ln_sum + quad);
        if !total.is_finite() {
            // A block product over- or underflowed; redo with one log per factor.
            ln_sum = (0..d)
                .map(|j| (1.0 - self.two_c[j] * read(var, j)).ln())
                .sum();
            total = self.base + log_py - 0.5 * (ln_sum + quad);
        }
        total.is_finite().then_some(total)
    }
}

#[inline(always)]
fn read(bytes: &[u8], k: usize) -> f64 {
    f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap())
}

/// A scored row; greater means ranked earlier (higher score, then lower id).
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub score: f64,
    pub id: u64,
    pub(crate) shard: usize,
    pub(crate) row: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Bounded selection of the `k` best candidates.
#[derive(Debug)]
pub struct TopK {
    k: usize,
    heap: BinaryHeap<Reverse<Candidate>>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k.saturating_add(1).min(1 << 20)),
        }
    }

    #[inline]
    pub fn offer(&mut self, c: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(Reverse(c));
        } else if let Some(mut worst) = self.heap.peek_mut() {
            if c > worst.0 {
                *worst = Reverse(c);
            }
        }
    }

    pub fn into_sorted(self) -> Vec<Candidate> {
        let mut v: Vec<Candidate> = self.heap.into_iter().map(|r| r.0).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

/// Rows of one shard that were scanned and those excluded as non-integrable.
#[derive(Debug)]
pub struct ShardHits {
    pub top: TopK,
    pub scanned: usize,
    pub excluded: Vec<(u64, usize)>,
}

/// Scores every entry of `shard` against the query, keeping the `k` best.
/// Each numeric record is read once; no texts are touched.
pub fn scan_shard(
    kernel: &QueryKernel,
    shard: &IndexShard,
    shard_no: usize,
    k: usize,
) -> ShardHits {
    let index = shard.index();
    let mut top = TopK::new(k.min(shard.len()));
    let mut excluded = Vec::new();
    let mut scanned = 0;
    for row in shard.rows() {
        let rec = index.record(row);
        let id = u64::from_le_bytes(rec[..8].try_into().unwrap());
        scanned += 1;
        match kernel.score_record(rec) {
            Some(score) => top.offer(Candidate {
                score,
                id,
                shard: shard_no,
                row,
            }),
            None => excluded.push((id, row)),
        }
    }
    ShardHits {
        top,
        scanned,
        excluded,
    }
}

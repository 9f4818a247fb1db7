use std::collections::{BTreeSet, HashSet};

use crate::context::{parse_method, MethodAst};
use crate::error::{Error, Result};
use crate::search::SearchResult;
use crate::sketch::{
    api_calls, extract_api_sequences, parse_sketch, CallExpr, Matcher, SketchAst,
    DEFAULT_SEQUENCE_LIMIT,
};

use super::tasks::RetrievalTask;

/// A program prepared for repeated equivalence checks under every matcher.
#[derive(Debug, Clone)]
pub struct Judged {
    sketch: SketchAst,
    api: BTreeSet<CallExpr>,
    seqs: BTreeSet<Vec<CallExpr>>,
    method: Option<MethodAst>,
}

impl Judged {
    pub fn new(sketch: SketchAst, method: Option<MethodAst>) -> Self {
        Self {
            api: api_calls(&sketch),
            seqs: extract_api_sequences(&sketch, DEFAULT_SEQUENCE_LIMIT)
                .into_iter()
                .collect(),
            sketch,
            method,
        }
    }

    /// Parses a result's sketch and, when it is well formed, its source.
    pub fn from_texts(sketch_text: &str, source_text: &str) -> Result<Self> {
        Ok(Self::new(
            parse_sketch(sketch_text)?,
            parse_method(source_text).ok(),
        ))
    }

    pub fn from_task(t: &RetrievalTask) -> Self {
        Self::new(t.truth_sketch.clone(), Some(t.truth_method.clone()))
    }

    pub fn equivalent(&self, other: &Judged, m: Matcher) -> bool {
        match m {
            Matcher::Api => self.api == other.api,
            Matcher::Seq => self.seqs == other.seqs,
            Matcher::Sketch => self.sketch == other.sketch,
            Matcher::Exact => match (&self.method, &other.method) {
                (Some(a), Some(b)) => crate::sketch::exact_match(a, b),
                _ => false,
            },
        }
    }
}

/// Smallest 1-based rank whose result is equivalent to the task's truth.
pub fn frank(
    results: &[SearchResult],
    task: &RetrievalTask,
    matcher: Matcher,
) -> Result<Option<usize>> {
    let truth = Judged::from_task(task);
    for r in results {
        if Judged::from_texts(&r.sketch_text, &r.source_text)?.equivalent(&truth, matcher) {
            return Ok(Some(r.rank));
        }
    }
    Ok(None)
}

fn check(q: usize, k: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidArgument(
            "metrics need at least one task".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    Ok(())
}

/// `(1/Q) Σ_q I(FRank_q ≤ K)`; misses never count.
pub fn success_rate_at_k(franks: &[Option<usize>], k: usize) -> Result<f64> {
    check(franks.len(), k)?;
    let hits = franks
        .iter()
        .filter(|f| matches!(f, Some(r) if *r <= k))
        .count();
    Ok(hits as f64 / franks.len() as f64)
}

/// `(1/(KQ)) Σ_q Σ_{k≤K} I(result k of query q is equivalent)`. Ranks past
/// the end of a shorter result list count as not equivalent.
pub fn precision_at_k(flags: &[Vec<bool>], k: usize) -> Result<f64> {
    check(flags.len(), k)?;
    let hits: usize = flags
        .iter()
        .map(|f| f.iter().take(k).filter(|&&b| b).count())
        .sum();
    Ok(hits as f64 / (k * flags.len()) as f64)
}

/// Mean reciprocal FRank, misses contributing 0.
pub fn mrr(franks: &[Option<usize>]) -> Result<f64> {
    check(franks.len(), 1)?;
    Ok(franks
        .iter()
        .map(|f| f.map_or(0.0, |r| 1.0 / r as f64))
        .sum::<f64>()
        / franks.len() as f64)
}

/// `|A ∩ B| / |A ∪ B|` over the ids of the first `k` results of each list.
pub fn jaccard_top_k(a: &[SearchResult], b: &[SearchResult], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let sa: HashSet<u64> = a.iter().take(k).map(|r| r.id).collect();
    let sb: HashSet<u64> = b.iter().take(k).map(|r| r.id).collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return Ok(1.0);
    }
    Ok(sa.intersection(&sb).count() as f64 / union as f64)
}

/// `P(FRank > r)` for every `r = 0..=n` under a uniformly random ranking of
/// `n` entries of which `g` are equivalent: `C(n−g, r) / C(n, r)`.
fn miss_through(n: usize, g: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut p = 1.0;
    out.push(p);
    for i in 0..n {
        p *= if n - i > g {
            (n - g - i) as f64 / (n - i) as f64
        } else {
            0.0
        };
        out.push(p);
    }
    out
}

/// Expected SuccessRate@K of a uniformly random ranking:
/// `1 − C(n−g, K) / C(n, K)`.
pub fn random_success_rate(n: usize, g: usize, k: usize) -> f64 {
    1.0 - miss_through(n, g)[k.min(n)]
}

/// Expected reciprocal FRank of a uniformly random ranking, misses 0.
pub fn random_mrr(n: usize, g: usize) -> f64 {
    let tail = miss_through(n, g);
    (1..=n).map(|r| (tail[r - 1] - tail[r]) / r as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn results(ids: &[u64]) -> Vec<SearchResult> {
        ids.iter()
            .enumerate()
            .map(|(i, &id)| SearchResult {
                rank: i + 1,
                id,
                score: -(i as f64),
                sketch_text: String::new(),
                source_text: String::new(),
            })
            .collect()
    }

    #[test]
    fn metric_examples() {
        let f = [Some(1), Some(3), Some(12)];
        assert!((success_rate_at_k(&f, 10).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let m = mrr(&[Some(1), Some(2), Some(4)]).unwrap();
        assert!((m - 0.583_333_333_333_333_3).abs() < 1e-15);
        assert_eq!(mrr(&[None, Some(1)]).unwrap(), 0.5);
        let mut flags = vec![false; 10];
        flags[0] = true;
        flags[4] = true;
        flags[9] = true;
        assert!((precision_at_k(&[flags], 10).unwrap() - 0.3).abs() < 1e-15);
        assert!(success_rate_at_k(&[], 10).is_err());
        assert!(success_rate_at_k(&f, 0).is_err());
    }

    #[test]
    fn jaccard_examples() {
        let a = results(&(0..100).collect::<Vec<_>>());
        assert_eq!(jaccard_top_k(&a, &a, 100).unwrap(), 1.0);
        let b = results(&(100..200).collect::<Vec<_>>());
        assert_eq!(jaccard_top_k(&a, &b, 100).unwrap(), 0.0);
        let c = results(&(9..109).collect::<Vec<_>>());
        let j = jaccard_top_k(&a, &c, 100).unwrap();
        assert!((j - 91.0 / 109.0).abs() < 1e-15);
        assert!((j - 0.834_862).abs() < 1e-6);
    }

    #[test]
    fn random_baseline_edge_cases() {
        assert_eq!(random_success_rate(10, 10, 1), 1.0);
        assert_eq!(random_success_rate(10, 0, 5), 0.0);
        assert!((random_success_rate(10, 1, 3) - 0.3).abs() < 1e-15);
        assert!((random_mrr(1, 1) - 1.0).abs() < 1e-15);
        // One equivalent among n: E[1/R] with R uniform on 1..n.
        let h: f64 = (1..=7).map(|r| 1.0 / r as f64).sum::<f64>() / 7.0;
        assert!((random_mrr(7, 1) - h).abs() < 1e-14);
    }
}

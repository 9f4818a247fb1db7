use std::collections::HashSet;

use rayon::prelude::*;

use super::IndexEntry;
use crate::context::CorpusRecord;
use crate::error::{Error, Result};
use crate::model::{estimate_log_py_encoded, ModelParams};
use crate::rng::text_seed;
use crate::sketch::{parse_sketch, serialize_sketch, SketchAst};

/// Reverse-encodes every program and estimates its `log P(Y)`.
///
/// The importance-sampling seed of an entry is derived from `seed` and the
/// canonical sketch text, so identical sketches get identical entries and
/// the result does not depend on evaluation order. Entries are evaluated in
/// parallel and returned in input order.
pub fn build_index(
    p: &ModelParams,
    corpus: &[(u64, SketchAst, String)],
    mc_n: usize,
    seed: u64,
) -> Result<Vec<IndexEntry>> {
    let mut seen = HashSet::with_capacity(corpus.len());
    if let Some((id, _, _)) = corpus.iter().find(|(id, _, _)| !seen.insert(*id)) {
        return Err(Error::InvalidArgument(format!("duplicate index id {id}")));
    }
    corpus
        .par_iter()
        .map(|(id, s, source)| {
            let text = serialize_sketch(s);
            let enc = p.encode_sketch(s);
            let q = p.reverse(&enc)?;
            let log_py = estimate_log_py_encoded(p, &enc, mc_n, text_seed(seed, &text))?.value;
            if !log_py.is_finite() {
                return Err(Error::NonFiniteObjective {
                    step: 0,
                    detail: format!("log P(Y) of entry {id} is {log_py}"),
                });
            }
            let (mu_y, var_y) = q.into_parts();
            Ok(IndexEntry {
                id: *id,
                mu_y,
                var_y,
                log_py,
                sketch_text: text,
                source_text: source.clone(),
            })
        })
        .collect()
}

/// `(id, sketch, source)` triples from ingested records.
pub fn corpus_from_records(records: &[CorpusRecord]) -> Result<Vec<(u64, SketchAst, String)>> {
    records
        .iter()
        .map(|r| Ok((r.id, parse_sketch(&r.sketch)?, r.source.clone())))
        .collect()
}

pub fn build_index_from_records(
    p: &ModelParams,
    records: &[CorpusRecord],
    mc_n: usize,
    seed: u64,
) -> Result<Vec<IndexEntry>> {
    build_index(p, &corpus_from_records(records)?, mc_n, seed)
}

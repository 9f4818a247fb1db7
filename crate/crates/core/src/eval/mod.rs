//! Retrieval evaluation: held-out tasks, equivalence-based metrics, and the
//! synthetic corpus used for desk-scale training.

mod metrics;
mod synthetic;
mod tasks;

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

pub use metrics::{
    frank, jaccard_top_k, mrr, precision_at_k, random_mrr, random_success_rate, success_rate_at_k,
    Judged,
};
pub use synthetic::{gen_synthetic_corpus, gen_synthetic_sources, SyntheticCorpus};
pub use tasks::{is_eligible, make_tasks, RetrievalTask};

use crate::error::{Error, Result};
use crate::index::IndexShard;
use crate::model::ModelParams;
use crate::search::search;
use crate::sketch::Matcher;

/// Results inspected per query unless configured otherwise.
pub const DEFAULT_RESULT_DEPTH: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatcherScores {
    pub matcher: Matcher,
    pub success_at_1: f64,
    pub success_at_10: f64,
    pub precision_at_10: f64,
    pub mrr: f64,
}

/// Expected scores of a uniformly random ranking of the whole index,
/// averaged over tasks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomBaseline {
    pub matcher: Matcher,
    pub success_at_10: f64,
    pub mrr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskOutcome {
    pub task_id: usize,
    pub api: Option<usize>,
    pub seq: Option<usize>,
    pub sketch: Option<usize>,
    pub exact: Option<usize>,
    /// Index entries equivalent to the truth under the sketch matcher.
    pub sketch_equivalents: usize,
}

impl TaskOutcome {
    pub fn frank(&self, m: Matcher) -> Option<usize> {
        match m {
            Matcher::Api => self.api,
            Matcher::Seq => self.seq,
            Matcher::Sketch => self.sketch,
            Matcher::Exact => self.exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub n_tasks: usize,
    pub index_size: usize,
    pub result_depth: usize,
    pub scores: Vec<MatcherScores>,
    pub random: Vec<RandomBaseline>,
    pub tasks: Vec<TaskOutcome>,
}

impl EvalReport {
    pub fn scores(&self, m: Matcher) -> &MatcherScores {
        self.scores
            .iter()
            .find(|s| s.matcher == m)
            .expect("every matcher is scored")
    }

    pub fn random(&self, m: Matcher) -> &RandomBaseline {
        self.random
            .iter()
            .find(|s| s.matcher == m)
            .expect("every matcher has a baseline")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// One header row and one value row; columns are metric-major, matchers
    /// in `api, seq, sketch, exact` order within each metric.
    pub fn to_csv(&self) -> String {
        let metrics: [(&str, fn(&MatcherScores) -> f64); 4] = [
            ("success_at_1", |s| s.success_at_1),
            ("success_at_10", |s| s.success_at_10),
            ("precision_at_10", |s| s.precision_at_10),
            ("mrr", |s| s.mrr),
        ];
        let mut head = vec!["tasks".to_owned()];
        let mut row = vec![self.n_tasks.to_string()];
        for (name, get) in metrics {
            for m in Matcher::ALL {
                head.push(format!("{name}_{}", m.name()));
                row.push(format!("{:.6}", get(self.scores(m))));
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "{}", head.join(","));
        let _ = writeln!(out, "{}", row.join(","));
        out
    }
}

/// Searches every task's query against `shards` and scores the top
/// `depth` results under all four matchers.
pub fn run_eval(
    shards: &[IndexShard],
    p: &ModelParams,
    tasks: &[RetrievalTask],
    depth: usize,
) -> Result<EvalReport> {
    if tasks.is_empty() {
        return Err(Error::InvalidArgument("no tasks to evaluate".into()));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument(
            "result depth must be at least 1".into(),
        ));
    }
    let mut rows = Vec::new();
    for s in shards {
        rows.extend(s.rows().map(|r| (s.index().clone(), r)));
    }
    let judged: Vec<(u64, Judged)> = rows
        .par_iter()
        .map(|(idx, r)| {
            Ok((
                idx.id(*r),
                Judged::from_texts(idx.sketch_text(*r)?, idx.source_text(*r)?)?,
            ))
        })
        .collect::<Result<_>>()?;
    let by_id: HashMap<u64, usize> = judged
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (*id, i))
        .collect();
    let n = judged.len();

    struct PerTask {
        outcome: TaskOutcome,
        flags: [Vec<bool>; 4],
        equivalents: [usize; 4],
    }
    let per: Vec<PerTask> = tasks
        .par_iter()
        .map(|t| {
            let truth = Judged::from_task(t);
            let results = search(shards, p, &t.query, depth)?.results;
            let mut flags: [Vec<bool>; 4] = Default::default();
            for (mi, m) in Matcher::ALL.into_iter().enumerate() {
                flags[mi] = results
                    .iter()
                    .map(|r| judged[by_id[&r.id]].1.equivalent(&truth, m))
                    .collect();
            }
            let equivalents = Matcher::ALL.map(|m| {
                judged
                    .iter()
                    .filter(|(_, j)| j.equivalent(&truth, m))
                    .count()
            });
            let fr = |mi: usize| flags[mi].iter().position(|&b| b).map(|i| i + 1);
            Ok(PerTask {
                outcome: TaskOutcome {
                    task_id: t.task_id,
                    api: fr(0),
                    seq: fr(1),
                    sketch: fr(2),
                    exact: fr(3),
                    sketch_equivalents: equivalents[2],
                },
                flags,
                equivalents,
            })
        })
        .collect::<Result<_>>()?;

    let mut scores = Vec::new();
    let mut random = Vec::new();
    for (mi, m) in Matcher::ALL.into_iter().enumerate() {
        let franks: Vec<Option<usize>> = per.iter().map(|t| t.outcome.frank(m)).collect();
        let flags: Vec<Vec<bool>> = per.iter().map(|t| t.flags[mi].clone()).collect();
        scores.push(MatcherScores {
            matcher: m,
            success_at_1: success_rate_at_k(&franks, 1)?,
            success_at_10: success_rate_at_k(&franks, 10)?,
            precision_at_10: precision_at_k(&flags, 10)?,
            mrr: mrr(&franks)?,
        });
        let q = per.len() as f64;
        random.push(RandomBaseline {
            matcher: m,
            success_at_10: per
                .iter()
                .map(|t| random_success_rate(n, t.equivalents[mi], 10))
                .sum::<f64>()
                / q,
            mrr: per
                .iter()
                .map(|t| random_mrr(n, t.equivalents[mi]))
                .sum::<f64>()
                / q,
        });
    }
    Ok(EvalReport {
        n_tasks: tasks.len(),
        index_size: n,
        result_depth: depth,
        scores,
        random,
        tasks: per.into_iter().map(|t| t.outcome).collect(),
    })
}

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::context::{extract_query_context, ClassUnit, ContextBundle, MethodAst};
use crate::error::{Error, Result};
use crate::rng::rng;
use crate::sketch::{decompile, SketchAst};

/// A query built by removing one method body, with what it should retrieve.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalTask {
    pub task_id: usize,
    pub query: ContextBundle,
    pub truth_sketch: SketchAst,
    pub truth_method: MethodAst,
    /// Position of the source class in the corpus given to [`make_tasks`].
    pub class_index: usize,
    pub method_index: usize,
}

/// A class can yield a task when it has at least two method bodies.
pub fn is_eligible(c: &ClassUnit) -> bool {
    c.methods.iter().filter(|m| !m.is_hole()).count() >= 2
}

/// Samples `n` distinct eligible classes and removes one uniformly chosen
/// method body from each.
pub fn make_tasks(corpus: &[ClassUnit], n: usize, seed: u64) -> Result<Vec<RetrievalTask>> {
    let mut eligible: Vec<usize> = (0..corpus.len())
        .filter(|&i| is_eligible(&corpus[i]))
        .collect();
    if eligible.len() < n {
        return Err(Error::InsufficientClasses {
            requested: n,
            eligible: eligible.len(),
        });
    }
    let mut r = rng(seed);
    eligible.shuffle(&mut r);
    eligible
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(task_id, ci)| {
            let class = &corpus[ci];
            let bodies: Vec<usize> = (0..class.methods.len())
                .filter(|&m| !class.methods[m].is_hole())
                .collect();
            let mi = bodies[r.random_range(0..bodies.len())];
            let method = &class.methods[mi];
            Ok(RetrievalTask {
                task_id,
                query: extract_query_context(class, mi)?,
                truth_sketch: decompile(method, Some(class)),
                truth_method: method.clone(),
                class_index: ci,
                method_index: mi,
            })
        })
        .collect()
}

//! API call sequences along control-flow paths of a sketch.

use std::collections::HashSet;
use std::iter::once;

use super::{CallExpr, SketchAst, SketchStmt};

pub const DEFAULT_SEQUENCE_LIMIT: usize = 100;

/// Upper bound on raw paths visited while looking for distinct ones, so that
/// bodies whose paths are mostly duplicates still terminate quickly.
const MAX_RAW_PATHS: usize = 100_000;

type Path<'a> = Vec<&'a CallExpr>;
type Paths<'a> = Box<dyn Iterator<Item = Path<'a>> + 'a>;

/// Distinct call sequences in enumeration order, at most `limit` of them.
///
/// Loops run zero or one times (zero first); `if` yields the then-branch
/// paths before the else-branch ones; a `try` yields its body paths, then for
/// each catch the full body path followed by the handler path. Paths are
/// generated lazily, so the cost is proportional to what is kept.
pub fn extract_api_sequences(s: &SketchAst, limit: usize) -> Vec<Vec<CallExpr>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    for p in paths(&s.body).take(MAX_RAW_PATHS) {
        if seen.insert(p.clone()) {
            out.push(p.into_iter().cloned().collect());
            if out.len() == limit {
                break;
            }
        }
    }
    out
}

fn join<'a>(a: &[&'a CallExpr], b: &[&'a CallExpr]) -> Path<'a> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn paths<'a>(s: &'a SketchStmt) -> Paths<'a> {
    match s {
        SketchStmt::Skip => Box::new(once(Vec::new())),
        SketchStmt::Call(c) => Box::new(once(vec![c])),
        SketchStmt::Seq(items) => seq_paths(items),
        SketchStmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let c: Path<'a> = cond.iter().collect();
            let c2 = c.clone();
            Box::new(
                paths(then_branch)
                    .map(move |p| join(&c, &p))
                    .chain(paths(else_branch).map(move |p| join(&c2, &p))),
            )
        }
        SketchStmt::While { cond, body } => {
            let c: Path<'a> = cond.iter().collect();
            let c2 = c.clone();
            Box::new(once(c.clone()).chain(paths(body).map(move |p| {
                let mut v = join(&c2, &p);
                v.extend_from_slice(&c2);
                v
            })))
        }
        SketchStmt::Try { body, catches } => {
            Box::new(paths(body).chain(catches.iter().flat_map(move |cc| {
                paths(body).flat_map(move |p| paths(&cc.body).map(move |q| join(&p, &q)))
            })))
        }
    }
}

fn seq_paths<'a>(items: &'a [SketchStmt]) -> Paths<'a> {
    match items.split_first() {
        None => Box::new(once(Vec::new())),
        Some((head, rest)) => {
            Box::new(paths(head).flat_map(move |p| seq_paths(rest).map(move |q| join(&p, &q))))
        }
    }
}

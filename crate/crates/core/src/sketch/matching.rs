//! Program equivalence relations used to judge retrieval results.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{extract_api_sequences, CallExpr, SketchAst};
use crate::context::ast::MethodAst;

/// Equivalence relations, from coarsest to finest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matcher {
    Api,
    Seq,
    Sketch,
    Exact,
}

impl Matcher {
    pub const ALL: [Matcher; 4] = [Matcher::Api, Matcher::Seq, Matcher::Sketch, Matcher::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Matcher::Api => "api",
            Matcher::Seq => "seq",
            Matcher::Sketch => "sketch",
            Matcher::Exact => "exact",
        }
    }
}

/// Every call in the sketch, loop and branch conditions included.
pub fn api_calls(s: &SketchAst) -> BTreeSet<CallExpr> {
    let mut set = BTreeSet::new();
    s.body.for_each_call(&mut |c| {
        set.insert(c.clone());
    });
    set
}

pub fn api_match(a: &SketchAst, b: &SketchAst) -> bool {
    api_calls(a) == api_calls(b)
}

pub fn seq_match(a: &SketchAst, b: &SketchAst, limit: usize) -> bool {
    let sa: BTreeSet<_> = extract_api_sequences(a, limit).into_iter().collect();
    let sb: BTreeSet<_> = extract_api_sequences(b, limit).into_iter().collect();
    sa == sb
}

pub fn sketch_match(a: &SketchAst, b: &SketchAst) -> bool {
    a == b
}

/// Header and body must agree exactly. Javadoc and source positions are not
/// part of the comparison.
pub fn exact_match(a: &MethodAst, b: &MethodAst) -> bool {
    a.modifiers == b.modifiers
        && a.return_type == b.return_type
        && a.name == b.name
        && a.formals == b.formals
        && a.throws == b.throws
        && a.body == b.body
}

#[cfg(test)]
mod tests {
    use super::super::{SketchStmt, DEFAULT_SEQUENCE_LIMIT};
    use super::*;

    fn line(ms: &[&str]) -> SketchAst {
        SketchAst::new(
            "void",
            vec![],
            SketchStmt::seq(
                ms.iter()
                    .map(|m| SketchStmt::Call(CallExpr::new("A", *m, vec![]))),
            ),
        )
    }

    #[test]
    fn reordered_calls() {
        let (a, b) = (line(&["f", "g"]), line(&["g", "f"]));
        assert!(api_match(&a, &b));
        assert!(!seq_match(&a, &b, DEFAULT_SEQUENCE_LIMIT));
        assert!(!sketch_match(&a, &b));
        for m in [&a, &b] {
            assert!(api_match(m, m) && seq_match(m, m, 100) && sketch_match(m, m));
        }
    }
}

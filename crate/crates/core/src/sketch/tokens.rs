//! Pre-order linearization of a sketch into decoder tokens.

use super::{CallExpr, SketchAst, SketchStmt};

pub const UNKNOWN_TOKEN: &str = "<unk>";
pub const DEPTH_BINS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchTokens {
    pub tokens: Vec<String>,
    /// Count of body nodes per depth; the last bin absorbs deeper nodes.
    pub depth_histogram: [u32; DEPTH_BINS],
}

/// Header `ret:τ fp:τ… FP-END`, then the body in pre-order. Every composite
/// node is closed by an end marker so the encoding is prefix-free.
pub fn sketch_tokens(s: &SketchAst) -> SketchTokens {
    let mut w = Writer {
        tokens: Vec::new(),
        depth_histogram: [0; DEPTH_BINS],
    };
    w.tokens.push(format!("ret:{}", s.ret_type));
    for t in &s.formal_param_types {
        w.tokens.push(format!("fp:{t}"));
    }
    w.tokens.push("FP-END".into());
    w.stmt(&s.body, 0);
    SketchTokens {
        tokens: w.tokens,
        depth_histogram: w.depth_histogram,
    }
}

struct Writer {
    tokens: Vec<String>,
    depth_histogram: [u32; DEPTH_BINS],
}

impl Writer {
    fn node(&mut self, depth: usize, tok: String) {
        self.depth_histogram[depth.min(DEPTH_BINS - 1)] += 1;
        self.tokens.push(tok);
    }

    fn call(&mut self, c: &CallExpr, depth: usize) {
        self.node(depth, format!("call:{}", c.token()));
    }

    fn conds(&mut self, cond: &[CallExpr], depth: usize) {
        for c in cond {
            self.call(c, depth + 1);
        }
        self.tokens.push("COND-END".into());
    }

    fn stmt(&mut self, s: &SketchStmt, depth: usize) {
        match s {
            SketchStmt::Skip => self.node(depth, "SKIP".into()),
            SketchStmt::Call(c) => self.call(c, depth),
            SketchStmt::Seq(items) => {
                self.node(depth, "SEQ".into());
                for i in items {
                    self.stmt(i, depth + 1);
                }
                self.tokens.push("SEQ-END".into());
            }
            SketchStmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.node(depth, "IF".into());
                self.conds(cond, depth);
                self.stmt(then_branch, depth + 1);
                self.stmt(else_branch, depth + 1);
            }
            SketchStmt::While { cond, body } => {
                self.node(depth, "WHILE".into());
                self.conds(cond, depth);
                self.stmt(body, depth + 1);
            }
            SketchStmt::Try { body, catches } => {
                self.node(depth, "TRY".into());
                self.stmt(body, depth + 1);
                for c in catches {
                    self.node(depth + 1, format!("catch:{}", c.exception_type));
                    self.stmt(&c.body, depth + 2);
                }
                self.tokens.push("TRY-END".into());
            }
        }
    }
}

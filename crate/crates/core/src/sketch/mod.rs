//! The sketch language: an abstraction of a method body that keeps API
//! calls, types, and control-flow shape and drops everything else.
//!
//! ```text
//! Y     ::= Y_api ; Y_ret ; Y_fp
//! Y_api ::= skip | call Cexp | Y1 ; Y2
//!         | if Cseq then Y1 else Y2 | while Cseq do Y1 | try Y Catch*
//! Cexp  ::= τ0.α(τ1, ..., τk)
//! ```

mod decompile;
mod matching;
mod paths;
mod text;
mod tokens;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use decompile::decompile;
pub use matching::{api_calls, api_match, exact_match, seq_match, sketch_match, Matcher};
pub use paths::{extract_api_sequences, DEFAULT_SEQUENCE_LIMIT};
pub use text::{parse_sketch, serialize_body, serialize_sketch};
pub use tokens::{sketch_tokens, SketchTokens, DEPTH_BINS, UNKNOWN_TOKEN};

/// Placeholder for a type that could not be determined.
pub const UNKNOWN_TYPE: &str = "Object";

/// `τ0.α(τ1, ..., τk)`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CallExpr {
    pub receiver_type: String,
    pub method_name: String,
    pub arg_types: Vec<String>,
}

impl CallExpr {
    pub fn new(
        receiver_type: impl Into<String>,
        method_name: impl Into<String>,
        arg_types: Vec<String>,
    ) -> Self {
        Self {
            receiver_type: receiver_type.into(),
            method_name: method_name.into(),
            arg_types,
        }
    }

    /// Compact form without spaces, used as a vocabulary token.
    pub fn token(&self) -> String {
        format!(
            "{}.{}({})",
            self.receiver_type,
            self.method_name,
            self.arg_types.join(",")
        )
    }
}

/// Text form: `Recv.method (A, B)`.
impl fmt::Display for CallExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{} ({})",
            self.receiver_type,
            self.method_name,
            self.arg_types.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CatchClause {
    pub exception_type: String,
    pub body: SketchStmt,
}

/// Body statements. Sequences are kept canonical: a `Seq` always has at
/// least two elements, none of which is a `Seq` or `Skip`. Build them with
/// [`SketchStmt::seq`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SketchStmt {
    Skip,
    Call(CallExpr),
    Seq(Vec<SketchStmt>),
    If {
        cond: Vec<CallExpr>,
        then_branch: Box<SketchStmt>,
        else_branch: Box<SketchStmt>,
    },
    While {
        cond: Vec<CallExpr>,
        body: Box<SketchStmt>,
    },
    Try {
        body: Box<SketchStmt>,
        catches: Vec<CatchClause>,
    },
}

impl SketchStmt {
    /// Sequential composition, flattened, with `skip` elided.
    pub fn seq(items: impl IntoIterator<Item = SketchStmt>) -> SketchStmt {
        let mut out = Vec::new();
        for item in items {
            match item {
                SketchStmt::Skip => {}
                SketchStmt::Seq(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => SketchStmt::Skip,
            1 => out.pop().unwrap(),
            _ => SketchStmt::Seq(out),
        }
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            SketchStmt::Skip | SketchStmt::Call(_) => true,
            SketchStmt::Seq(items) => {
                items.len() >= 2
                    && items.iter().all(|s| {
                        !matches!(s, SketchStmt::Seq(_) | SketchStmt::Skip) && s.is_canonical()
                    })
            }
            SketchStmt::If {
                then_branch,
                else_branch,
                ..
            } => then_branch.is_canonical() && else_branch.is_canonical(),
            SketchStmt::While { body, .. } => body.is_canonical(),
            SketchStmt::Try { body, catches } => {
                body.is_canonical() && catches.iter().all(|c| c.body.is_canonical())
            }
        }
    }

    /// Visits every call expression, conditions included, in pre-order.
    pub fn for_each_call<'a>(&'a self, f: &mut impl FnMut(&'a CallExpr)) {
        match self {
            SketchStmt::Skip => {}
            SketchStmt::Call(c) => f(c),
            SketchStmt::Seq(items) => items.iter().for_each(|s| s.for_each_call(f)),
            SketchStmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                cond.iter().for_each(&mut *f);
                then_branch.for_each_call(f);
                else_branch.for_each_call(f);
            }
            SketchStmt::While { cond, body } => {
                cond.iter().for_each(&mut *f);
                body.for_each_call(f);
            }
            SketchStmt::Try { body, catches } => {
                body.for_each_call(f);
                for c in catches {
                    c.body.for_each_call(f);
                }
            }
        }
    }
}

/// A whole sketch: body plus return type and formal parameter types.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SketchAst {
    pub ret_type: String,
    pub formal_param_types: Vec<String>,
    pub body: SketchStmt,
}

impl SketchAst {
    pub fn new(
        ret_type: impl Into<String>,
        formal_param_types: Vec<String>,
        body: SketchStmt,
    ) -> Self {
        Self {
            ret_type: ret_type.into(),
            formal_param_types,
            body,
        }
    }
}

impl fmt::Display for SketchAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_sketch(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(r: &str, m: &str) -> SketchStmt {
        SketchStmt::Call(CallExpr::new(r, m, vec![]))
    }

    #[test]
    fn seq_flattens_and_drops_skip() {
        let s = SketchStmt::seq([
            SketchStmt::Skip,
            call("A", "f"),
            SketchStmt::seq([call("B", "g"), call("C", "h")]),
        ]);
        assert_eq!(
            s,
            SketchStmt::Seq(vec![call("A", "f"), call("B", "g"), call("C", "h")])
        );
        assert!(s.is_canonical());
        assert_eq!(
            SketchStmt::seq([SketchStmt::Skip, SketchStmt::Skip]),
            SketchStmt::Skip
        );
        assert_eq!(SketchStmt::seq([call("A", "f")]), call("A", "f"));
    }

    #[test]
    fn call_renderings() {
        let c = CallExpr::new("InputStream", "read", vec!["byte[]".into(), "int".into()]);
        assert_eq!(c.to_string(), "InputStream.read (byte[], int)");
        assert_eq!(c.token(), "InputStream.read(byte[],int)");
    }
}

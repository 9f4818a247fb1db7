//! The MJ corpus language and evidence extraction.
//!
//! MJ is a small Java-like language: classes with fields and methods,
//! javadoc comments, typed locals, calls, `new`, if/else, while, try/catch
//! and return. A method body consisting of `__CODE_SEARCH__` marks the
//! position being searched for; `?` stands for an unknown type or name.

pub mod ast;
mod corpus;
mod extract;
mod lexer;
mod parser;
mod print;

pub use ast::{ClassUnit, MethodAst, MethodBody};
pub use corpus::{read_jsonl, records_from_units, write_jsonl, CorpusRecord};
pub use extract::{
    extract_context, extract_query_context, find_hole, javadoc_tokens, split_camel_case,
    ContextBundle, EvidenceType,
};
pub use parser::{parse_method, parse_source, HOLE};
pub use print::{print_class, print_method, print_source};

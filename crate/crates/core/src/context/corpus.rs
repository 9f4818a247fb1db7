//! JSON-lines interchange format: one record per method.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::ast::ClassUnit;
use super::extract::{extract_context, extract_query_context, ContextBundle};
use super::print::print_method;
use crate::error::{Error, Result};
use crate::sketch::{decompile, serialize_sketch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: u64,
    pub evidences: ContextBundle,
    /// Sketch text, header lines included.
    pub sketch: String,
    /// Pretty-printed method source for display.
    pub source: String,
}

/// One record per non-hole method, ids assigned consecutively from
/// `first_id`. By default the evidence is extracted as a query would see it
/// (the method's own body masked); `include_body` keeps body evidence.
pub fn records_from_units(
    units: &[ClassUnit],
    first_id: u64,
    include_body: bool,
) -> Result<Vec<CorpusRecord>> {
    let mut out = Vec::new();
    let mut id = first_id;
    for u in units {
        for (i, m) in u.methods.iter().enumerate() {
            if m.is_hole() {
                continue;
            }
            let evidences = if include_body {
                extract_context(u, i)?
            } else {
                extract_query_context(u, i)?
            };
            out.push(CorpusRecord {
                id,
                evidences,
                sketch: serialize_sketch(&decompile(m, Some(u))),
                source: print_method(m),
            });
            id += 1;
        }
    }
    Ok(out)
}

pub fn write_jsonl(records: &[CorpusRecord], mut w: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl(r: impl BufRead) -> Result<Vec<CorpusRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CorpusRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(i + 1, e.column(), e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

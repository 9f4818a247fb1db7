//! The searchable database: one `(μ_Y, σ_Y², log P(Y))` triple per indexed
//! program, persisted in the `CDXI` format.
//!
//! ```text
//! "CDXI"  u32 version  u32 d  u64 count
//! count × ( u64 id  f64 × d mu  f64 × d var  f64 log_py )     numeric section
//! count × u64 offset                                          text offset table
//! per entry: u32 len + sketch bytes, u32 len + source bytes   text payloads
//! ```
//!
//! Offsets are relative to the start of the payload region. All integers and
//! floats are little-endian.

mod build;
mod store;

pub use build::{build_index, build_index_from_records, corpus_from_records};
pub use store::{
    encode_index, load_index, save_index, shard, Index, IndexShard, IndexStats, IndexWriter,
    INDEX_VERSION,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: u64,
    pub mu_y: Vec<f64>,
    pub var_y: Vec<f64>,
    pub log_py: f64,
    pub sketch_text: String,
    pub source_text: String,
}

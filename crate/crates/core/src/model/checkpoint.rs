//! `CDMP` checkpoint format, little-endian throughout:
//!
//! ```text
//! "CDMP"  u32 version  u32 d  u32 n_types(=14)
//! u64 evidence_vocab_size × n_types   u64 sketch_vocab_size   u32 depth_bins   u32 positions
//! f64 × parameter_count               (blocks in `Layout::blocks()` order)
//! vocabularies: for each evidence type, then the sketch vocabulary,
//!               every token as u32 byte length + UTF-8 bytes
//! ```

use std::fs;
use std::path::Path;

use super::params::{Layout, ModelParams, DECODER_POSITIONS};
use super::vocab::Vocab;
use crate::binio::{put_f64, put_str, put_u32, put_u64, Reader};
use crate::context::EvidenceType;
use crate::error::{Error, Result};
use crate::sketch::DEPTH_BINS;

const MAGIC: &[u8; 4] = b"CDMP";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint(p: &ModelParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 8 * p.theta().len());
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, CHECKPOINT_VERSION);
    put_u32(&mut out, p.d() as u32);
    put_u32(&mut out, EvidenceType::COUNT as u32);
    for v in &p.evidence_vocab {
        put_u64(&mut out, v.len() as u64);
    }
    put_u64(&mut out, p.sketch_vocab.len() as u64);
    put_u32(&mut out, DEPTH_BINS as u32);
    put_u32(&mut out, DECODER_POSITIONS as u32);
    for &x in p.theta() {
        put_f64(&mut out, x);
    }
    for v in p.evidence_vocab.iter().chain([&p.sketch_vocab]) {
        for t in v.tokens() {
            put_str(&mut out, t);
        }
    }
    out
}

pub fn read_checkpoint(buf: &[u8]) -> Result<ModelParams> {
    let mut r = Reader::new(buf, "checkpoint");
    r.header(MAGIC, CHECKPOINT_VERSION)?;
    let d = r.u32()? as usize;
    let n_types = r.u32()? as usize;
    if d == 0 || n_types != EvidenceType::COUNT {
        return Err(Error::Format(format!(
            "checkpoint: invalid header (d = {d}, types = {n_types})"
        )));
    }
    let mut sizes = [0usize; EvidenceType::COUNT];
    for s in &mut sizes {
        *s = r.u64()? as usize;
    }
    let sketch_size = r.u64()? as usize;
    let bins = r.u32()? as usize;
    if bins != DEPTH_BINS {
        return Err(Error::Format(format!(
            "checkpoint: depth bins {bins}, expected {DEPTH_BINS}"
        )));
    }
    let positions = r.u32()? as usize;
    if positions != DECODER_POSITIONS {
        return Err(Error::Format(format!(
            "checkpoint: {positions} decoder positions, expected {DECODER_POSITIONS}"
        )));
    }
    let layout = Layout::new(d, sizes, sketch_size);
    if r.remaining() / 8 < layout.total() {
        return Err(Error::Format(
            "checkpoint truncated in parameter section".into(),
        ));
    }
    let theta = (0..layout.total())
        .map(|_| r.f64())
        .collect::<Result<Vec<f64>>>()?;
    let mut read_vocab = |n: usize| -> Result<Vocab> {
        let toks = (0..n).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
        Vocab::from_tokens(toks)
            .ok_or_else(|| Error::Format("checkpoint: malformed vocabulary".into()))
    };
    let evidence_vocab = sizes
        .iter()
        .map(|&n| read_vocab(n))
        .collect::<Result<Vec<_>>>()?;
    let sketch_vocab = read_vocab(sketch_size)?;
    if r.remaining() != 0 {
        return Err(Error::Format(format!(
            "checkpoint: {} trailing bytes",
            r.remaining()
        )));
    }
    Ok(ModelParams::from_parts(
        layout,
        theta,
        evidence_vocab,
        sketch_vocab,
    ))
}

pub fn save_checkpoint(p: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_checkpoint(p))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    read_checkpoint(&fs::read(path)?)
}

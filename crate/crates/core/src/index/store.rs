use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::Deref;
use std::path::Path;
use std::sync::Arc;

use memmap2::Mmap;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::IndexEntry;
use crate::binio::{put_f64, put_str, put_u32, put_u64, Reader};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CDXI";
pub const INDEX_VERSION: u32 = 1;
pub(crate) const HEADER_LEN: usize = 20;

pub(crate) fn record_len(d: usize) -> usize {
    16 * d + 16
}

enum Bytes {
    Owned(Vec<u8>),
    Mapped(Mmap),
}

impl Deref for Bytes {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        match self {
            Bytes::Owned(v) => v,
            Bytes::Mapped(m) => m,
        }
    }
}

struct IndexData {
    bytes: Bytes,
    d: usize,
    count: usize,
    table: usize,
    payload: usize,
}

/// A validated, immutable `CDXI` image, in memory or memory-mapped. Cloning
/// shares the underlying bytes.
#[derive(Clone)]
pub struct Index {
    data: Arc<IndexData>,
}

impl std::fmt::Debug for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Index")
            .field("d", &self.d())
            .field("count", &self.len())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexStats {
    pub count: usize,
    pub d: usize,
    pub bytes: usize,
    /// SHA-256 of the whole file, hex.
    pub checksum: String,
}

fn check_entry(d: usize, e: &IndexEntry) -> Result<()> {
    if e.mu_y.len() != d || e.var_y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if e.mu_y.len() != d {
                e.mu_y.len()
            } else {
                e.var_y.len()
            },
        });
    }
    Ok(())
}

/// Serializes `entries` into a `CDXI` image. `d` is taken from the first
/// entry (0 for an empty index).
pub fn encode_index(entries: &[IndexEntry]) -> Result<Vec<u8>> {
    let d = entries.first().map_or(0, |e| e.mu_y.len());
    let mut ids = HashSet::with_capacity(entries.len());
    let text_len: usize = entries
        .iter()
        .map(|e| 8 + e.sketch_text.len() + e.source_text.len())
        .sum();
    let mut out = Vec::with_capacity(HEADER_LEN + entries.len() * (record_len(d) + 8) + text_len);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, INDEX_VERSION);
    put_u32(&mut out, d as u32);
    put_u64(&mut out, entries.len() as u64);
    for e in entries {
        check_entry(d, e)?;
        if !ids.insert(e.id) {
            return Err(Error::InvalidArgument(format!(
                "duplicate index id {}",
                e.id
            )));
        }
        put_u64(&mut out, e.id);
        for &x in e.mu_y.iter().chain(&e.var_y) {
            put_f64(&mut out, x);
        }
        put_f64(&mut out, e.log_py);
    }
    let mut off = 0u64;
    for e in entries {
        put_u64(&mut out, off);
        off += (8 + e.sketch_text.len() + e.source_text.len()) as u64;
    }
    for e in entries {
        put_str(&mut out, &e.sketch_text);
        put_str(&mut out, &e.source_text);
    }
    Ok(out)
}

fn read_len(bytes: &[u8], at: usize) -> Option<usize> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
}

impl Index {
    fn validate(bytes: Bytes) -> Result<Self> {
        let mut r = Reader::new(&bytes, "index");
        r.header(MAGIC, INDEX_VERSION)?;
        let d = r.u32()? as usize;
        let count = usize::try_from(r.u64()?)
            .map_err(|_| Error::Format("index: count overflows".into()))?;
        let too_big = || Error::Format("index: declared size exceeds addressable memory".into());
        let table = count
            .checked_mul(record_len(d))
            .and_then(|n| n.checked_add(HEADER_LEN))
            .ok_or_else(too_big)?;
        let payload = count
            .checked_mul(8)
            .and_then(|n| n.checked_add(table))
            .ok_or_else(too_big)?;
        if bytes.len() < payload {
            return Err(Error::Format(format!(
                "index truncated: {} bytes, numeric section and offset table need {payload}",
                bytes.len()
            )));
        }
        let mut expect = 0usize;
        for i in 0..count {
            let at = table + 8 * i;
            let off = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) as usize;
            if off != expect {
                return Err(Error::Format(format!(
                    "index: text offset of entry {i} is {off}, expected {expect}"
                )));
            }
            let base = payload + off;
            let a = read_len(&bytes, base)
                .ok_or_else(|| Error::Format("index truncated in text section".into()))?;
            let b = read_len(&bytes, base + 4 + a)
                .ok_or_else(|| Error::Format("index truncated in text section".into()))?;
            expect = off + 8 + a + b;
        }
        match bytes.len().cmp(&(payload + expect)) {
            std::cmp::Ordering::Less => {
                return Err(Error::Format("index truncated in text section".into()))
            }
            std::cmp::Ordering::Greater => {
                return Err(Error::Format(format!(
                    "index: {} trailing bytes",
                    bytes.len() - payload - expect
                )))
            }
            _ => {}
        }
        Ok(Self {
            data: Arc::new(IndexData {
                bytes,
                d,
                count,
                table,
                payload,
            }),
        })
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self> {
        Self::validate(Bytes::Owned(bytes))
    }

    pub fn from_entries(entries: &[IndexEntry]) -> Result<Self> {
        Self::from_bytes(encode_index(entries)?)
    }

    /// Reads the whole file into memory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(std::fs::read(path)?)
    }

    /// Memory-maps the file. The file must not be modified while mapped.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        // SAFETY: the mapping is read-only and index files are treated as
        // immutable once written.
        let map = unsafe { Mmap::map(&file)? };
        Self::validate(Bytes::Mapped(map))
    }

    pub fn d(&self) -> usize {
        self.data.d
    }

    pub fn len(&self) -> usize {
        self.data.count
    }

    pub fn is_empty(&self) -> bool {
        self.data.count == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data.bytes
    }

    /// The numeric record of entry `i`: id, mu, var, log_py.
    #[inline]
    pub(crate) fn record(&self, i: usize) -> &[u8] {
        let n = record_len(self.data.d);
        let at = HEADER_LEN + i * n;
        &self.data.bytes[at..at + n]
    }

    #[inline]
    pub fn id(&self, i: usize) -> u64 {
        u64::from_le_bytes(self.record(i)[..8].try_into().unwrap())
    }

    fn f64_at(rec: &[u8], k: usize) -> f64 {
        f64::from_le_bytes(rec[8 + 8 * k..16 + 8 * k].try_into().unwrap())
    }

    pub fn mu(&self, i: usize) -> Vec<f64> {
        let rec = self.record(i);
        (0..self.d()).map(|k| Self::f64_at(rec, k)).collect()
    }

    pub fn var(&self, i: usize) -> Vec<f64> {
        let rec = self.record(i);
        let d = self.d();
        (0..d).map(|k| Self::f64_at(rec, d + k)).collect()
    }

    pub fn log_py(&self, i: usize) -> f64 {
        Self::f64_at(self.record(i), 2 * self.d())
    }

    fn text(&self, i: usize, second: bool) -> Result<&str> {
        let data = &*self.data;
        let at = data.table + 8 * i;
        let off = u64::from_le_bytes(data.bytes[at..at + 8].try_into().unwrap()) as usize;
        let mut base = data.payload + off;
        let mut len = read_len(&data.bytes, base).unwrap_or(0);
        if second {
            base += 4 + len;
            len = read_len(&data.bytes, base).unwrap_or(0);
        }
        std::str::from_utf8(&data.bytes[base + 4..base + 4 + len])
            .map_err(|_| Error::Format(format!("index: entry {i} text is not UTF-8")))
    }

    pub fn sketch_text(&self, i: usize) -> Result<&str> {
        self.text(i, false)
    }

    pub fn source_text(&self, i: usize) -> Result<&str> {
        self.text(i, true)
    }

    pub fn entry(&self, i: usize) -> Result<IndexEntry> {
        Ok(IndexEntry {
            id: self.id(i),
            mu_y: self.mu(i),
            var_y: self.var(i),
            log_py: self.log_py(i),
            sketch_text: self.sketch_text(i)?.to_owned(),
            source_text: self.source_text(i)?.to_owned(),
        })
    }

    pub fn entries(&self) -> Result<Vec<IndexEntry>> {
        (0..self.len()).map(|i| self.entry(i)).collect()
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            count: self.len(),
            d: self.d(),
            bytes: self.as_bytes().len(),
            checksum: hex::encode(Sha256::digest(self.as_bytes())),
        }
    }
}

pub fn save_index(entries: &[IndexEntry], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_index(entries)?)?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<Vec<IndexEntry>> {
    Index::read(path)?.entries()
}

/// Writes a `CDXI` file entry by entry without holding the numeric section
/// in memory. Texts are buffered until [`IndexWriter::finish`].
pub struct IndexWriter {
    out: BufWriter<File>,
    d: usize,
    count: usize,
    written: usize,
    ids: HashSet<u64>,
    offsets: Vec<u64>,
    texts: Vec<u8>,
    buf: Vec<u8>,
}

impl IndexWriter {
    pub fn create(path: impl AsRef<Path>, d: usize, count: usize) -> Result<Self> {
        let mut out = BufWriter::with_capacity(1 << 20, File::create(path)?);
        let mut head = Vec::with_capacity(HEADER_LEN);
        head.extend_from_slice(MAGIC);
        put_u32(&mut head, INDEX_VERSION);
        put_u32(&mut head, d as u32);
        put_u64(&mut head, count as u64);
        out.write_all(&head)?;
        Ok(Self {
            out,
            d,
            count,
            written: 0,
            ids: HashSet::with_capacity(count),
            offsets: Vec::with_capacity(count),
            texts: Vec::new(),
            buf: Vec::with_capacity(record_len(d)),
        })
    }

    pub fn push(
        &mut self,
        id: u64,
        mu: &[f64],
        var: &[f64],
        log_py: f64,
        sketch: &str,
        source: &str,
    ) -> Result<()> {
        if self.written == self.count {
            return Err(Error::InvalidArgument(format!(
                "index writer declared {} entries",
                self.count
            )));
        }
        if mu.len() != self.d || var.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: if mu.len() != self.d {
                    mu.len()
                } else {
                    var.len()
                },
            });
        }
        if !self.ids.insert(id) {
            return Err(Error::InvalidArgument(format!("duplicate index id {id}")));
        }
        self.buf.clear();
        put_u64(&mut self.buf, id);
        for &x in mu.iter().chain(var) {
            put_f64(&mut self.buf, x);
        }
        put_f64(&mut self.buf, log_py);
        self.out.write_all(&self.buf)?;
        self.offsets.push(self.texts.len() as u64);
        put_str(&mut self.texts, sketch);
        put_str(&mut self.texts, source);
        self.written += 1;
        Ok(())
    }

    pub fn push_entry(&mut self, e: &IndexEntry) -> Result<()> {
        self.push(
            e.id,
            &e.mu_y,
            &e.var_y,
            e.log_py,
            &e.sketch_text,
            &e.source_text,
        )
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written != self.count {
            return Err(Error::InvalidArgument(format!(
                "index writer declared {} entries, {} written",
                self.count, self.written
            )));
        }
        for &o in &self.offsets {
            self.out.write_all(&o.to_le_bytes())?;
        }
        self.out.write_all(&self.texts)?;
        self.out.flush()?;
        Ok(())
    }
}

/// A round-robin slice of an index: rows `shard, shard + n, shard + 2n, …`.
#[derive(Debug, Clone)]
pub struct IndexShard {
    index: Index,
    shard: usize,
    n_shards: usize,
}

impl IndexShard {
    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn len(&self) -> usize {
        let n = self.index.len();
        if self.shard >= n {
            0
        } else {
            (n - self.shard).div_ceil(self.n_shards)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row numbers of this shard's entries in the underlying index.
    pub fn rows(&self) -> impl Iterator<Item = usize> {
        (self.shard..self.index.len()).step_by(self.n_shards)
    }
}

/// Splits `index` into `n_shards` round-robin shards sharing its storage.
pub fn shard(index: &Index, n_shards: usize) -> Result<Vec<IndexShard>> {
    if n_shards == 0 {
        return Err(Error::InvalidArgument(
            "shard count must be at least 1".into(),
        ));
    }
    Ok((0..n_shards)
        .map(|s| IndexShard {
            index: index.clone(),
            shard: s,
            n_shards,
        })
        .collect())
}

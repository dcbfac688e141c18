//! Binary checkpoint format.
//!
//! ```text
//! "NTKB"                          magic
//! u32   version (= 1)
//! u8    model kind (0 ntn, 1 bilinear, 2 similarity, 3 hadamard)
//! u32   d, k, |E|, |R|
//! |E| × (u32 byte length, UTF-8 bytes)   entity names in id order
//! |R| × (u32 byte length, UTF-8 bytes)   relation names in id order
//! f64 × n                         parameters: entity vectors, relation
//!                                 records, shared block (row-major)
//! u64   wrapping sum of the payload read as little-endian u64 words
//! ```
//!
//! All integers and floats are little-endian. Whether a tensor-network
//! checkpoint uses a shared `U` is recovered from the payload length.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kb::Vocabulary;
use crate::models::{Layout, ModelKind, ModelParams, ModelShape};

pub const MAGIC: &[u8; 4] = b"NTKB";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub entities: Vocabulary,
    pub relations: Vocabulary,
}

/// Wrapping sum of `payload` as little-endian `u64` words.
pub fn checksum(payload: &[u8]) -> u64 {
    payload
        .chunks(8)
        .map(|w| {
            let mut buf = [0u8; 8];
            buf[..w.len()].copy_from_slice(w);
            u64::from_le_bytes(buf)
        })
        .fold(0u64, u64::wrapping_add)
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Checkpoint(format!("value {v} does not fit in 32 bits")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Checkpoint(format!("truncated while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
    }

    fn names(&mut self, count: usize, what: &str) -> Result<Vocabulary> {
        let mut names = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let len = self.u32(what)?;
            let raw = self.take(len, what)?;
            let name = std::str::from_utf8(raw).map_err(|_| Error::Checkpoint(format!("{what} name is not UTF-8")))?;
            names.push(name.to_owned());
        }
        Vocabulary::from_names(names).map_err(|e| Error::Checkpoint(e.to_string()))
    }
}

impl Checkpoint {
    pub fn new(params: ModelParams, entities: Vocabulary, relations: Vocabulary) -> Result<Self> {
        let shape = params.shape();
        if entities.len() != shape.num_entities || relations.len() != shape.num_relations {
            return Err(Error::Checkpoint(format!(
                "vocabulary sizes ({}, {}) do not match model ({}, {})",
                entities.len(),
                relations.len(),
                shape.num_entities,
                shape.num_relations
            )));
        }
        Ok(Checkpoint {
            params,
            entities,
            relations,
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let shape = self.params.shape();
        let mut out = Vec::with_capacity(64 + self.params.as_slice().len() * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(shape.kind.code());
        for v in [shape.dim, shape.slices, shape.num_entities, shape.num_relations] {
            put_u32(&mut out, v)?;
        }
        for name in self.entities.names().iter().chain(self.relations.names()) {
            put_u32(&mut out, name.len())?;
            out.extend_from_slice(name.as_bytes());
        }
        let payload_start = out.len();
        for x in self.params.as_slice() {
            out.extend_from_slice(&x.to_le_bytes());
        }
        let sum = checksum(&out[payload_start..]);
        out.extend_from_slice(&sum.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(Error::Checkpoint("bad magic bytes".into()));
        }
        let version = r.u32("version")?;
        if version != VERSION as usize {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version} (expected {VERSION})"
            )));
        }
        let code = r.take(1, "model kind")?[0];
        let kind = ModelKind::from_code(code).ok_or_else(|| Error::Checkpoint(format!("unknown model kind {code}")))?;
        let dim = r.u32("dimension")?;
        let slices = r.u32("slices")?;
        let num_entities = r.u32("entity count")?;
        let num_relations = r.u32("relation count")?;
        let entities = r.names(num_entities, "entity")?;
        let relations = r.names(num_relations, "relation")?;

        let rest = bytes.len() - r.pos;
        if rest < 8 || !(rest - 8).is_multiple_of(8) {
            return Err(Error::Checkpoint(
                "payload is not a whole number of 64-bit values".into(),
            ));
        }
        let payload = &bytes[r.pos..bytes.len() - 8];
        let stored = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
        if checksum(payload) != stored {
            return Err(Error::Checkpoint("checksum mismatch".into()));
        }

        let base = ModelShape {
            kind,
            dim,
            slices,
            num_entities,
            num_relations,
            share_u: false,
        };
        let n = payload.len() / 8;
        let layout = [false, true]
            .into_iter()
            .map(|share_u| Layout::new(ModelShape { share_u, ..base }))
            .find(|l| l.total_len() == n && l.shape().slices == slices)
            .ok_or_else(|| {
                Error::Checkpoint(format!(
                    "payload has {n} values, which matches no layout for this header"
                ))
            })?;
        let theta = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let params = ModelParams::from_flat(layout, theta)?;
        Checkpoint::new(params, entities, relations)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

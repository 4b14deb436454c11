//! Versioned binary container for named parameter tensors.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes   "LYMCKPT\0"
//! version  u32       currently 1
//! meta     u32 length + UTF-8 bytes (free-form, usually JSON)
//! count    u32       number of tensors
//! tensor*  u32 name length + UTF-8 name
//!          u32 rank, then rank × u64 dimensions
//!          product(dims) × f64 values
//! ```
//!
//! Values are stored as raw IEEE-754 bits so a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use super::params::ParamSet;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"LYMCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: String,
    pub tensors: Vec<NamedTensor>,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn from_params<P: ParamSet>(params: &P, meta: impl Into<String>) -> Self {
        let tensors = params
            .tensors()
            .into_iter()
            .map(|t| NamedTensor {
                name: t.name,
                shape: t.shape,
                values: t.values.to_vec(),
            })
            .collect();
        Self {
            meta: meta.into(),
            tensors,
        }
    }

    /// Copies stored values into `params`; names and shapes must match exactly.
    pub fn restore_into<P: ParamSet>(&self, params: &mut P) -> Result<()> {
        let layout: Vec<(String, Vec<usize>)> = params
            .tensors()
            .into_iter()
            .map(|t| (t.name, t.shape))
            .collect();
        if layout.len() != self.tensors.len() {
            return Err(err(format!(
                "checkpoint holds {} tensors, model expects {}",
                self.tensors.len(),
                layout.len()
            )));
        }
        for ((name, shape), stored) in layout.iter().zip(&self.tensors) {
            if *name != stored.name || *shape != stored.shape {
                return Err(err(format!(
                    "tensor {} {:?} does not match expected {} {:?}",
                    stored.name, stored.shape, name, shape
                )));
            }
        }
        for (dst, stored) in params.tensors_mut().into_iter().zip(&self.tensors) {
            dst.copy_from_slice(&stored.values);
        }
        Ok(())
    }

    pub fn tensor(&self, name: &str) -> Option<&NamedTensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        put_str(&mut out, &self.meta);
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            put_str(&mut out, &t.name);
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for v in &t.values {
                out.extend_from_slice(&v.to_bits().to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(err("not a checkpoint file (bad magic)"));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(err(format!("unsupported checkpoint version {version}")));
        }
        let meta = r.string()?;
        let count = r.u32()? as usize;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let name = r.string()?;
            let rank = r.u32()? as usize;
            let mut shape = Vec::with_capacity(rank.min(8));
            for _ in 0..rank {
                shape.push(r.u64()? as usize);
            }
            let len = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| err(format!("tensor {name} is too large")))?;
            if len.checked_mul(8).is_none_or(|b| b > r.remaining()) {
                return Err(err(format!("tensor {name} is truncated")));
            }
            let mut values = Vec::with_capacity(len);
            for _ in 0..len {
                values.push(f64::from_bits(r.u64()?));
            }
            tensors.push(NamedTensor { name, shape, values });
        }
        if r.remaining() != 0 {
            return Err(err(format!("{} trailing bytes", r.remaining())));
        }
        Ok(Self { meta, tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(err(format!("unexpected end of data at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| err("invalid UTF-8 in checkpoint string"))
    }
}

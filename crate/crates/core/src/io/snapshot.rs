//! SAVF1 binary snapshots.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "SAVF1"            5 bytes
//! dim                u32
//! components         u32
//! modes[dim]         u64 each
//! extents[dim]       f64 each
//! time               f64
//! name length        u32, then UTF-8 bytes
//! payload            components × Π modes f64, row-major per component
//! ```

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{PeriodicGrid, ScalarField, VectorField};

pub const MAGIC: &[u8; 5] = b"SAVF1";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dim: usize,
    pub modes: Vec<usize>,
    pub extents: Vec<f64>,
    pub time: f64,
    pub field_name: String,
    pub components: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn scalar(name: &str, time: f64, f: &ScalarField) -> Self {
        Self::from_parts(name, time, f.grid(), vec![f.values().to_vec()])
    }

    pub fn vector(name: &str, time: f64, u: &VectorField) -> Self {
        Self::from_parts(name, time, u.grid(), u.components().iter().map(|c| c.values().to_vec()).collect())
    }

    fn from_parts(name: &str, time: f64, g: &PeriodicGrid, components: Vec<Vec<f64>>) -> Self {
        Snapshot {
            dim: g.dim(),
            modes: g.modes().to_vec(),
            extents: g.extents().to_vec(),
            time,
            field_name: name.to_string(),
            components,
        }
    }

    pub fn grid(&self) -> Result<Arc<PeriodicGrid>> {
        PeriodicGrid::new(self.dim, &self.extents, &self.modes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n: usize = self.modes.iter().product();
        let mut b = Vec::with_capacity(64 + 8 * n * self.components.len());
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&(self.dim as u32).to_le_bytes());
        b.extend_from_slice(&(self.components.len() as u32).to_le_bytes());
        for m in &self.modes {
            b.extend_from_slice(&(*m as u64).to_le_bytes());
        }
        for e in &self.extents {
            b.extend_from_slice(&e.to_le_bytes());
        }
        b.extend_from_slice(&self.time.to_le_bytes());
        b.extend_from_slice(&(self.field_name.len() as u32).to_le_bytes());
        b.extend_from_slice(self.field_name.as_bytes());
        for c in &self.components {
            for v in c {
                b.extend_from_slice(&v.to_le_bytes());
            }
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { b: bytes, pos: 0 };
        if r.take(5)? != MAGIC {
            return Err(bad("missing SAVF1 magic".into()));
        }
        let dim = r.u32()? as usize;
        if !(1..=3).contains(&dim) {
            return Err(bad(format!("dimension {dim}")));
        }
        let ncomp = r.u32()? as usize;
        let modes = (0..dim).map(|_| r.u64().map(|m| m as usize)).collect::<Result<Vec<_>>>()?;
        let extents = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let time = r.f64()?;
        let len = r.u32()? as usize;
        let field_name = String::from_utf8(r.take(len)?.to_vec()).map_err(|_| bad("field name is not UTF-8".into()))?;
        let n = modes.iter().try_fold(1usize, |a, m| a.checked_mul(*m)).ok_or_else(|| bad("mode overflow".into()))?;
        if bytes.len() - r.pos != n * ncomp * 8 {
            return Err(bad(format!("payload has {} bytes, expected {}", bytes.len() - r.pos, n * ncomp * 8)));
        }
        let components =
            (0..ncomp).map(|_| (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(Snapshot { dim, modes, extents, time, field_name, components })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn bad(message: String) -> Error {
    Error::Format { what: "SAVF1 snapshot", message }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.b.len()).ok_or_else(|| bad("truncated".into()))?;
        let s = &self.b[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

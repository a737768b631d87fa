//! Binary embedding files.
//!
//! Layout, all little-endian: magic `DGEM`, `u32` version (1), `u32` row
//! count N, `u32` dimension D, N·D `f32` values row-major, then N sample ids
//! each as a `u32` byte length followed by UTF-8 bytes.

use std::path::{Path, PathBuf};

use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::numerics::PointSet;

pub const DGEM_MAGIC: &[u8; 4] = b"DGEM";
pub const DGEM_VERSION: u32 = 1;

/// Serializes to the DGEM layout. Values are stored as `f32`; a value
/// that does not survive the narrowing as a finite number is rejected.
pub fn encode_embeddings(e: &EmbeddingMatrix) -> Result<Vec<u8>> {
    let n = u32::try_from(e.len()).map_err(|_| Error::Dimension("too many rows for DGEM".into()))?;
    let d = u32::try_from(e.dim()).map_err(|_| Error::Dimension("dimension too large for DGEM".into()))?;
    let mut out = Vec::with_capacity(16 + e.len() * e.dim() * 4);
    out.extend_from_slice(DGEM_MAGIC);
    out.extend_from_slice(&DGEM_VERSION.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&d.to_le_bytes());
    for (pos, &v) in e.points().coords().iter().enumerate() {
        let narrow = v as f32;
        if !narrow.is_finite() {
            return Err(Error::NonFinite {
                location: format!("row {} column {} (value {v} overflows f32)", pos / e.dim(), pos % e.dim()),
            });
        }
        out.extend_from_slice(&narrow.to_le_bytes());
    }
    for id in e.ids() {
        let len = u32::try_from(id.len()).map_err(|_| Error::Dimension("sample id too long".into()))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(id.as_bytes());
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Cursor<'_> {
    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, len: usize, what: &str) -> Result<&[u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let slice = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(self.err(
                self.pos,
                format!(
                    "truncated {what}: need {len} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            )),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn decode_embeddings(bytes: &[u8], path: &Path) -> Result<EmbeddingMatrix> {
    let mut c = Cursor { bytes, pos: 0, path };
    let mut magic = [0u8; 4];
    magic.copy_from_slice(c.take(4, "magic")?);
    if &magic != DGEM_MAGIC {
        return Err(c.err(0, format!("bad magic {magic:?}, expected \"DGEM\"")));
    }
    let version = c.u32("version")?;
    if version != DGEM_VERSION {
        return Err(c.err(4, format!("unsupported version {version}, expected {DGEM_VERSION}")));
    }
    let n = c.u32("row count")? as usize;
    let d = c.u32("dimension")? as usize;
    let payload = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| c.err(8, "header N*D overflows"))?;
    if payload > bytes.len() - c.pos {
        return Err(c.err(
            16,
            format!(
                "truncated payload: header declares {n}x{d} values ({payload} bytes) but only {} bytes follow the header",
                bytes.len() - c.pos
            ),
        ));
    }
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n * d {
        let offset = c.pos;
        let b = c.take(4, "value")?;
        let v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
        if !v.is_finite() {
            return Err(c.err(offset, format!("non-finite value at row {} column {}", i / d, i % d)));
        }
        coords.push(v as f64);
    }
    let mut ids = Vec::with_capacity(n);
    for i in 0..n {
        let len = c.u32("id length")? as usize;
        let offset = c.pos;
        let id = std::str::from_utf8(c.take(len, "id")?).map(str::to_owned);
        ids.push(id.map_err(|_| c.err(offset, format!("id {i} is not valid UTF-8")))?);
    }
    if c.pos != bytes.len() {
        return Err(c.err(c.pos, format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    let points = PointSet::new(n, d, coords).map_err(|e| c.err(12, e.to_string()))?;
    EmbeddingMatrix::new(points, ids)
}

pub fn write_embeddings(e: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_embeddings(e)?)?;
    Ok(())
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let bytes = std::fs::read(&path)?;
    decode_embeddings(&bytes, &path)
}

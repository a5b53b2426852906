//! Versioned binary container for named parameter arrays.
//!
//! Layout: the magic string `GPNCKPT`, a format version, an entry count,
//! then per entry a name, the shape, and little-endian IEEE-754 doubles.
//! Round-trips are bit-exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::Tensor;

pub const MAGIC: &[u8; 7] = b"GPNCKPT";
pub const FORMAT_VERSION: u32 = 1;

pub fn to_bytes(entries: &[(String, Tensor)]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for (name, t) in entries {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(t.cols() as u32).to_le_bytes());
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::CorruptCheckpoint(format!(
                "truncated at byte {} (needed {len} more)",
                self.pos
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Vec<(String, Tensor)>> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::CorruptCheckpoint("bad magic string".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let count = r.u32()? as usize;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| Error::CorruptCheckpoint("entry name is not UTF-8".into()))?;
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        if rows == 0 || cols == 0 {
            return Err(Error::CorruptCheckpoint(format!(
                "entry '{name}' has shape {rows}x{cols}"
            )));
        }
        let raw = r.take(rows * cols * 8)?;
        let data: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]))
            .collect();
        entries.push((name, Tensor::from_vec(rows, cols, data)?));
    }
    if r.pos != bytes.len() {
        return Err(Error::CorruptCheckpoint(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(entries)
}

pub fn write_file(path: impl AsRef<Path>, entries: &[(String, Tensor)]) -> Result<()> {
    fs::write(path, to_bytes(entries))?;
    Ok(())
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<(String, Tensor)>> {
    from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<(String, Tensor)> {
        vec![
            ("w".into(), Tensor::from_rows(&[vec![1.5, -0.25], vec![3.0, 0.1]]).unwrap()),
            ("gamma".into(), Tensor::scalar(0.5)),
        ]
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let entries = sample();
        let bytes = to_bytes(&entries);
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(back, entries);
        assert_eq!(to_bytes(&back), bytes);
    }

    #[test]
    fn truncated_bytes_are_corrupt() {
        let bytes = to_bytes(&sample());
        for cut in [3, MAGIC.len() + 2, bytes.len() - 1] {
            assert!(matches!(
                from_bytes(&bytes[..cut]),
                Err(Error::CorruptCheckpoint(_))
            ));
        }
    }

    #[test]
    fn wrong_magic_is_corrupt() {
        let mut bytes = to_bytes(&sample());
        bytes[0] = b'X';
        assert!(matches!(
            from_bytes(&bytes),
            Err(Error::CorruptCheckpoint(_))
        ));
    }

    #[test]
    fn future_version_is_rejected() {
        let mut bytes = to_bytes(&sample());
        bytes[MAGIC.len()] = 9;
        assert!(matches!(
            from_bytes(&bytes),
            Err(Error::VersionMismatch { found: 9, .. })
        ));
    }
}

//! Field snapshot files.
//!
//! Layout: magic bytes "BNLS1", a 4-byte little-endian header length, a JSON
//! header {d, n, L, N_x, N_y, alpha, beta, tag}, then the samples as
//! interleaved (re, im) little-endian 64-bit floats in row-major order with
//! the last axis fastest. Round trips are bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BnlsError, Result};
use crate::field::Field;
use crate::grid::{Grid, GridSpec};

const MAGIC: &[u8; 5] = b"BNLS1";

/// Equation metadata carried alongside the grid in every snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub alpha: f64,
    pub beta: f64,
    pub tag: String,
}

#[derive(Serialize, Deserialize)]
struct Header {
    d: usize,
    n: usize,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N_x")]
    n_x: usize,
    #[serde(rename = "N_y")]
    n_y: usize,
    alpha: f64,
    beta: f64,
    tag: String,
}

/// Write a field snapshot.
pub fn write_field(path: &Path, field: &Field, meta: &SnapshotMeta) -> Result<()> {
    let spec = field.grid().spec();
    let header = Header {
        d: spec.d,
        n: spec.n,
        l: spec.l,
        n_x: spec.n_x,
        n_y: spec.n_y,
        alpha: meta.alpha,
        beta: meta.beta,
        tag: meta.tag.clone(),
    };
    let header_bytes = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    for v in field.data() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a field snapshot back, rebuilding its grid from the header.
pub fn read_field(path: &Path) -> Result<(Field, SnapshotMeta)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(BnlsError::Format(format!(
            "bad magic bytes in {}",
            path.display()
        )));
    }
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    if header_len > 1 << 20 {
        return Err(BnlsError::Format("unreasonable header length".into()));
    }
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes)?;
    let header: Header = serde_json::from_slice(&header_bytes)?;
    let grid = Grid::from_spec(GridSpec {
        d: header.d,
        n: header.n,
        l: header.l,
        n_x: header.n_x,
        n_y: header.n_y,
    })?;

    let total = grid.total_points();
    let mut payload = Vec::with_capacity(total * 16);
    r.read_to_end(&mut payload)?;
    if payload.len() != total * 16 {
        return Err(BnlsError::Format(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            total * 16
        )));
    }
    let mut data = Vec::with_capacity(total);
    for chunk in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[..8].try_into().expect("8-byte chunk"));
        let im = f64::from_le_bytes(chunk[8..].try_into().expect("8-byte chunk"));
        data.push(Complex64::new(re, im));
    }
    let field = Field::from_data(&grid, data)?;
    Ok((
        field,
        SnapshotMeta {
            alpha: header.alpha,
            beta: header.beta,
            tag: header.tag,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn round_trip_bit_exact() {
        let g = Grid::new(1, 1, 16.0 * PI, 32, 8).unwrap();
        let u = Field::random_smooth(&g, 11);
        let meta = SnapshotMeta {
            alpha: 1.0,
            beta: -0.5,
            tag: "unit".into(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bnls");
        write_field(&path, &u, &meta).unwrap();
        let (v, meta2) = read_field(&path).unwrap();
        assert_eq!(u.data(), v.data());
        assert_eq!(meta, meta2);
        assert_eq!(u.grid().spec(), v.grid().spec());
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bnls");
        std::fs::write(&path, b"NOPE!xxxxxxxx").unwrap();
        assert!(read_field(&path).is_err());
    }
}

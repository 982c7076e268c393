//! Binary field snapshots.
//!
//! Layout (all integers little-endian `u32`, floats little-endian `f64`):
//!
//! ```text
//! "FRFL" | version | d | N | L | name_len | name (UTF-8) | N^d samples (row-major)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::{make_grid, Grid, ScalarField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FRFL";
pub const VERSION: u32 = 1;

/// Serializes a named field into the snapshot byte layout.
pub fn encode(field: &ScalarField, name: &str) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(28 + name.len() + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decoded snapshot: the field (on a freshly built grid) and its name.
#[derive(Debug)]
pub struct Snapshot {
    pub name: String,
    pub field: ScalarField,
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, len: usize) -> std::result::Result<&'a [u8], String> {
    let end = pos
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| format!("truncated at byte {}", *pos))?;
    let s = &bytes[*pos..end];
    *pos = end;
    Ok(s)
}

fn read_u32(bytes: &[u8], pos: &mut usize) -> std::result::Result<u32, String> {
    Ok(u32::from_le_bytes(take(bytes, pos, 4)?.try_into().unwrap()))
}

fn read_f64(bytes: &[u8], pos: &mut usize) -> std::result::Result<f64, String> {
    Ok(f64::from_le_bytes(take(bytes, pos, 8)?.try_into().unwrap()))
}

/// Parses snapshot bytes. When `grid` is given the header must match it.
pub fn decode(bytes: &[u8], grid: Option<&Arc<Grid>>) -> std::result::Result<Snapshot, String> {
    let mut pos = 0;
    if take(bytes, &mut pos, 4)? != MAGIC {
        return Err("bad magic".into());
    }
    let version = read_u32(bytes, &mut pos)?;
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let d = read_u32(bytes, &mut pos)? as usize;
    let n = read_u32(bytes, &mut pos)? as usize;
    let length = read_f64(bytes, &mut pos)?;
    let name_len = read_u32(bytes, &mut pos)? as usize;
    let name = std::str::from_utf8(take(bytes, &mut pos, name_len)?)
        .map_err(|e| format!("field name is not UTF-8: {e}"))?
        .to_string();
    let grid = match grid {
        Some(g) => {
            if g.dim() != d || g.n() != n || g.length() != length {
                return Err(format!(
                    "header (d={d}, N={n}, L={length}) does not match grid (d={}, N={}, L={})",
                    g.dim(),
                    g.n(),
                    g.length()
                ));
            }
            Arc::clone(g)
        }
        None => make_grid(d, n, length).map_err(|e| e.to_string())?,
    };
    let count = grid.len();
    let raw = take(bytes, &mut pos, 8 * count)?;
    if pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - pos));
    }
    let values: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err("non-finite sample".into());
    }
    Ok(Snapshot {
        name,
        field: ScalarField::from_values(&grid, values),
    })
}

pub fn write(path: &Path, field: &ScalarField, name: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(field, name))?;
    w.flush()?;
    Ok(())
}

pub fn read(path: &Path, grid: Option<&Arc<Grid>>) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes, grid).map_err(|msg| Error::Snapshot {
        path: path.to_path_buf(),
        msg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = make_grid(1, 8, 2.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0]);
        let bytes = encode(&f, "sigma");
        assert_eq!(&bytes[0..4], b"FRFL");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2.0);
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 5);
        assert_eq!(&bytes[28..33], b"sigma");
        assert_eq!(bytes.len(), 33 + 64);
        assert_eq!(f64::from_le_bytes(bytes[33 + 8..33 + 16].try_into().unwrap()), 0.25);
    }

    #[test]
    fn rejects_mismatched_grid_and_truncation() {
        let g = make_grid(1, 8, 2.0).unwrap();
        let other = make_grid(1, 16, 2.0).unwrap();
        let bytes = encode(&ScalarField::zeros(&g), "u0");
        assert!(decode(&bytes, Some(&other)).is_err());
        assert!(decode(&bytes[..bytes.len() - 1], None).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad, None).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(
            d in 1usize..=2,
            samples in proptest::collection::vec(-1e6f64..1e6, 256),
            name in "[a-z_]{0,12}",
        ) {
            let g = make_grid(d, if d == 1 { 256 } else { 16 }, 3.5).unwrap();
            let f = ScalarField::from_values(&g, samples);
            let back = decode(&encode(&f, &name), None).unwrap();
            prop_assert_eq!(back.name, name);
            prop_assert_eq!(back.field.values(), f.values());
        }
    }
}

//! Sampled-path output.
//!
//! CSV has one row per path with columns `y_1..y_k,final_tilt`. The binary
//! form is magic `TCND`, version `u16`, then `n` and `k` as `u64`, then for
//! every path `k + 1` values as `f64` (the coordinates and the final tilt);
//! all little-endian.

use std::io::{Read, Write};

use crate::conditional_law::GkPath;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const PATH_MAGIC: &[u8; 4] = b"TCND";
const PATH_VERSION: u16 = 1;

pub fn write_paths_csv<T: Scalar, W: Write>(mut w: W, k: usize, paths: &[GkPath<T>]) -> Result<()> {
    let header: Vec<String> = (1..=k).map(|j| format!("y_{j}")).chain(["final_tilt".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in paths {
        let row: Vec<String> = p
            .y
            .iter()
            .copied()
            .chain([p.final_tilt()])
            .map(|v| format!("{:.16e}", v.to_f64_lossy()))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_paths_binary<T: Scalar, W: Write>(mut w: W, n: usize, k: usize, paths: &[GkPath<T>]) -> Result<()> {
    w.write_all(PATH_MAGIC)?;
    w.write_all(&PATH_VERSION.to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(k as u64).to_le_bytes())?;
    for p in paths {
        for v in p.y.iter().copied().chain([p.final_tilt()]) {
            w.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
    }
    Ok(())
}

/// Paths read back from a `TCND` stream.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDump {
    pub n: usize,
    pub k: usize,
    /// One row of `k + 1` values per path.
    pub rows: Vec<Vec<f64>>,
}

pub fn read_paths_binary<R: Read>(mut r: R) -> Result<PathDump> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != PATH_MAGIC {
        return Err(Error::Io("not a TCND stream".into()));
    }
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    if u16::from_le_bytes(b2) != PATH_VERSION {
        return Err(Error::Io("unsupported TCND version".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let k = u64::from_le_bytes(b8) as usize;
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let width = (k + 1) * 8;
    if data.len() % width != 0 {
        return Err(Error::Io("truncated TCND record".into()));
    }
    let rows = data
        .chunks_exact(width)
        .map(|rec| {
            rec.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                .collect()
        })
        .collect();
    Ok(PathDump { n, k, rows })
}

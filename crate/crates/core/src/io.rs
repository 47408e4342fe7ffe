//! Binary containers shared by pairs and mode bases, and text formatting
//! helpers for tabular output.

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use std::io::{Read, Write};

const MAGIC: &[u8; 8] = b"SU11BLK\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainerKind {
    Pair = 1,
    Basis = 2,
}

pub fn write_header(w: &mut impl Write, kind: ContainerKind, lattice: &Lattice, blocks: u32) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(kind as u32).to_le_bytes())?;
    w.write_all(&(lattice.len() as u64).to_le_bytes())?;
    w.write_all(&lattice.dq().to_le_bytes())?;
    w.write_all(&lattice.q()[0].to_le_bytes())?;
    w.write_all(&blocks.to_le_bytes())?;
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Returns `(kind, n, dq, q0, blocks)`.
pub fn read_header(r: &mut impl Read) -> Result<(ContainerKind, usize, f64, f64, u32)> {
    if &read_array::<8>(r)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let kind = match u32::from_le_bytes(read_array(r)?) {
        1 => ContainerKind::Pair,
        2 => ContainerKind::Basis,
        k => return Err(Error::Format(format!("unknown container kind {k}"))),
    };
    let n = u64::from_le_bytes(read_array(r)?) as usize;
    let dq = f64::from_le_bytes(read_array(r)?);
    let q0 = f64::from_le_bytes(read_array(r)?);
    let blocks = u32::from_le_bytes(read_array(r)?);
    Ok((kind, n, dq, q0, blocks))
}

/// Row-major `(re, im)` little-endian doubles.
pub fn write_complex_block(w: &mut impl Write, m: MatRef<'_, C64>) -> Result<()> {
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_complex_block(r: &mut impl Read, rows: usize, cols: usize) -> Result<Mat<C64>> {
    let nr = u64::from_le_bytes(read_array(r)?) as usize;
    let nc = u64::from_le_bytes(read_array(r)?) as usize;
    if nr != rows || nc != cols {
        return Err(Error::Format(format!("block is {nr}x{nc}, expected {rows}x{cols}")));
    }
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re = f64::from_le_bytes(read_array(r)?);
            let im = f64::from_le_bytes(read_array(r)?);
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

/// Shortest round-trip text for a double (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

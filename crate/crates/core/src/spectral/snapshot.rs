//! Binary field snapshots.
//!
//! Layout (all integers and floats little endian):
//!
//! ```text
//! 8  bytes  magic "MHDSNAP" + version byte 0x01
//! 1  byte   d
//! 1  byte   real-data flag (conjugate symmetric coefficients)
//! 1  byte   divergence-free flag
//! 1  byte   reserved (0)
//! 4  bytes  n (u32)
//! 4  bytes  component count (u32)
//! 8  bytes  L (f64)
//! then, component by component, n^d (re, im) f64 pairs in storage order
//! ```
//!
//! Storage order is row-major with FFT ordering along each axis (see
//! [`Grid`]). Values are written as raw IEEE bits, so a round trip is exact.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Grid, SpectralField, VectorField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"MHDSNAP\x01";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: VectorField,
    pub real: bool,
}

impl Snapshot {
    pub fn new(field: VectorField) -> Self {
        let scale = field.l2_norm().max(f64::MIN_POSITIVE);
        let real = field
            .components()
            .iter()
            .all(|c| c.conjugate_symmetry_defect() <= 1e-12 * scale);
        Self { field, real }
    }
}

pub fn write_snapshot<W: Write>(mut w: W, snap: &Snapshot) -> Result<()> {
    let grid = snap.field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&[
        grid.dim() as u8,
        snap.real as u8,
        snap.field.is_divergence_free() as u8,
        0,
    ])?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&(snap.field.len() as u32).to_le_bytes())?;
    w.write_all(&grid.length().to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * grid.len());
    for c in snap.field.components() {
        buf.clear();
        for z in c.coeffs() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut flags = [0u8; 4];
    r.read_exact(&mut flags)?;
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let ncomp = u32::from_le_bytes(word) as usize;
    let mut dword = [0u8; 8];
    r.read_exact(&mut dword)?;
    let length = f64::from_le_bytes(dword);
    let grid = Grid::new(flags[0] as usize, n, length)?;
    if ncomp == 0 || ncomp > 3 {
        return Err(Error::Format(format!("component count {ncomp}")));
    }
    let mut comps = Vec::with_capacity(ncomp);
    let mut raw = vec![0u8; 16 * grid.len()];
    for _ in 0..ncomp {
        r.read_exact(&mut raw)?;
        let coeffs = raw
            .chunks_exact(16)
            .map(|b| {
                Complex64::new(
                    f64::from_le_bytes(b[..8].try_into().unwrap()),
                    f64::from_le_bytes(b[8..].try_into().unwrap()),
                )
            })
            .collect();
        comps.push(SpectralField::new(grid, coeffs)?);
    }
    let field = VectorField::new(comps).map_err(|e| Error::Format(e.to_string()))?;
    let field = if flags[2] != 0 {
        VectorField::from_parts(field.into_components(), true)
    } else {
        field
    };
    Ok(Snapshot {
        field,
        real: flags[1] != 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_vector_field, SpectrumShape};

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(3, 8, 1.25).unwrap();
        let u = random_vector_field(g, 11, SpectrumShape::smooth(), true);
        let snap = Snapshot::new(u);
        assert!(snap.real);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &snap).unwrap();
        assert_eq!(bytes.len(), 28 + 3 * 16 * g.len());
        let back = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(back, snap);
        for (a, b) in back.field.components().iter().zip(snap.field.components()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_snapshot(&b"NOTASNAPSHOT"[..]).is_err());
        let mut bytes = Vec::new();
        let g = Grid::new(2, 4, 1.0).unwrap();
        write_snapshot(&mut bytes, &Snapshot::new(VectorField::zeros(g))).unwrap();
        bytes.truncate(bytes.len() - 1);
        assert!(read_snapshot(bytes.as_slice()).is_err());
    }
}

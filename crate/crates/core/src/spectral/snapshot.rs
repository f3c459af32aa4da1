//! Binary `.fld` snapshots of physical-space samples.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic  b"BOUSSFLD"          8 bytes
//! version u32, ncomp u32      8 bytes
//! n u64, L f64               16 bytes
//! ncomp × n × n f64           row-major, component after component
//! ```

use ndarray::Array2;
use std::io::{Read, Write};
use std::path::Path;

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BOUSSFLD";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub components: Vec<Array2<f64>>,
}

impl Snapshot {
    /// Temperature followed by the two velocity components.
    pub fn from_state(theta: &ScalarField, u: &VectorField) -> Self {
        let [u1, u2] = u.to_physical();
        Self {
            grid: *theta.grid(),
            components: vec![theta.to_physical(), u1, u2],
        }
    }

    pub fn from_scalar(f: &ScalarField) -> Self {
        Self {
            grid: *f.grid(),
            components: vec![f.to_physical()],
        }
    }

    pub fn scalar(&self, i: usize) -> Result<ScalarField> {
        let a = self
            .components
            .get(i)
            .ok_or_else(|| Error::Format(format!("snapshot has no component {i}")))?;
        ScalarField::from_physical(a, self.grid)
    }

    /// Reads components 1 and 2 as a velocity field (certificate not restored).
    pub fn velocity(&self) -> Result<VectorField> {
        VectorField::new(self.scalar(1)?, self.scalar(2)?)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let n = self.grid.n();
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.components.len() as u32).to_le_bytes())?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&self.grid.box_length().to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * n * n);
        for c in &self.components {
            if c.dim() != (n, n) {
                return Err(Error::Shape {
                    expected: (n, n),
                    actual: c.dim(),
                });
            }
            buf.clear();
            for v in c.iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 32];
        r.read_exact(&mut head)
            .map_err(|_| Error::Format("truncated header".into()))?;
        if &head[..8] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(head[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let ncomp = u32::from_le_bytes(head[12..16].try_into().unwrap()) as usize;
        let n = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
        let box_length = f64::from_le_bytes(head[24..32].try_into().unwrap());
        let grid = Grid::new(n, box_length).map_err(|e| Error::Format(e.to_string()))?;
        if ncomp == 0 || ncomp > 16 {
            return Err(Error::Format(format!("implausible component count {ncomp}")));
        }
        let mut buf = vec![0u8; 8 * n * n];
        let mut components = Vec::with_capacity(ncomp);
        for _ in 0..ncomp {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Format("truncated data".into()))?;
            let vals: Vec<f64> = buf
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            components.push(Array2::from_shape_vec((n, n), vals).expect("n×n"));
        }
        Ok(Self { grid, components })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_exact_round_trip() {
        let g = Grid::new(8, 1.5).unwrap();
        let a = Array2::from_shape_fn((8, 8), |(i, j)| (i as f64).sin() * 1e-300 + j as f64 / 3.0);
        let s = Snapshot {
            grid: g,
            components: vec![a.clone(), a.mapv(|v| -v)],
        };
        let mut bytes = Vec::new();
        s.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 32 + 2 * 64 * 8);
        let back = Snapshot::read_from(&bytes[..]).unwrap();
        assert_eq!(back.grid, g);
        for (x, y) in back.components.iter().zip(s.components.iter()) {
            assert!(x.iter().zip(y.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(Snapshot::read_from(&b"NOTAFILE"[..]).is_err());
        let mut bytes = Vec::new();
        let g = Grid::new(8, 1.0).unwrap();
        Snapshot::from_scalar(&ScalarField::zeros(g))
            .write_to(&mut bytes)
            .unwrap();
        bytes.truncate(100);
        assert!(matches!(Snapshot::read_from(&bytes[..]), Err(Error::Format(_))));
    }
}

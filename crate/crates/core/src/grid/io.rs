//! FKSS snapshot files.
//!
//! Layout (little-endian): magic `FKSS`, `u16` version (1), `u16` d, `u32` N,
//! `f64` L, `u8` kind (0 scalar, 1 vector), then the `f64` samples row-major,
//! vector components concatenated.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GridError, ScalarField, TorusGrid, VectorField};

const MAGIC: &[u8; 4] = b"FKSS";
const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Snapshot {
    pub fn grid(&self) -> &TorusGrid {
        match self {
            Snapshot::Scalar(f) => f.grid(),
            Snapshot::Vector(v) => v.grid(),
        }
    }
}

pub fn write_snapshot<W: Write>(mut w: W, snap: &Snapshot) -> Result<(), GridError> {
    let g = snap.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.d() as u16).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    let fields: Vec<&ScalarField> = match snap {
        Snapshot::Scalar(f) => {
            w.write_all(&[0u8])?;
            vec![f]
        }
        Snapshot::Vector(v) => {
            w.write_all(&[1u8])?;
            v.components().iter().collect()
        }
    };
    for f in fields {
        for v in f.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K], GridError> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot, GridError> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(GridError::Format("bad magic bytes".into()));
    }
    let version = u16::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(GridError::Format(format!("unsupported version {version}")));
    }
    let d = u16::from_le_bytes(read_array(&mut r)?) as usize;
    let n = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let l = f64::from_le_bytes(read_array(&mut r)?);
    let kind = read_array::<1, _>(&mut r)?[0];
    let grid = TorusGrid::new(d, n, l)?;
    let ncomp = match kind {
        0 => 1,
        1 => d,
        k => return Err(GridError::Format(format!("unknown field kind {k}"))),
    };
    let mut comps = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            values.push(f64::from_le_bytes(read_array(&mut r)?));
        }
        comps.push(ScalarField::new(grid, values)?);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(GridError::Format(format!("{} trailing bytes", rest.len())));
    }
    if kind == 0 {
        Ok(Snapshot::Scalar(comps.pop().unwrap_or_else(|| ScalarField::zeros(grid))))
    } else {
        Ok(Snapshot::Vector(VectorField::new(comps)?))
    }
}

pub fn save_snapshot(path: impl AsRef<Path>, snap: &Snapshot) -> Result<(), GridError> {
    write_snapshot(BufWriter::new(File::create(path)?), snap)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot, GridError> {
    read_snapshot(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::random_bandlimited;

    #[test]
    fn round_trip_bytes() {
        let g = TorusGrid::new(2, 8, 1.5).unwrap();
        let f = random_bandlimited(g, 1, 3, 2.0).unwrap();
        let v = VectorField::new(vec![f.clone(), f.scaled(-1.0)]).unwrap();
        for snap in [Snapshot::Scalar(f), Snapshot::Vector(v)] {
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &snap).unwrap();
            assert_eq!(&buf[..4], b"FKSS");
            assert_eq!(buf[4..6], 1u16.to_le_bytes());
            let expected = 4 + 2 + 2 + 4 + 8 + 1 + 8 * 64 * if matches!(snap, Snapshot::Scalar(_)) { 1 } else { 2 };
            assert_eq!(buf.len(), expected);
            assert_eq!(read_snapshot(&buf[..]).unwrap(), snap);
        }
    }

    #[test]
    fn rejects_corruption() {
        let g = TorusGrid::new(1, 8, 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &Snapshot::Scalar(ScalarField::zeros(g))).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_snapshot(&bad[..]), Err(GridError::Format(_))));
        assert!(read_snapshot(&buf[..buf.len() - 3]).is_err());
        buf.push(0);
        assert!(matches!(read_snapshot(&buf[..]), Err(GridError::Format(_))));
    }
}

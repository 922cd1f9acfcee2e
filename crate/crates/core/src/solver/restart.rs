//! Restart files: initial data plus the full history, stored bit-exactly.
//!
//! Layout (little-endian): magic `FKSR`, `u16` version (1), `u16` d, `u32` N,
//! `f64` L, `f64` α, β, γ, dt, dealias, `u64` number of history entries, the
//! initial `n`, `v` and `u` components as `f64` samples, then per entry its
//! time followed by the coefficients of `F̂n`, `F̂v`, `F̂u` as `(re, im)` pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::grid::{FracParams, ScalarField, SpectralField, TorusGrid, VectorField};

use super::{History, HistoryEntry, NonlinearTerms, Solver, SolverError, SystemState};

const MAGIC: &[u8; 4] = b"FKSR";
const VERSION: u16 = 1;

/// Everything needed to continue a run bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartData {
    pub grid: TorusGrid,
    pub params: FracParams,
    pub dt: f64,
    pub dealias: f64,
    pub initial: SystemState,
    pub history: History,
}

fn put_f64<W: Write>(w: &mut W, x: f64) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_field<W: Write>(w: &mut W, f: &ScalarField) -> std::io::Result<()> {
    f.values().iter().try_for_each(|&x| put_f64(w, x))
}

fn put_spec<W: Write>(w: &mut W, s: &SpectralField) -> std::io::Result<()> {
    for c in s.coeffs() {
        put_f64(w, c.re)?;
        put_f64(w, c.im)?;
    }
    Ok(())
}

pub fn write_restart<W: Write>(mut w: W, solver: &Solver) -> Result<(), SolverError> {
    let cfg = solver.config();
    let g = cfg.grid;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.d() as u16).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    for x in [g.length(), cfg.params.alpha, cfg.params.beta, cfg.params.gamma, cfg.dt, cfg.dealias] {
        put_f64(&mut w, x)?;
    }
    w.write_all(&(solver.history().len() as u64).to_le_bytes())?;
    let init = solver.initial();
    put_field(&mut w, &init.n)?;
    put_field(&mut w, &init.v)?;
    for c in init.u.components() {
        put_field(&mut w, c)?;
    }
    for e in solver.history().entries() {
        put_f64(&mut w, e.t)?;
        put_spec(&mut w, &e.terms.fn_hat)?;
        put_spec(&mut w, &e.terms.fv_hat)?;
        for c in &e.terms.fu_hat {
            put_spec(&mut w, c)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn take<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K], SolverError> {
    let mut b = [0u8; K];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => SolverError::Format("truncated restart file".into()),
        _ => SolverError::Io(e),
    })?;
    Ok(b)
}

fn take_f64<R: Read>(r: &mut R) -> Result<f64, SolverError> {
    Ok(f64::from_le_bytes(take::<8, R>(r)?))
}

fn take_field<R: Read>(r: &mut R, g: TorusGrid) -> Result<ScalarField, SolverError> {
    let vals = (0..g.len()).map(|_| take_f64(r)).collect::<Result<Vec<_>, _>>()?;
    Ok(ScalarField::new(g, vals)?)
}

fn take_spec<R: Read>(r: &mut R, g: TorusGrid) -> Result<SpectralField, SolverError> {
    let coeffs = (0..g.len())
        .map(|_| Ok(Complex64::new(take_f64(r)?, take_f64(r)?)))
        .collect::<Result<Vec<_>, SolverError>>()?;
    Ok(SpectralField::new(g, coeffs)?)
}

pub fn read_restart<R: Read>(mut r: R) -> Result<RestartData, SolverError> {
    if &take::<4, R>(&mut r)? != MAGIC {
        return Err(SolverError::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes(take::<2, R>(&mut r)?);
    if version != VERSION {
        return Err(SolverError::Format(format!("unsupported version {version}")));
    }
    let d = u16::from_le_bytes(take::<2, R>(&mut r)?) as usize;
    let n = u32::from_le_bytes(take::<4, R>(&mut r)?) as usize;
    let length = take_f64(&mut r)?;
    let grid = TorusGrid::new(d, n, length)?;
    let params = FracParams::new(take_f64(&mut r)?, take_f64(&mut r)?, take_f64(&mut r)?)?;
    let dt = take_f64(&mut r)?;
    let dealias = take_f64(&mut r)?;
    let count = u64::from_le_bytes(take::<8, R>(&mut r)?) as usize;
    let n0 = take_field(&mut r, grid)?;
    let v0 = take_field(&mut r, grid)?;
    let u0 = VectorField::new((0..d).map(|_| take_field(&mut r, grid)).collect::<Result<_, _>>()?)?;
    let initial = SystemState::new(n0, v0, u0)?;
    let mut history = History::new();
    for _ in 0..count {
        let t = take_f64(&mut r)?;
        let fn_hat = take_spec(&mut r, grid)?;
        let fv_hat = take_spec(&mut r, grid)?;
        let fu_hat = (0..d).map(|_| take_spec(&mut r, grid)).collect::<Result<_, _>>()?;
        history.push(HistoryEntry {
            t,
            terms: NonlinearTerms { fn_hat, fv_hat, fu_hat },
        });
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(SolverError::Format("trailing bytes after history".into()));
    }
    Ok(RestartData {
        grid,
        params,
        dt,
        dealias,
        initial,
        history,
    })
}

pub fn save_restart(path: impl AsRef<Path>, solver: &Solver) -> Result<(), SolverError> {
    write_restart(BufWriter::new(File::create(path)?), solver)
}

pub fn load_restart(path: impl AsRef<Path>) -> Result<RestartData, SolverError> {
    read_restart(BufReader::new(File::open(path)?))
}

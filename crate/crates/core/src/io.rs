//! On-disk formats.
//!
//! All binary files are little-endian. Integers in headers are `u32` except
//! the particle count, which is `u64`; times and `eps` are `f64`.
//!
//! * field snapshot: magic `FHNSNAP\0`, version, d, n_x, time, then `n_x^d`
//!   values in row-major node order;
//! * ensemble checkpoint: magic `FHNCKPT\0`, version, M, d, n_x, time, then
//!   for each particle the `V_p` payload followed by the `W_p` payload;
//! * kernel-mode cache: magic `FHNMODE\0`, version, d, n_x, torus `eps`, then
//!   `Psi_hat_eps(k)` for every mode in FFT order.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::experiments::ExperimentReport;
use crate::kernel::{compute_modes, ConnectivityKernel, KernelModes};
use crate::particles::{Density, ParticleEnsemble};
use crate::spectral::{Field, Grid};

pub const FORMAT_VERSION: u32 = 1;
const SNAPSHOT_MAGIC: &[u8; 8] = b"FHNSNAP\0";
const CHECKPOINT_MAGIC: &[u8; 8] = b"FHNCKPT\0";
const MODES_MAGIC: &[u8; 8] = b"FHNMODE\0";

fn put_u32(out: &mut impl Write, v: u32) -> Result<()> {
    Ok(out.write_all(&v.to_le_bytes())?)
}

fn put_u64(out: &mut impl Write, v: u64) -> Result<()> {
    Ok(out.write_all(&v.to_le_bytes())?)
}

fn put_f64(out: &mut impl Write, v: f64) -> Result<()> {
    Ok(out.write_all(&v.to_le_bytes())?)
}

fn put_values(out: &mut impl Write, values: &[f64]) -> Result<()> {
    for v in values {
        put_f64(out, *v)?;
    }
    Ok(())
}

fn get_u32(inp: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    inp.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(inp: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    inp.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(inp: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    inp.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_values(inp: &mut impl Read, len: usize) -> Result<Vec<f64>> {
    (0..len).map(|_| get_f64(inp)).collect()
}

fn expect_magic(inp: &mut impl Read, magic: &[u8; 8], what: &str) -> Result<()> {
    let mut b = [0u8; 8];
    inp.read_exact(&mut b)?;
    if &b != magic {
        return Err(Error::Format(format!("not a {what} file (bad magic)")));
    }
    let version = get_u32(inp)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported {what} version {version}")));
    }
    Ok(())
}

fn expect_end(inp: &mut impl Read, what: &str) -> Result<()> {
    let mut extra = [0u8; 1];
    if inp.read(&mut extra)? != 0 {
        return Err(Error::Format(format!("trailing bytes after {what} payload")));
    }
    Ok(())
}

fn grid_len(d: u32, n: u32) -> Result<usize> {
    if !(1..=3).contains(&d) || n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Format(format!("invalid grid header d={d}, n_x={n}")));
    }
    (n as usize)
        .checked_pow(d)
        .ok_or_else(|| Error::Format("grid header too large".into()))
}

/// Writes through a temporary file and renames, so readers never see a
/// partial file.
fn write_atomically<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let tmp = path.with_extension("partial");
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        body(&mut out)?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Snapshot as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dim: usize,
    pub n_x: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

pub fn write_snapshot(path: &Path, field: &Field, time: f64) -> Result<()> {
    let grid = field.grid();
    write_atomically(path, |out| {
        out.write_all(SNAPSHOT_MAGIC)?;
        put_u32(out, FORMAT_VERSION)?;
        put_u32(out, grid.dim() as u32)?;
        put_u32(out, grid.n() as u32)?;
        put_f64(out, time)?;
        put_values(out, field.values())
    })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut inp = BufReader::new(File::open(path)?);
    expect_magic(&mut inp, SNAPSHOT_MAGIC, "snapshot")?;
    let d = get_u32(&mut inp)?;
    let n = get_u32(&mut inp)?;
    let time = get_f64(&mut inp)?;
    let values = get_values(&mut inp, grid_len(d, n)?)?;
    expect_end(&mut inp, "snapshot")?;
    Ok(Snapshot {
        dim: d as usize,
        n_x: n as usize,
        time,
        values,
    })
}

/// Time-stamped snapshot file name, e.g. `v-t000300.000.bin`.
pub fn snapshot_file_name(prefix: &str, time: f64) -> String {
    format!("{prefix}-t{time:010.3}.bin")
}

pub fn write_checkpoint(path: &Path, ensemble: &ParticleEnsemble, time: f64) -> Result<()> {
    let grid = ensemble.grid();
    write_atomically(path, |out| {
        out.write_all(CHECKPOINT_MAGIC)?;
        put_u32(out, FORMAT_VERSION)?;
        put_u64(out, ensemble.m() as u64)?;
        put_u32(out, grid.dim() as u32)?;
        put_u32(out, grid.n() as u32)?;
        put_f64(out, time)?;
        for (v, w) in ensemble.v().iter().zip(ensemble.w()) {
            put_values(out, v.values())?;
            put_values(out, w.values())?;
        }
        Ok(())
    })
}

/// Reads a checkpoint onto `density`'s grid; returns the ensemble and time.
pub fn read_checkpoint(path: &Path, density: Density) -> Result<(ParticleEnsemble, f64)> {
    let mut inp = BufReader::new(File::open(path)?);
    expect_magic(&mut inp, CHECKPOINT_MAGIC, "checkpoint")?;
    let m = get_u64(&mut inp)? as usize;
    let d = get_u32(&mut inp)?;
    let n = get_u32(&mut inp)?;
    let time = get_f64(&mut inp)?;
    let len = grid_len(d, n)?;
    let grid = density.grid().clone();
    if grid.dim() != d as usize || grid.n() != n as usize {
        return Err(Error::GridMismatch(format!(
            "checkpoint is for d={d}, n_x={n}, density grid is {grid:?}"
        )));
    }
    if m == 0 {
        return Err(Error::Format("checkpoint holds no particles".into()));
    }
    let mut v = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for _ in 0..m {
        v.push(Field::new(grid.clone(), get_values(&mut inp, len)?)?);
        w.push(Field::new(grid.clone(), get_values(&mut inp, len)?)?);
    }
    expect_end(&mut inp, "checkpoint")?;
    Ok((ParticleEnsemble::new(density, v, w)?, time))
}

/// Cache file for the modes of `kernel` on `grid` at physical `eps`.
pub fn modes_cache_path(dir: &Path, kernel: &ConnectivityKernel, grid: &Grid, eps: f64) -> PathBuf {
    let eps_torus = eps * grid.scale();
    dir.join(format!(
        "modes-{}-d{}-n{}-eps{:016x}.bin",
        kernel.cache_key(),
        grid.dim(),
        grid.n(),
        eps_torus.to_bits()
    ))
}

pub fn write_modes(path: &Path, modes: &KernelModes) -> Result<()> {
    write_atomically(path, |out| {
        out.write_all(MODES_MAGIC)?;
        put_u32(out, FORMAT_VERSION)?;
        put_u32(out, modes.dim() as u32)?;
        put_u32(out, modes.n() as u32)?;
        put_f64(out, modes.eps_torus())?;
        put_values(out, &modes.values())
    })
}

/// Reads cached modes for `grid` and physical `eps`; the header must match.
pub fn read_modes(path: &Path, grid: &Grid, eps: f64) -> Result<KernelModes> {
    let mut inp = BufReader::new(File::open(path)?);
    expect_magic(&mut inp, MODES_MAGIC, "kernel-mode")?;
    let d = get_u32(&mut inp)?;
    let n = get_u32(&mut inp)?;
    let eps_torus = get_f64(&mut inp)?;
    let len = grid_len(d, n)?;
    if grid.dim() != d as usize || grid.n() != n as usize || eps_torus.to_bits() != (eps * grid.scale()).to_bits() {
        return Err(Error::GridMismatch(format!(
            "cached modes are for d={d}, n_x={n}, eps_torus={eps_torus}"
        )));
    }
    let norm = (2.0 * std::f64::consts::PI).powi(d as i32);
    let multipliers = get_values(&mut inp, len)?.into_iter().map(|v| v * norm).collect();
    expect_end(&mut inp, "kernel-mode")?;
    KernelModes::from_multipliers(grid, eps, multipliers)
}

/// Loads modes from `cache_dir` when present, computing and storing them
/// otherwise. Without a cache directory the modes are always computed.
pub fn load_or_compute_modes(
    kernel: &ConnectivityKernel,
    grid: &Grid,
    eps: f64,
    cache_dir: Option<&Path>,
) -> Result<Arc<KernelModes>> {
    let Some(dir) = cache_dir else {
        return Ok(Arc::new(compute_modes(kernel, grid, eps)?));
    };
    let path = modes_cache_path(dir, kernel, grid, eps);
    if path.exists() {
        if let Ok(modes) = read_modes(&path, grid, eps) {
            return Ok(Arc::new(modes));
        }
    }
    let modes = compute_modes(kernel, grid, eps)?;
    fs::create_dir_all(dir)?;
    write_modes(&path, &modes)?;
    // hand out the stored values so first and later runs agree bit for bit
    Ok(Arc::new(read_modes(&path, grid, eps)?))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

/// `parameter,error,order[,wave_speed]`; the first order cell is empty.
pub fn write_report_csv(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let with_speed = report.rows.iter().any(|r| r.wave_speed.is_some());
    let mut header = vec!["parameter", "error", "order"];
    if with_speed {
        header.push("wave_speed");
    }
    w.write_record(&header).map_err(csv_error)?;
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.rows {
        let mut rec = vec![r.parameter.to_string(), r.error.to_string(), cell(r.order)];
        if with_speed {
            rec.push(cell(r.wave_speed));
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `(parameter, error, order)` rows back from a report CSV.
pub fn read_report_csv(path: &Path) -> Result<Vec<(f64, f64, Option<f64>)>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let parse = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Format(format!("bad number {s:?}"))) };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let order = match rec.get(2) {
            Some("") | None => None,
            Some(s) => Some(parse(s)?),
        };
        rows.push((parse(&rec[0])?, parse(&rec[1])?, order));
    }
    Ok(rows)
}

/// Two-column CSV with a header, e.g. `t,value` probe series.
pub fn write_series_csv(path: &Path, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `x,value` CSV of a 1D field.
pub fn write_field_csv(path: &Path, field: &Field) -> Result<()> {
    let grid = field.grid();
    if grid.dim() != 1 {
        return Err(Error::GridMismatch("CSV field output is 1D only".into()));
    }
    let rows: Vec<(f64, f64)> = field
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (grid.axis_coordinate(i), *v))
        .collect();
    write_series_csv(path, ["x", "value"], &rows)
}

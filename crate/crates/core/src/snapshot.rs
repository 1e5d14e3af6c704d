//! RNLS binary snapshots.
//!
//! Layout, all little-endian: magic `RNLS`, version `u32 = 1`, `N: u32`,
//! label offset `i32` (component `i` has label `i + offset`), `M: u32`,
//! `L: f64`, `time: f64`, then `N·M·M` samples as `(re: f64, im: f64)`,
//! component-major then row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::VecField;
use crate::grid::Grid2D;
use crate::real::Real;

pub const MAGIC: &[u8; 4] = b"RNLS";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T: Real> {
    pub time: T,
    pub field: VecField<T>,
}

fn label_offset(labels: &[i64]) -> Result<i32> {
    let first = labels[0];
    if labels.iter().enumerate().any(|(i, &l)| l != first + i as i64) {
        return Err(Error::Snapshot(format!("labels {labels:?} are not consecutive ascending integers")));
    }
    i32::try_from(first).map_err(|_| Error::Snapshot(format!("label offset {first} overflows i32")))
}

pub fn write_snapshot<T: Real, W: Write>(out: &mut W, time: T, field: &VecField<T>) -> Result<()> {
    let offset = label_offset(field.labels())?;
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(field.n_components() as u32).to_le_bytes())?;
    out.write_all(&offset.to_le_bytes())?;
    out.write_all(&(grid.points() as u32).to_le_bytes())?;
    out.write_all(&grid.length().to_f64_lossy().to_le_bytes())?;
    out.write_all(&time.to_f64_lossy().to_le_bytes())?;
    for z in field.data() {
        out.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
        out.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const K: usize, R: Read>(input: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    input
        .read_exact(&mut buf)
        .map_err(|e| Error::Snapshot(format!("truncated input: {e}")))?;
    Ok(buf)
}

pub fn read_snapshot<T: Real, R: Read>(input: &mut R) -> Result<Snapshot<T>> {
    let magic = read_array::<4, _>(input)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!("bad magic {magic:?}")));
    }
    let version = u32::from_le_bytes(read_array(input)?);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(read_array(input)?) as usize;
    let offset = i32::from_le_bytes(read_array(input)?) as i64;
    let m = u32::from_le_bytes(read_array(input)?) as usize;
    let length = f64::from_le_bytes(read_array(input)?);
    let time = f64::from_le_bytes(read_array(input)?);
    if n == 0 {
        return Err(Error::Snapshot("zero components".into()));
    }
    let grid = Grid2D::new(T::lit(length), m)?;
    let labels: Vec<i64> = (0..n as i64).map(|i| i + offset).collect();
    let mut field = VecField::zeros(&grid, labels)?;
    for z in field.data_mut() {
        let re = f64::from_le_bytes(read_array(input)?);
        let im = f64::from_le_bytes(read_array(input)?);
        *z = Complex::new(T::lit(re), T::lit(im));
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Snapshot("trailing bytes after sample block".into()));
    }
    Ok(Snapshot { time: T::lit(time), field })
}

pub fn save_snapshot<T: Real>(path: impl AsRef<Path>, time: T, field: &VecField<T>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_snapshot(&mut out, time, field)?;
    out.flush()?;
    Ok(())
}

pub fn load_snapshot<T: Real>(path: impl AsRef<Path>) -> Result<Snapshot<T>> {
    read_snapshot(&mut BufReader::new(File::open(path)?))
}

//! Bit-exact binary snapshots of a [`SimState`].
//!
//! Layout, all little-endian:
//!
//! ```text
//! "BQSF" | version: u32 | n: u32 | alpha: f64 | t: f64
//! | ω̂: n² × (re: f64, im: f64) | θ̂: n² × (re: f64, im: f64)
//! ```
//!
//! Coefficients are stored row-major in storage order: flat index
//! `i1·n + i2`, where index `i` holds wavenumber `i` for `i < n/2` and
//! `i - n` otherwise.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::SimState;
use crate::spectral::{Grid, SpectralField};

pub const MAGIC: [u8; 4] = *b"BQSF";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic {0:?})")]
    BadMagic([u8; 4]),
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checkpoint has trailing bytes after the temperature block")]
    TrailingData,
    #[error("invalid checkpoint contents: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for CheckpointError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            CheckpointError::Truncated
        } else {
            CheckpointError::Io(e)
        }
    }
}

pub fn write_state(state: &SimState, mut out: impl Write) -> io::Result<()> {
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(state.grid().n() as u32).to_le_bytes())?;
    out.write_all(&state.alpha.to_le_bytes())?;
    out.write_all(&state.t.to_le_bytes())?;
    for field in [&state.omega_hat, &state.theta_hat] {
        for c in field.coeffs() {
            out.write_all(&c.re.to_le_bytes())?;
            out.write_all(&c.im.to_le_bytes())?;
        }
    }
    out.flush()
}

fn read_array<const N: usize>(input: &mut impl Read) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_f64(input: &mut impl Read) -> io::Result<f64> {
    Ok(f64::from_le_bytes(read_array(input)?))
}

pub fn read_state(mut input: impl Read) -> Result<SimState, CheckpointError> {
    let magic = read_array::<4>(&mut input)?;
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let n = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let alpha = read_f64(&mut input)?;
    let t = read_f64(&mut input)?;
    let grid = Grid::new(n).map_err(|e| CheckpointError::Invalid(e.to_string()))?;
    let mut fields = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut coeffs = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = read_f64(&mut input)?;
            let im = read_f64(&mut input)?;
            coeffs.push(Complex64::new(re, im));
        }
        fields.push(SpectralField::from_coeffs(&grid, coeffs).expect("length matches grid"));
    }
    let mut extra = [0u8; 1];
    if input.read(&mut extra)? != 0 {
        return Err(CheckpointError::TrailingData);
    }
    if !(alpha > 0.0 && alpha <= 2.0) || !t.is_finite() {
        return Err(CheckpointError::Invalid(format!("alpha = {alpha}, t = {t}")));
    }
    let theta_hat = fields.pop().expect("two fields");
    let omega_hat = fields.pop().expect("two fields");
    Ok(SimState {
        t,
        omega_hat,
        theta_hat,
        alpha,
    })
}

pub fn write_checkpoint(state: &SimState, path: impl AsRef<Path>) -> io::Result<()> {
    write_state(state, BufWriter::new(File::create(path)?))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<SimState, CheckpointError> {
    let file = File::open(path).map_err(CheckpointError::Io)?;
    read_state(BufReader::new(file))
}

//! Binary field snapshots (`.nsaf`).
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `NSAF` |
//! | 4     | format version (`u32`, currently 1) |
//! | 4     | spatial dimension `d` (`u32`) |
//! | 4     | grid points per axis `n` (`u32`) |
//! | 4     | number of fields (`u32`) |
//! | ...   | per field, per component, per mode in FFT order: `re`, `im` as `f64` |
//!
//! FFT order means axis 0 varies slowest and index `i` on an axis carries
//! wavenumber `i` for `i <= n/2`, `i - n` otherwise. Every one of the `n^d`
//! modes is written, including the zero entries outside the dealiasing band,
//! so a read followed by a write reproduces the file byte for byte.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{ModeSet, SolenoidalField, VectorSpectrum};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NSAF";
pub const VERSION: u32 = 1;

/// Fields decoded from a snapshot, sharing one mode set.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub modes: Arc<ModeSet>,
    pub fields: Vec<SolenoidalField>,
}

pub fn write_snapshot<W: Write>(mut w: W, fields: &[SolenoidalField]) -> Result<()> {
    let first = fields
        .first()
        .ok_or_else(|| Error::Argument("snapshot needs at least one field".into()))?;
    let modes = first.modes();
    if fields.iter().any(|f| !f.modes().same_as(modes)) {
        return Err(Error::Dimension("snapshot fields use different mode sets".into()));
    }
    w.write_all(MAGIC)?;
    for v in [VERSION, modes.dim() as u32, modes.n() as u32, fields.len() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * modes.dim() * modes.len());
    for f in fields {
        buf.clear();
        for z in f.coefficients() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = || -> Result<u32> {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    };
    let version = word()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = word()? as usize;
    let n = word()? as usize;
    let count = word()? as usize;
    let modes = ModeSet::new(dim, n).map_err(|e| Error::Format(e.to_string()))?;
    let per_field = dim * modes.len();
    let mut bytes = vec![0u8; 16 * per_field];
    let mut fields = Vec::with_capacity(count);
    for i in 0..count {
        r.read_exact(&mut bytes)?;
        let coeff: Vec<Complex64> = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        let field = SolenoidalField::from_spectrum_unchecked(VectorSpectrum::from_coefficients(&modes, coeff)?);
        validate(&field).map_err(|m| Error::Format(format!("field {i}: {m}")))?;
        fields.push(field);
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(Error::Format("trailing bytes after last field".into()));
    }
    Ok(Snapshot { modes, fields })
}

fn validate(f: &SolenoidalField) -> std::result::Result<(), String> {
    if !f.is_finite() {
        return Err("non-finite coefficient".into());
    }
    let modes = f.modes();
    let scale = f.max_coefficient().max(f64::MIN_POSITIVE);
    for idx in 0..modes.len() {
        if (idx == 0 || !modes.is_retained(idx)) && f.mode(idx).iter().any(|z| z.norm() != 0.0) {
            return Err(format!("mode {:?} must be zero", modes.wavevector(idx)));
        }
    }
    if f.max_divergence() > 1e-10 * scale {
        return Err("field is not divergence-free".into());
    }
    if f.hermitian_defect() > 1e-10 * scale {
        return Err("coefficients are not Hermitian".into());
    }
    Ok(())
}

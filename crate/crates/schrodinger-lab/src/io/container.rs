use crate::field::{GridSpec, SpaceTimeField, SpectralField, TimeGrid};
use crate::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};

/// Header size: five little-endian 64-bit words.
pub const HEADER_BYTES: usize = 40;

/// Contents of a field container: initial data (`nt = 0`, one spatial slice) or a
/// solution sampled on the midpoint rows of `[0, R]`.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldFile {
    Initial(SpectralField),
    Evolved(SpaceTimeField),
}

fn header(out: &mut impl Write, grid: &GridSpec, nt: usize) -> Result<()> {
    out.write_all(&(grid.dim as u64).to_le_bytes())?;
    out.write_all(&grid.scale.to_le_bytes())?;
    out.write_all(&grid.period.to_le_bytes())?;
    out.write_all(&(grid.nx as u64).to_le_bytes())?;
    out.write_all(&(nt as u64).to_le_bytes())?;
    Ok(())
}

fn payload(out: &mut impl Write, values: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 * values.len());
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Writes initial data as its spatial samples with `nt = 0` in the header.
pub fn write_initial(out: &mut impl Write, field: &SpectralField) -> Result<()> {
    header(out, &field.grid, 0)?;
    payload(out, &field.to_spatial()?)
}

/// Writes a solution, x-major then t. Only midpoint rows on `[0, R]` are representable.
pub fn write_evolved(out: &mut impl Write, u: &SpaceTimeField) -> Result<()> {
    let nt = u.nt();
    let expected = TimeGrid::midpoints(0.0, u.grid.scale, nt);
    let close = u.times.samples.iter().zip(&expected.samples).all(|(a, b)| (a - b).abs() <= 1e-9 * u.grid.scale);
    if nt == 0 || !close {
        return Err(Error::Format("the container stores midpoint rows of [0, R] only".into()));
    }
    header(out, &u.grid, nt)?;
    payload(out, &u.values)
}

fn word(bytes: &[u8], k: usize) -> [u8; 8] {
    bytes[8 * k..8 * k + 8].try_into().expect("eight bytes")
}

/// Reads either kind of container. An empty input is [`Error::DegenerateInput`].
pub fn read_field(input: &mut impl Read) -> Result<FieldFile> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.is_empty() {
        return Err(Error::DegenerateInput("empty field file".into()));
    }
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let dim = u64::from_le_bytes(word(&bytes, 0)) as usize;
    let scale = f64::from_le_bytes(word(&bytes, 1));
    let period = f64::from_le_bytes(word(&bytes, 2));
    let nx = u64::from_le_bytes(word(&bytes, 3)) as usize;
    let nt = u64::from_le_bytes(word(&bytes, 4)) as usize;
    let grid = GridSpec::new(dim, scale, period, nx, nt.max(nx))?;
    let rows = nt.max(1);
    let count = grid.points().checked_mul(rows).ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    let body = &bytes[HEADER_BYTES..];
    if body.len() != 16 * count {
        return Err(Error::Format(format!("payload holds {} bytes, header implies {}", body.len(), 16 * count)));
    }
    let values: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("eight bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("eight bytes"));
            Complex64::new(re, im)
        })
        .collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if nt == 0 {
        Ok(FieldFile::Initial(SpectralField::from_spatial(grid, &values)?))
    } else {
        let times = TimeGrid::midpoints(0.0, scale, nt);
        Ok(FieldFile::Evolved(SpaceTimeField { grid, times, values }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{propagate, SupportBall};
    use crate::rng::{random_band_limited, seeded};

    #[test]
    fn header_layout_is_fixed() {
        let grid = GridSpec::standard(1, 16.0).unwrap();
        let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded(1));
        let mut bytes = Vec::new();
        write_initial(&mut bytes, &f).unwrap();
        assert_eq!(bytes.len(), HEADER_BYTES + 16 * grid.nx);
        assert_eq!(u64::from_le_bytes(word(&bytes, 0)), 1);
        assert_eq!(f64::from_le_bytes(word(&bytes, 1)), 16.0);
        assert_eq!(f64::from_le_bytes(word(&bytes, 2)), 64.0);
        assert_eq!(u64::from_le_bytes(word(&bytes, 3)), grid.nx as u64);
        assert_eq!(u64::from_le_bytes(word(&bytes, 4)), 0);
    }

    #[test]
    fn evolved_field_is_read_back_exactly() {
        let grid = GridSpec::standard(2, 8.0).unwrap();
        let f = random_band_limited(&grid, SupportBall::unit(), &mut seeded(2));
        let u = propagate(&f, &grid.time_grid()).unwrap();
        let mut bytes = Vec::new();
        write_evolved(&mut bytes, &u).unwrap();
        match read_field(&mut bytes.as_slice()).unwrap() {
            FieldFile::Evolved(v) => assert_eq!(v, u),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_and_truncated_inputs_are_rejected() {
        assert!(matches!(read_field(&mut [].as_slice()), Err(Error::DegenerateInput(_))));
        assert!(matches!(read_field(&mut [0u8; 12].as_slice()), Err(Error::Format(_))));
        let grid = GridSpec::standard(1, 16.0).unwrap();
        let mut bytes = Vec::new();
        write_initial(&mut bytes, &SpectralField::zeros(grid)).unwrap();
        bytes.pop();
        assert!(matches!(read_field(&mut bytes.as_slice()), Err(Error::Format(_))));
    }
}

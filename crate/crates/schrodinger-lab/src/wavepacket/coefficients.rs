use super::{Tile, TileIndex, WavePacketFrame};
use crate::field::SpectralField;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Coefficients `<f, phi_{theta,nu}>` below this multiple of `||f||_2` are dropped.
pub const DROP_THRESHOLD: f64 = 1e-14;

/// All coefficients sharing one frequency cell, dense over the physical lattice
/// (slot `r` holds lattice index `j` with `j = r mod nu_count` per axis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaBlock {
    pub theta: [i64; 2],
    pub coeffs: Vec<Complex64>,
}

/// One serialised coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub theta_center: Vec<f64>,
    pub nu_center: Vec<f64>,
    #[serde(rename = "R")]
    pub scale: f64,
    pub re: f64,
    pub im: f64,
}

/// Frame representation of a function: coefficients indexed by tiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub frame: WavePacketFrame,
    pub blocks: Vec<ThetaBlock>,
    /// Squared magnitude of the dropped coefficients.
    pub dropped_mass: f64,
    /// `||f||_2` of the analysed function.
    pub source_norm: f64,
}

impl CoefficientSet {
    pub fn empty(frame: &WavePacketFrame) -> Self {
        Self { frame: frame.clone(), blocks: Vec::new(), dropped_mass: 0.0, source_norm: 0.0 }
    }

    fn slot_to_nu(&self, slot: usize) -> [i64; 2] {
        let p = self.frame.nu_count;
        let half = (p / 2) as i64;
        let signed = |r: usize| {
            let r = r as i64;
            if r >= p as i64 - half {
                r - p as i64
            } else {
                r
            }
        };
        match self.frame.dim() {
            1 => [signed(slot), 0],
            _ => [signed(slot / p), signed(slot % p)],
        }
    }

    fn nu_to_slot(&self, nu: [i64; 2]) -> usize {
        let p = self.frame.nu_count as i64;
        match self.frame.dim() {
            1 => nu[0].rem_euclid(p) as usize,
            _ => (nu[0].rem_euclid(p) * p + nu[1].rem_euclid(p)) as usize,
        }
    }

    /// Retained (nonzero) coefficients with their tile indices.
    pub fn iter(&self) -> impl Iterator<Item = (TileIndex, Complex64)> + '_ {
        self.blocks.iter().flat_map(move |b| {
            b.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
                .map(move |(slot, c)| (TileIndex { theta: b.theta, nu: self.slot_to_nu(slot) }, *c))
        })
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: TileIndex) -> Complex64 {
        let slot = self.nu_to_slot(index.nu);
        self.blocks
            .iter()
            .find(|b| b.theta == index.theta)
            .map(|b| b.coeffs[slot])
            .unwrap_or_default()
    }

    /// `sum |<f, phi_T>|^2` over retained tiles.
    pub fn mass(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.coeffs.iter()).map(|c| c.norm_sqr()).sum()
    }

    /// `sum |coeff|^2 / ||f||^2`; equals `1 / c_kappa` for a tight frame.
    pub fn frame_ratio(&self) -> f64 {
        (self.mass() + self.dropped_mass) / (self.source_norm * self.source_norm)
    }

    /// Keeps only tiles accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(TileIndex) -> bool) -> Self {
        let mut out = self.clone();
        for b in &mut out.blocks {
            for (slot, c) in b.coeffs.iter_mut().enumerate() {
                if !keep(TileIndex { theta: b.theta, nu: self.slot_to_nu(slot) }) {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
        out
    }

    /// Coefficient-wise sum of two sets over the same frame.
    pub fn plus(&self, other: &CoefficientSet) -> Result<Self> {
        if self.frame != other.frame {
            return Err(Error::InvalidParameter("coefficient sets use different frames".into()));
        }
        let mut out = self.clone();
        for b in &other.blocks {
            match out.blocks.iter_mut().find(|a| a.theta == b.theta) {
                Some(a) => a.coeffs.iter_mut().zip(&b.coeffs).for_each(|(x, y)| *x += y),
                None => out.blocks.push(b.clone()),
            }
        }
        out.blocks.sort_by_key(|b| b.theta);
        out.dropped_mass += other.dropped_mass;
        Ok(out)
    }

    pub fn tile(&self, index: TileIndex) -> Tile {
        self.frame.tile(index)
    }

    pub fn records(&self) -> Vec<CoefficientRecord> {
        let d = self.frame.dim();
        self.iter()
            .map(|(idx, c)| {
                let t = self.frame.tile(idx);
                CoefficientRecord {
                    theta_center: t.theta_center[..d].to_vec(),
                    nu_center: t.nu_center[..d].to_vec(),
                    scale: t.scale,
                    re: c.re,
                    im: c.im,
                }
            })
            .collect()
    }

    /// Rebuilds a set from records produced by [`CoefficientSet::records`].
    pub fn from_records(frame: &WavePacketFrame, records: &[CoefficientRecord]) -> Result<Self> {
        let mut set = Self::empty(frame);
        let n = frame.nu_count.pow(frame.dim() as u32);
        for rec in records {
            if rec.theta_center.len() != frame.dim() || rec.nu_center.len() != frame.dim() {
                return Err(Error::Format("record dimension does not match frame".into()));
            }
            let snap = |v: f64, step: f64| -> Result<i64> {
                let m = (v / step).round();
                if (v - m * step).abs() > 1e-6 * step {
                    return Err(Error::Format(format!("centre {v} is off the frame lattice")));
                }
                Ok(m as i64)
            };
            let mut theta = [0i64; 2];
            let mut nu = [0i64; 2];
            for a in 0..frame.dim() {
                theta[a] = snap(rec.theta_center[a], frame.theta_spacing)?;
                nu[a] = snap(rec.nu_center[a], frame.nu_side)?;
            }
            let slot = set.nu_to_slot(nu);
            let pos = match set.blocks.iter().position(|b| b.theta == theta) {
                Some(p) => p,
                None => {
                    set.blocks.push(ThetaBlock { theta, coeffs: vec![Complex64::new(0.0, 0.0); n] });
                    set.blocks.len() - 1
                }
            };
            set.blocks[pos].coeffs[slot] += Complex64::new(rec.re, rec.im);
        }
        set.blocks.sort_by_key(|b| b.theta);
        set.source_norm = (set.mass() * frame.normalization).sqrt();
        Ok(set)
    }
}

/// Window-weighted coefficients of one frequency cell: `(flat spectral index, A w(xi))`.
fn cell_modes(frame: &WavePacketFrame, theta: [i64; 2]) -> Vec<(usize, f64)> {
    let grid = &frame.grid;
    let reach = frame.kappa * frame.theta_width;
    let axis = |m: i64| -> Vec<(usize, f64)> {
        let c = frame.theta_coordinate(m);
        let lo = ((c - reach) / grid.dxi()).ceil() as i64;
        let hi = ((c + reach) / grid.dxi()).floor() as i64;
        let limit = (grid.nx / 2) as i64;
        (lo..=hi)
            .filter(|k| *k >= -limit && *k < limit)
            .map(|k| (grid.mode_index(k), frame.axis_amplitude * frame.window(k as f64 * grid.dxi(), c)))
            .filter(|(_, w)| *w != 0.0)
            .collect()
    };
    match grid.dim {
        1 => axis(theta[0]),
        _ => {
            let a = axis(theta[0]);
            let b = axis(theta[1]);
            let mut out = Vec::with_capacity(a.len() * b.len());
            for (i, wi) in &a {
                for (j, wj) in &b {
                    out.push((i * grid.nx + j, wi * wj));
                }
            }
            out
        }
    }
}

fn fold_slot(frame: &WavePacketFrame, index: usize) -> usize {
    let grid = &frame.grid;
    let p = frame.nu_count as i64;
    match grid.dim {
        1 => grid.signed_mode(index).rem_euclid(p) as usize,
        _ => {
            let a = grid.signed_mode(index / grid.nx).rem_euclid(p);
            let b = grid.signed_mode(index % grid.nx).rem_euclid(p);
            (a * p + b) as usize
        }
    }
}

fn dft(frame: &WavePacketFrame, buf: &mut [Complex64], inverse: bool) {
    let p = frame.nu_count;
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(p) } else { planner.plan_fft_forward(p) };
    fft.process(buf);
    if frame.dim() == 2 {
        for i in 0..p {
            for j in (i + 1)..p {
                buf.swap(i * p + j, j * p + i);
            }
        }
        fft.process(buf);
        for i in 0..p {
            for j in (i + 1)..p {
                buf.swap(i * p + j, j * p + i);
            }
        }
    }
}

fn theta_cells(frame: &WavePacketFrame, band: f64) -> Vec<[i64; 2]> {
    let range = frame.theta_range(band);
    match frame.dim() {
        1 => range.map(|m| [m, 0]).collect(),
        _ => range.clone().flat_map(|a| range.clone().map(move |b| [a, b])).collect(),
    }
}

/// Analysis: `<f, phi_{theta,nu}>` for every tile whose window meets the spectral support.
pub fn decompose(field: &SpectralField, frame: &WavePacketFrame) -> Result<CoefficientSet> {
    if field.grid.scale != frame.scale() {
        return Err(Error::ScaleMismatch { frame: frame.scale(), field: field.grid.scale });
    }
    if field.grid != frame.grid {
        return Err(Error::InvalidParameter("field grid differs from the frame grid".into()));
    }
    let norm = field.l2_norm();
    if norm == 0.0 {
        return Ok(CoefficientSet::empty(frame));
    }
    let band = field.band_radius(0.0);
    let volume = frame.grid.period.powi(frame.dim() as i32);
    let slots = frame.nu_count.pow(frame.dim() as u32);
    let floor = DROP_THRESHOLD * norm;
    let results: Vec<Option<(ThetaBlock, f64)>> = theta_cells(frame, band)
        .into_par_iter()
        .map(|theta| {
            let modes = cell_modes(frame, theta);
            if modes.iter().all(|(i, _)| field.coeffs[*i] == Complex64::new(0.0, 0.0)) {
                return None;
            }
            let mut buf = vec![Complex64::new(0.0, 0.0); slots];
            for (i, w) in &modes {
                buf[fold_slot(frame, *i)] += field.coeffs[*i] * *w;
            }
            dft(frame, &mut buf, true);
            let mut dropped = 0.0;
            for c in &mut buf {
                *c /= volume;
                if c.norm() < floor {
                    dropped += c.norm_sqr();
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            Some((ThetaBlock { theta, coeffs: buf }, dropped))
        })
        .collect();
    let mut set = CoefficientSet::empty(frame);
    set.source_norm = norm;
    for (block, dropped) in results.into_iter().flatten() {
        set.dropped_mass += dropped;
        set.blocks.push(block);
    }
    Ok(set)
}

/// Synthesis: `c_kappa sum_T coeff_T phi_T`.
pub fn reconstruct(set: &CoefficientSet) -> SpectralField {
    let frame = &set.frame;
    let mut out = SpectralField::zeros(frame.grid.clone());
    let contributions: Vec<Vec<(usize, Complex64)>> = set
        .blocks
        .par_iter()
        .map(|block| {
            let mut buf = block.coeffs.clone();
            dft(frame, &mut buf, false);
            cell_modes(frame, block.theta)
                .into_iter()
                .map(|(i, w)| (i, buf[fold_slot(frame, i)] * (w * frame.normalization)))
                .collect()
        })
        .collect();
    for list in contributions {
        for (i, v) in list {
            out.coeffs[i] += v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GridSpec, SupportBall};
    use crate::rng::{random_band_limited, seeded};

    #[test]
    fn zero_field_gives_empty_set() {
        let grid = GridSpec::standard(1, 64.0).unwrap();
        let frame = WavePacketFrame::new(&grid, 0.125).unwrap();
        let set = decompose(&SpectralField::zeros(grid), &frame).unwrap();
        assert!(set.is_empty());
        let back = reconstruct(&set);
        assert!(back.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn scale_mismatch_detected() {
        let frame = WavePacketFrame::new(&GridSpec::standard(1, 64.0).unwrap(), 0.125).unwrap();
        let f = SpectralField::zeros(GridSpec::standard(1, 128.0).unwrap());
        assert!(matches!(decompose(&f, &frame), Err(Error::ScaleMismatch { .. })));
    }

    #[test]
    fn records_round_trip_through_lattice() {
        let grid = GridSpec::standard(2, 64.0).unwrap();
        let frame = WavePacketFrame::new(&grid, 0.25).unwrap();
        let f = random_band_limited(&grid, SupportBall { center: [0.2, 0.1], radius: 0.3 }, &mut seeded(3));
        let set = decompose(&f, &frame).unwrap();
        let again = CoefficientSet::from_records(&frame, &set.records()).unwrap();
        let a = reconstruct(&set);
        let b = reconstruct(&again);
        let err: f64 = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm_sqr()).sum();
        assert!(err.sqrt() < 1e-12 * a.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
    }
}

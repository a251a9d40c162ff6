//! Wave-packet frame at a single scale `R`.
//!
//! A tile pairs a frequency cell `theta` (side `R^{-1/2}` in cycle units, i.e.
//! `2 pi / nu_side` in angular units) with a physical cell `nu` (side `nu_side ~ R^{1/2}`,
//! adjusted so that it divides the period). The packet profile is
//!
//! `phihat_{theta,nu}(xi) = A prod_j w((xi_j - c(theta)_j) / |theta|) e^{-i xi . c(nu)}`
//!
//! with `w` the plateau window supported in `[-kappa, kappa]` and flat on
//! `[-kappa/2, kappa/2]`. Frequency centres sit on a lattice of spacing
//! `1.5 kappa |theta|`, on which the squared windows sum to one, and the window is
//! narrower than the dual of the `nu` lattice, so analysis followed by synthesis is
//! the identity up to the constant `c_kappa`.

mod coefficients;
mod tube;

pub use coefficients::{decompose, reconstruct, CoefficientRecord, CoefficientSet, ThetaBlock};
pub use tube::{
    frequency_cap_check, temporal_cutoff, tube_coverage, tube_mass_fraction, tube_of, Tube, TubeLocalization,
};

use crate::bump::plateau;
use crate::field::{GridSpec, SpectralField, SupportBall};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Default window radius.
pub const DEFAULT_KAPPA: f64 = 0.125;

/// Dual frequency/physical cell pair indexing one wave packet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub dim: usize,
    /// Centre of `theta`, angular frequency units.
    pub theta_center: [f64; 2],
    /// Side of `theta` in cycle units (`1 / nu_side`).
    pub theta_side: f64,
    pub nu_center: [f64; 2],
    pub nu_side: f64,
    pub scale: f64,
}

impl Tile {
    /// `|theta| |nu|` per axis; 1 for every tile of a frame.
    pub fn duality(&self) -> f64 {
        self.theta_side * self.nu_side
    }
}

/// Tile position on the frame lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileIndex {
    pub theta: [i64; 2],
    pub nu: [i64; 2],
}

/// The single-scale tile frame attached to a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePacketFrame {
    pub grid: GridSpec,
    pub kappa: f64,
    /// Physical lattice spacing; divides the period.
    pub nu_side: f64,
    /// Number of physical lattice positions per axis.
    pub nu_count: usize,
    /// Angular frequency side `2 pi / nu_side`.
    pub theta_width: f64,
    /// Frequency lattice spacing `1.5 kappa theta_width`.
    pub theta_spacing: f64,
    /// Per-axis amplitude making `||phi_theta||_2` one in the continuum.
    pub axis_amplitude: f64,
    /// Reconstruction constant `c_kappa`, calibrated on a reference function.
    pub normalization: f64,
}

impl WavePacketFrame {
    pub fn new(grid: &GridSpec, kappa: f64) -> Result<Self> {
        grid.validate()?;
        if !(kappa > 0.0 && kappa <= 0.5) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} must lie in (0, 1/2]")));
        }
        let nu_count = (grid.period / grid.scale.sqrt()).round().max(1.0) as usize;
        let nu_side = grid.period / nu_count as f64;
        let theta_width = TAU / nu_side;
        let theta_spacing = 1.5 * kappa * theta_width;
        let axis_amplitude = (nu_side / (1.5 * kappa)).sqrt();
        let mut frame = Self {
            grid: grid.clone(),
            kappa,
            nu_side,
            nu_count,
            theta_width,
            theta_spacing,
            axis_amplitude,
            normalization: 1.0,
        };
        frame.normalization = frame.calibrate()?;
        Ok(frame)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn scale(&self) -> f64 {
        self.grid.scale
    }

    /// `c_kappa` in closed form, `(1.5 kappa)^n`; used to cross-check the calibration.
    pub fn analytic_normalization(&self) -> f64 {
        (1.5 * self.kappa).powi(self.dim() as i32)
    }

    /// Least-squares constant `c` minimising `||f - c R_1 f||` for a reference Gaussian,
    /// where `R_1` is synthesis-after-analysis with unit constant.
    fn calibrate(&self) -> Result<f64> {
        let reference = reference_gaussian(&self.grid);
        let mut unit = self.clone();
        unit.normalization = 1.0;
        let coeffs = decompose(&reference, &unit)?;
        let back = reconstruct(&coeffs);
        let num = reference.inner(&back).re;
        let den = back.inner(&back).re;
        if den == 0.0 {
            return Err(Error::DegenerateInput("reference reconstruction vanished".into()));
        }
        Ok(num / den)
    }

    /// One-dimensional window factor for frequency `xi` and centre `center`.
    pub fn window(&self, xi: f64, center: f64) -> f64 {
        plateau((xi - center) / self.theta_width, self.kappa)
    }

    /// Frequency centre of lattice index `m`.
    pub fn theta_coordinate(&self, m: i64) -> f64 {
        m as f64 * self.theta_spacing
    }

    /// Physical centre of lattice index `j`.
    pub fn nu_coordinate(&self, j: i64) -> f64 {
        j as f64 * self.nu_side
    }

    /// Frequency lattice indices whose window meets `[-band, band]` on one axis.
    pub fn theta_range(&self, band: f64) -> std::ops::RangeInclusive<i64> {
        let reach = band + self.kappa * self.theta_width;
        let m = (reach / self.theta_spacing).floor() as i64;
        -m..=m
    }

    /// Signed physical lattice indices, one per cell of the torus.
    pub fn nu_range(&self) -> std::ops::Range<i64> {
        let half = (self.nu_count / 2) as i64;
        -half..(self.nu_count as i64 - half)
    }

    pub fn tile(&self, index: TileIndex) -> Tile {
        let d = self.dim();
        let pick = |v: [i64; 2], f: &dyn Fn(i64) -> f64| [f(v[0]), if d == 2 { f(v[1]) } else { 0.0 }];
        Tile {
            dim: d,
            theta_center: pick(index.theta, &|m| self.theta_coordinate(m)),
            theta_side: 1.0 / self.nu_side,
            nu_center: pick(index.nu, &|j| self.nu_coordinate(j)),
            nu_side: self.nu_side,
            scale: self.scale(),
        }
    }

    /// Spectral profile `phihat_{theta,nu}(xi)` of an arbitrary tile.
    pub fn profile(&self, tile: &Tile, xi: [f64; 2]) -> Complex64 {
        let mut amp = self.axis_amplitude * self.window(xi[0], tile.theta_center[0]);
        let mut phase = xi[0] * tile.nu_center[0];
        if self.dim() == 2 {
            amp *= self.axis_amplitude * self.window(xi[1], tile.theta_center[1]);
            phase += xi[1] * tile.nu_center[1];
        }
        Complex64::from_polar(amp, -phase)
    }

    /// The packet `phi_{theta,nu}` as a spectral field on the frame grid.
    pub fn packet(&self, tile: &Tile) -> SpectralField {
        let mut f = SpectralField::from_fn(self.grid.clone(), |xi| self.profile(tile, xi));
        f.support = Some(SupportBall {
            center: tile.theta_center,
            radius: self.kappa * self.theta_width * (self.dim() as f64).sqrt(),
        });
        f
    }
}

/// Gaussian `exp(-|xi|^2 / 0.25^2)` cut to the unit ball: the frame's calibration input.
pub fn reference_gaussian(grid: &GridSpec) -> SpectralField {
    let width = 0.25;
    SpectralField::from_fn(grid.clone(), |xi| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        if r2 < 1.0 {
            Complex64::new((-r2 / (width * width)).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_matches_closed_form() {
        for dim in [1, 2] {
            let grid = GridSpec::standard(dim, 64.0).unwrap();
            for kappa in [0.125, 0.25, 0.5] {
                let frame = WavePacketFrame::new(&grid, kappa).unwrap();
                let rel = frame.normalization / frame.analytic_normalization() - 1.0;
                assert!(rel.abs() < 1e-10, "dim {dim} kappa {kappa}: {rel}");
            }
        }
    }

    #[test]
    fn tiles_are_dual_and_packets_normalised() {
        let grid = GridSpec::standard(2, 256.0).unwrap();
        let frame = WavePacketFrame::new(&grid, DEFAULT_KAPPA).unwrap();
        for (m, j) in [([0, 0], [0, 0]), ([3, -5], [7, 2]), ([-11, 10], [-30, 31])] {
            let tile = frame.tile(TileIndex { theta: m, nu: j });
            assert!((tile.duality() - 1.0).abs() < 1e-12);
            let norm = frame.packet(&tile).l2_norm();
            assert!((0.5..=2.0).contains(&norm));
            assert!((norm - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn kappa_out_of_range_rejected() {
        let grid = GridSpec::standard(1, 64.0).unwrap();
        assert!(WavePacketFrame::new(&grid, 0.0).is_err());
        assert!(WavePacketFrame::new(&grid, 0.75).is_err());
    }
}

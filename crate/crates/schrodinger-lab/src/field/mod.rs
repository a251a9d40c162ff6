//! Discretised fields on the periodic space-time box and the operations that act on them.
//!
//! Conventions: the spatial torus has period `L`; the frequency lattice is
//! `xi_k = 2 pi k / L` (angular units); `f(x) = L^-n sum_k fhat_k e^{i xi_k . x}`;
//! spatial samples sit at `x_j = -L/2 + j L / nx`; time samples are midpoints of
//! `nt` equal cells of `[0, R]`.

mod fft;
mod fit;
mod lp;
mod norm;
mod propagate;
mod rescale;

pub use fft::SpectralPlan;
pub use fit::{fit_exponent, ExponentFit};
pub use lp::{littlewood_paley, lp_weight};
pub use norm::{maximal_function, mixed_norm, MixedNormParams, Region};
pub use propagate::{propagate, Propagator};
pub use rescale::{parabolic_rescale, RescaleMap};

use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Discretisation of `B(0,R) x [0,R]` inside the torus of period `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Spatial dimension, 1 or 2.
    pub dim: usize,
    /// Physical and temporal scale `R`.
    pub scale: f64,
    /// Spatial period `L`.
    pub period: f64,
    /// Samples per spatial axis.
    pub nx: usize,
    /// Time samples on `[0, R]`.
    pub nt: usize,
}

impl GridSpec {
    pub fn new(dim: usize, scale: f64, period: f64, nx: usize, nt: usize) -> Result<Self> {
        let grid = Self { dim, scale, period, nx, nt };
        grid.validate()?;
        if nt < nx {
            return Err(Error::InvalidGrid(format!("nt = {nt} is below nx = {nx}")));
        }
        Ok(grid)
    }

    /// Period `4R`, the smallest power-of-two `nx` meeting the band limit, `nt = nx`.
    pub fn standard(dim: usize, scale: f64) -> Result<Self> {
        let period = 4.0 * scale;
        let nx = ((period / PI).ceil() as usize).next_power_of_two().max(8);
        Self::new(dim, scale, period, nx, nx)
    }

    /// Period `4R` with an explicit spatial resolution; `nt = nx`.
    pub fn with_resolution(dim: usize, scale: f64, nx: usize) -> Result<Self> {
        Self::new(dim, scale, 4.0 * scale, nx, nx)
    }

    /// Checks the structural invariants that every operation relies on.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {} not in {{1, 2}}", self.dim)));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::InvalidGrid(format!("scale {} must be positive", self.scale)));
        }
        if self.period < 4.0 * self.scale * (1.0 - 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "period {} is below 4R = {}",
                self.period,
                4.0 * self.scale
            )));
        }
        if self.nx < 2 || self.nx % 2 != 0 {
            return Err(Error::InvalidGrid(format!("nx = {} must be even and >= 2", self.nx)));
        }
        if self.nt == 0 {
            return Err(Error::InvalidGrid("nt must be positive".into()));
        }
        let required = self.period / PI;
        if (self.nx as f64) < required {
            return Err(Error::GridTooCoarse { nx: self.nx, required });
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.period / self.nx as f64
    }

    /// Number of spatial samples, `nx^dim`.
    pub fn points(&self) -> usize {
        self.nx.pow(self.dim as u32)
    }

    /// Quadrature weight of one spatial sample.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Frequency lattice spacing `2 pi / L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.period + j as f64 * self.dx()
    }

    /// Spatial position of flat sample index `index` (unused axes are 0).
    pub fn position(&self, index: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.coordinate(index), 0.0],
            _ => [self.coordinate(index / self.nx), self.coordinate(index % self.nx)],
        }
    }

    /// Signed mode number of FFT index `k`.
    pub fn signed_mode(&self, k: usize) -> i64 {
        if k < self.nx / 2 {
            k as i64
        } else {
            k as i64 - self.nx as i64
        }
    }

    /// FFT index of a signed mode number.
    pub fn mode_index(&self, m: i64) -> usize {
        m.rem_euclid(self.nx as i64) as usize
    }

    pub fn wavenumber(&self, k: usize) -> f64 {
        self.signed_mode(k) as f64 * self.dxi()
    }

    /// Angular frequency of flat spectral index `index`.
    pub fn frequency(&self, index: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.wavenumber(index), 0.0],
            _ => [self.wavenumber(index / self.nx), self.wavenumber(index % self.nx)],
        }
    }

    /// Default midpoint time grid on `[0, R]`.
    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::midpoints(0.0, self.scale, self.nt)
    }
}

/// Time samples together with their (uniform) quadrature weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub samples: Vec<f64>,
    pub weight: f64,
}

impl TimeGrid {
    /// Midpoints of `count` equal cells of `[start, end]`.
    pub fn midpoints(start: f64, end: f64, count: usize) -> Self {
        let weight = (end - start) / count as f64;
        let samples = (0..count).map(|j| start + (j as f64 + 0.5) * weight).collect();
        Self { samples, weight }
    }

    pub fn explicit(samples: Vec<f64>, weight: f64) -> Self {
        Self { samples, weight }
    }

    /// Same samples with every time multiplied by `factor` (weights scale too).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|t| t * factor).collect(),
            weight: self.weight * factor,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Ball `B(center, radius)` declared to contain the spectral support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBall {
    pub center: [f64; 2],
    pub radius: f64,
}

impl SupportBall {
    pub fn unit() -> Self {
        Self { center: [0.0, 0.0], radius: 1.0 }
    }

    pub fn contains(&self, xi: [f64; 2]) -> bool {
        let d0 = xi[0] - self.center[0];
        let d1 = xi[1] - self.center[1];
        (d0 * d0 + d1 * d1).sqrt() <= self.radius * (1.0 + 1e-12)
    }
}

/// Fourier coefficients `fhat(xi)` on the frequency lattice, FFT ordered
/// (axis 0 slow for `dim = 2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
    pub support: Option<SupportBall>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.points();
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); n], support: None }
    }

    /// Samples `fhat` at every lattice frequency.
    pub fn from_fn(grid: GridSpec, mut fhat: impl FnMut([f64; 2]) -> Complex64) -> Self {
        let coeffs = (0..grid.points()).map(|i| fhat(grid.frequency(i))).collect();
        Self { grid, coeffs, support: None }
    }

    /// Forward transform of spatial samples.
    pub fn from_spatial(grid: GridSpec, values: &[Complex64]) -> Result<Self> {
        let plan = SpectralPlan::new(&grid)?;
        let coeffs = plan.to_spectral(values);
        Ok(Self { grid, coeffs, support: None })
    }

    /// Declares a support ball, failing if more than `tol` of the mass lies outside it.
    pub fn with_support(mut self, ball: SupportBall, tol: f64) -> Result<Self> {
        let leak = self.leak_outside(&ball);
        if leak > tol {
            return Err(Error::BadSupport { leak });
        }
        self.support = Some(ball);
        Ok(self)
    }

    /// Fraction of `L^2` mass outside `ball`.
    pub fn leak_outside(&self, ball: &SupportBall) -> f64 {
        let mut outside = 0.0;
        let mut total = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = c.norm_sqr();
            total += m;
            if !ball.contains(self.grid.frequency(i)) {
                outside += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }

    /// `||f||_{L^2(torus)}` via Parseval.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (s / self.grid.period.powi(self.grid.dim as i32)).sqrt()
    }

    /// Inner product `<self, other>` in `L^2(torus)`.
    pub fn inner(&self, other: &SpectralField) -> Complex64 {
        let s: Complex64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum();
        s / self.grid.period.powi(self.grid.dim as i32)
    }

    /// Spatial samples at time 0.
    pub fn to_spatial(&self) -> Result<Vec<Complex64>> {
        Ok(SpectralPlan::new(&self.grid)?.to_physical(&self.coeffs, 0.0))
    }

    /// Spatial translation `f(x - shift)`.
    pub fn translated(&self, shift: [f64; 2]) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let xi = self.grid.frequency(i);
            *c *= Complex64::from_polar(1.0, -(xi[0] * shift[0] + xi[1] * shift[1]));
        }
        out
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Pointwise sum; grids must agree.
    pub fn plus(&self, other: &SpectralField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter("grids differ".into()));
        }
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        out.support = None;
        Ok(out)
    }

    /// Largest `|xi|` carrying a coefficient above `tol * max |fhat|`.
    pub fn band_radius(&self, tol: f64) -> f64 {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol * peak)
            .map(|(i, _)| {
                let xi = self.grid.frequency(i);
                (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Samples of `u(x,t)` stored x-major: `values[x * times.len() + j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    pub grid: GridSpec,
    pub times: TimeGrid,
    pub values: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn from_fn(
        grid: GridSpec,
        times: TimeGrid,
        mut u: impl FnMut([f64; 2], f64) -> Complex64,
    ) -> Self {
        let nt = times.len();
        let mut values = Vec::with_capacity(grid.points() * nt);
        for x in 0..grid.points() {
            let pos = grid.position(x);
            for &t in &times.samples {
                values.push(u(pos, t));
            }
        }
        Self { grid, times, values }
    }

    pub fn nt(&self) -> usize {
        self.times.len()
    }

    pub fn at(&self, x: usize, j: usize) -> Complex64 {
        self.values[x * self.nt() + j]
    }

    /// Time series at spatial sample `x`.
    pub fn column(&self, x: usize) -> &[Complex64] {
        let nt = self.nt();
        &self.values[x * nt..(x + 1) * nt]
    }

    /// Spatial slice at time index `j`.
    pub fn slice(&self, j: usize) -> Vec<Complex64> {
        (0..self.grid.points()).map(|x| self.at(x, j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_meets_band_limit() {
        let g = GridSpec::standard(1, 1024.0).unwrap();
        assert_eq!(g.period, 4096.0);
        assert_eq!(g.nx, 2048);
        assert!(g.nx as f64 >= g.period / PI);
        assert_eq!(g.nt, g.nx);
    }

    #[test]
    fn coarse_grid_rejected() {
        let err = GridSpec::new(1, 64.0, 256.0, 64, 64).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn short_period_rejected() {
        assert!(GridSpec::new(1, 64.0, 128.0, 128, 128).is_err());
        assert!(GridSpec::new(3, 64.0, 256.0, 128, 128).is_err());
        assert!(GridSpec::new(1, 64.0, 256.0, 128, 64).is_err());
    }

    #[test]
    fn frequency_lattice_is_signed_and_symmetric() {
        let g = GridSpec::with_resolution(1, 16.0, 32).unwrap();
        assert_eq!(g.signed_mode(0), 0);
        assert_eq!(g.signed_mode(15), 15);
        assert_eq!(g.signed_mode(16), -16);
        assert_eq!(g.signed_mode(31), -1);
        assert_eq!(g.mode_index(-1), 31);
        assert!((g.wavenumber(1) - 2.0 * PI / 64.0).abs() < 1e-15);
    }

    #[test]
    fn midpoint_time_grid() {
        let tg = TimeGrid::midpoints(0.0, 8.0, 4);
        assert_eq!(tg.samples, vec![1.0, 3.0, 5.0, 7.0]);
        assert_eq!(tg.weight, 2.0);
    }

    #[test]
    fn translation_is_unitary() {
        let g = GridSpec::standard(1, 32.0).unwrap();
        let f = SpectralField::from_fn(g, |xi| Complex64::new((-xi[0] * xi[0] * 10.0).exp(), 0.0));
        let moved = f.translated([7.0, 0.0]);
        assert!((moved.l2_norm() - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
    }
}

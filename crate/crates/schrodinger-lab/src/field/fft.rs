use super::GridSpec;
use crate::Result;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Precomputed FFTs and per-mode factors for one grid.
///
/// `to_physical` evaluates `L^-n sum_k fhat_k e^{i(xi_k . x + t |xi_k|^2)}` on the
/// spatial sample lattice; `to_spectral` is its inverse at `t = 0`.
#[derive(Clone)]
pub struct SpectralPlan {
    dim: usize,
    nx: usize,
    period: f64,
    cell_volume: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    sign: Vec<f64>,
    symbol: Vec<f64>,
    /// Per-axis `(-1)^m` and `xi_m^2`; sign and phase factor over the axes.
    axis_sign: Vec<f64>,
    axis_symbol: Vec<f64>,
}

impl SpectralPlan {
    pub fn new(grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.nx);
        let inverse = planner.plan_fft_inverse(grid.nx);
        let n = grid.points();
        let mut sign = Vec::with_capacity(n);
        let mut symbol = Vec::with_capacity(n);
        for i in 0..n {
            let parity = match grid.dim {
                1 => grid.signed_mode(i),
                _ => grid.signed_mode(i / grid.nx) + grid.signed_mode(i % grid.nx),
            };
            sign.push(if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 });
            let xi = grid.frequency(i);
            symbol.push(xi[0] * xi[0] + xi[1] * xi[1]);
        }
        Ok(Self {
            dim: grid.dim,
            nx: grid.nx,
            period: grid.period,
            cell_volume: grid.cell_volume(),
            forward,
            inverse,
            sign,
            symbol,
            axis_sign: (0..grid.nx).map(|k| if grid.signed_mode(k).rem_euclid(2) == 0 { 1.0 } else { -1.0 }).collect(),
            axis_symbol: (0..grid.nx).map(|k| grid.wavenumber(k).powi(2)).collect(),
        })
    }

    /// `|xi|^2` per flat spectral index.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Spatial samples of `e^{it Delta} f` given the coefficients of `f`.
    pub fn to_physical(&self, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let scale = self.period.powi(-(self.dim as i32));
        let factor: Vec<Complex64> = self
            .axis_sign
            .iter()
            .zip(&self.axis_symbol)
            .map(|(s, w)| if t == 0.0 { Complex64::new(*s, 0.0) } else { Complex64::from_polar(*s, t * w) })
            .collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); coeffs.len()];
        if self.dim == 1 {
            for ((b, c), f) in buf.iter_mut().zip(coeffs).zip(&factor) {
                *b = c * f * scale;
            }
            self.transform(&mut buf, &self.inverse);
        } else {
            // Written transposed, tile by tile, so the first pass runs along contiguous memory.
            const TILE: usize = 8;
            let n = self.nx;
            for bi in (0..n).step_by(TILE) {
                for bj in (0..n).step_by(TILE) {
                    for row in bi..(bi + TILE).min(n) {
                        let outer = factor[row] * scale;
                        for col in bj..(bj + TILE).min(n) {
                            let c = coeffs[row * n + col];
                            if c.re != 0.0 || c.im != 0.0 {
                                buf[col * n + row] = c * factor[col] * outer;
                            }
                        }
                    }
                }
            }
            self.transform_transposed(&mut buf, &self.inverse);
        }
        buf
    }

    /// Coefficients of the function with the given spatial samples.
    pub fn to_spectral(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.transform(&mut buf, &self.forward);
        buf.iter_mut().zip(&self.sign).for_each(|(c, s)| *c *= s * self.cell_volume);
        buf
    }

    fn transform(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        if self.dim == 1 {
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(buf, &mut scratch);
        } else {
            transpose(buf, self.nx);
            self.transform_transposed(buf, fft);
        }
    }

    /// 2D transform of data supplied in transposed layout; the result is in natural layout.
    fn transform_transposed(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // Rows that vanish stay zero under their own transform.
        for row in buf.chunks_exact_mut(self.nx) {
            if row.iter().any(|c| c.re != 0.0 || c.im != 0.0) {
                fft.process_with_scratch(row, &mut scratch);
            }
        }
        transpose(buf, self.nx);
        fft.process_with_scratch(buf, &mut scratch);
    }
}

/// In-place transpose of an `n x n` row-major block, tile by tile for cache locality.
fn transpose(buf: &mut [Complex64], n: usize) {
    const TILE: usize = 16;
    for bi in (0..n).step_by(TILE) {
        for bj in (bi..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + TILE).min(n) {
                    buf.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        for dim in [1, 2] {
            let g = GridSpec::with_resolution(dim, 8.0, 16).unwrap();
            let plan = SpectralPlan::new(&g).unwrap();
            let v: Vec<Complex64> =
                (0..g.points()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
            let back = plan.to_physical(&plan.to_spectral(&v), 0.0);
            for (a, b) in v.iter().zip(&back) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_matches_direct_sum_2d() {
        let g = GridSpec::with_resolution(2, 4.0, 8).unwrap();
        let plan = SpectralPlan::new(&g).unwrap();
        let coeffs: Vec<Complex64> =
            (0..g.points()).map(|i| Complex64::new((i as f64 * 0.7).cos(), (i as f64 * 1.3).sin())).collect();
        let t = 0.37;
        let fast = plan.to_physical(&coeffs, t);
        let area = g.period * g.period;
        for x in 0..g.points() {
            let p = g.position(x);
            let direct: Complex64 = (0..g.points())
                .map(|k| {
                    let xi = g.frequency(k);
                    coeffs[k]
                        * Complex64::from_polar(1.0, xi[0] * p[0] + xi[1] * p[1] + t * (xi[0] * xi[0] + xi[1] * xi[1]))
                })
                .sum::<Complex64>()
                / area;
            assert!((fast[x] - direct).norm() < 1e-12);
        }
    }
}

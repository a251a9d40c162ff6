//! Baseband evaluation of `e^{it Delta} f` for fields with narrow spectral support.
//!
//! If every coefficient sits at `xi = c + eta` with `c` on the lattice, then
//! `e^{it Delta} f(x) = e^{i(c.x + |c|^2 t)} g(x + 2 c t, t)` with
//! `g(y, t) = L^-n sum a(eta) e^{i(eta.y + |eta|^2 t)}`. The modulus is therefore read
//! off a coarse FFT of the offsets `eta` only, whose size depends on the support
//! radius and not on the band of the full grid.

use crate::field::SpectralField;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Coefficients below this fraction of the largest one are treated as zero.
pub const NEGLIGIBLE: f64 = 1e-14;

/// Offsets per field: coarse flat index, scaled coefficient, `|eta|^2`.
type Offsets = Vec<(usize, Complex64, f64)>;

/// Shared baseband frame for one or more fields on the same grid.
pub struct Baseband {
    dim: usize,
    period: f64,
    /// Side `R^{1/2}` of the cubes that integrals are binned into.
    cube_side: f64,
    points: usize,
    center: [f64; 2],
    /// Largest `|eta|` over all fields.
    pub radius: f64,
    offsets: Vec<Offsets>,
    fft: Arc<dyn Fft<f64>>,
}

impl Baseband {
    pub fn new(fields: &[&SpectralField]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::InvalidParameter("no fields to evaluate".into()))?;
        let grid = &first.grid;
        if fields.iter().any(|f| f.grid != *grid) {
            return Err(Error::InvalidParameter("fields live on different grids".into()));
        }
        let dim = grid.dim;
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        let mut active: Vec<Vec<usize>> = Vec::with_capacity(fields.len());
        for f in fields {
            let peak = f.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let keep: Vec<usize> =
                (0..f.coeffs.len()).filter(|&i| peak > 0.0 && f.coeffs[i].norm() > NEGLIGIBLE * peak).collect();
            for &i in &keep {
                let m = modes(grid, i);
                for a in 0..dim {
                    lo[a] = lo[a].min(m[a]);
                    hi[a] = hi[a].max(m[a]);
                }
            }
            active.push(keep);
        }
        if active.iter().all(|a| a.is_empty()) {
            lo = [0; 2];
            hi = [0; 2];
        }
        let mid: Vec<i64> = (0..dim).map(|a| (lo[a] + hi[a]).div_euclid(2)).collect();
        let span = (0..dim).map(|a| (hi[a] - mid[a]).max(mid[a] - lo[a])).max().unwrap_or(0) as usize;
        let dxi = grid.dxi();
        let mut center = [0.0; 2];
        for a in 0..dim {
            center[a] = mid[a] as f64 * dxi;
        }
        let mut radius: f64 = 0.0;
        for keep in &active {
            for &i in keep {
                let m = modes(grid, i);
                let e: f64 = (0..dim).map(|a| ((m[a] - mid[a]) as f64 * dxi).powi(2)).sum();
                radius = radius.max(e.sqrt());
            }
        }
        // Exact quadrature of |g|^6 over a full period needs spacing below pi / (3 radius);
        // binning into R^{1/2}-cubes needs at least four samples per cube side.
        let cube_side = grid.scale.sqrt();
        let needed = (3.0 * radius * grid.period / std::f64::consts::PI).ceil() as usize;
        let binning = (4.0 * grid.period / cube_side).ceil() as usize;
        let points = needed.max(binning).max(2 * span + 2).max(64).next_power_of_two();
        let norm = grid.period.powi(-(dim as i32));
        let offsets = fields
            .iter()
            .zip(&active)
            .map(|(f, keep)| {
                keep.iter()
                    .map(|&i| {
                        let m = modes(grid, i);
                        let mut flat = 0usize;
                        let mut parity = 0i64;
                        let mut eta2 = 0.0;
                        for a in 0..dim {
                            let off = m[a] - mid[a];
                            parity += off;
                            flat = flat * points + off.rem_euclid(points as i64) as usize;
                            eta2 += (off as f64 * dxi).powi(2);
                        }
                        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        (flat, f.coeffs[i] * (sign * norm), eta2)
                    })
                    .collect()
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_inverse(points);
        Ok(Self { dim, period: grid.period, cube_side, points, center, radius, offsets, fft })
    }

    /// Coarse samples per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Baseband centre `c` (angular, on the lattice).
    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    /// Quadrature weight of one coarse spatial sample.
    pub fn cell_volume(&self) -> f64 {
        (self.period / self.points as f64).powi(self.dim as i32)
    }

    /// Highest space-time frequency of the solutions, `|c| rho * 2 + rho^2`, in the moving frame.
    pub fn time_frequency(&self) -> f64 {
        let c = (self.center[0].powi(2) + self.center[1].powi(2)).sqrt();
        2.0 * c * self.radius + self.radius * self.radius
    }

    /// Number of midpoint time rows resolving `|u|^6` on an interval of length `duration`,
    /// with at least four rows per cube side.
    pub fn rows_for(&self, duration: f64) -> usize {
        let resolve = (3.0 * duration * self.time_frequency() / std::f64::consts::PI).ceil() as usize;
        let binning = (4.0 * duration / self.cube_side).ceil() as usize;
        resolve.max(binning).max(16)
    }

    /// `g_i(., t)` on the coarse grid for every field.
    pub fn row(&self, t: f64) -> Vec<Vec<Complex64>> {
        self.offsets
            .iter()
            .map(|offs| {
                let mut buf = vec![Complex64::new(0.0, 0.0); self.points.pow(self.dim as u32)];
                for &(k, a, e2) in offs {
                    buf[k] += a * Complex64::from_polar(1.0, e2 * t);
                }
                self.transform(&mut buf);
                buf
            })
            .collect()
    }

    /// Physical position (wrapped to the torus) of coarse sample `index` at time `t`.
    pub fn position(&self, index: usize, t: f64) -> [f64; 2] {
        let dy = self.period / self.points as f64;
        let wrap = |v: f64| v - self.period * ((v + 0.5 * self.period) / self.period).floor();
        let y = |j: usize| -0.5 * self.period + j as f64 * dy;
        match self.dim {
            1 => [wrap(y(index) - 2.0 * self.center[0] * t), 0.0],
            _ => [
                wrap(y(index / self.points) - 2.0 * self.center[0] * t),
                wrap(y(index % self.points) - 2.0 * self.center[1] * t),
            ],
        }
    }

    fn transform(&self, buf: &mut [Complex64]) {
        let n = self.points;
        if self.dim == 1 {
            self.fft.process(buf);
            return;
        }
        for row in buf.chunks_mut(n) {
            self.fft.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                column[i] = buf[i * n + j];
            }
            self.fft.process(&mut column);
            for i in 0..n {
                buf[i * n + j] = column[i];
            }
        }
    }
}

fn modes(grid: &crate::field::GridSpec, index: usize) -> [i64; 2] {
    match grid.dim {
        1 => [grid.signed_mode(index), 0],
        _ => [grid.signed_mode(index / grid.nx), grid.signed_mode(index % grid.nx)],
    }
}

/// `|z|^e`, exact for even integer exponents.
pub(crate) fn power(z: Complex64, e: f64) -> f64 {
    let n2 = z.norm_sqr();
    if e == 6.0 {
        n2 * n2 * n2
    } else if e == 2.0 {
        n2
    } else if (e / 2.0).fract() == 0.0 && e > 0.0 {
        n2.powi((e / 2.0) as i32)
    } else {
        n2.sqrt().powf(e)
    }
}

/// Binned space-time integrals `sum_bins int prod_i |e^{it Delta} f_i|^{e_i}` over
/// midpoint time rows on `[t0, t1]`. `classify(x, t)` returns the bin of a point or
/// `None` to skip it. Rows are evaluated in parallel and reduced in time order.
pub fn binned_power_sums(
    fields: &[&SpectralField],
    exponents: &[f64],
    bins: usize,
    times: (f64, f64),
    classify: impl Fn([f64; 2], f64) -> Option<usize> + Sync,
) -> Result<Vec<f64>> {
    if fields.len() != exponents.len() {
        return Err(Error::InvalidParameter("one exponent per field is required".into()));
    }
    let band = Baseband::new(fields)?;
    let (t0, t1) = times;
    if !(t1 > t0) {
        return Err(Error::InvalidParameter("empty time interval".into()));
    }
    let rows = band.rows_for(t1 - t0);
    let dt = (t1 - t0) / rows as f64;
    let weight = band.cell_volume() * dt;
    let mut sums = vec![0.0; bins];
    let chunk = rayon::current_num_threads().max(1) * 2;
    let row_ids: Vec<usize> = (0..rows).collect();
    for block in row_ids.chunks(chunk) {
        let partial: Vec<Vec<f64>> = block
            .par_iter()
            .map(|&r| {
                let t = t0 + (r as f64 + 0.5) * dt;
                let g = band.row(t);
                let mut acc = vec![0.0; bins];
                for k in 0..g[0].len() {
                    if let Some(b) = classify(band.position(k, t), t) {
                        let mut v = 1.0;
                        for (gi, &e) in g.iter().zip(exponents) {
                            v *= power(gi[k], e);
                        }
                        acc[b] += v;
                    }
                }
                acc
            })
            .collect();
        for acc in partial {
            for (s, a) in sums.iter_mut().zip(acc) {
                *s += a;
            }
        }
    }
    sums.iter_mut().for_each(|s| *s *= weight);
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use num_complex::Complex64;

    #[test]
    fn baseband_modulus_matches_full_propagation() {
        let g = GridSpec::standard(1, 1024.0).unwrap();
        let dxi = g.dxi();
        let f = SpectralField::from_fn(g.clone(), |xi| {
            let d = (xi[0] - 0.6) / (6.0 * dxi);
            if d.abs() < 1.0 {
                Complex64::new(1.0 - d * d, d)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let band = Baseband::new(&[&f]).unwrap();
        assert!(band.points() < g.nx);
        let t = 37.5;
        let row = band.row(t);
        for k in (0..band.points()).step_by(3) {
            let x = band.position(k, t)[0];
            let direct: Complex64 = f
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let xi = g.wavenumber(i);
                    a * Complex64::from_polar(1.0, xi * x + xi * xi * t)
                })
                .sum::<Complex64>()
                / g.period;
            assert!((direct.norm() - row[0][k].norm()).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn full_period_sum_is_exact_for_l2() {
        let g = GridSpec::standard(2, 16.0).unwrap();
        let f = SpectralField::from_fn(g.clone(), |xi| {
            if (xi[0] - 0.3).hypot(xi[1] + 0.2) < 0.2 {
                Complex64::new(1.0, xi[0])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let sums = binned_power_sums(&[&f], &[2.0], 1, (0.0, 16.0), |_, _| Some(0)).unwrap();
        let expect = f.l2_norm().powi(2) * 16.0;
        assert!((sums[0] - expect).abs() < 1e-10 * expect);
    }
}

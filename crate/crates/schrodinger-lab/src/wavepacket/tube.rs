use super::{CoefficientSet, Tile, WavePacketFrame};
use crate::bump::bump;
use crate::field::{GridSpec, SpectralPlan, TimeGrid};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::TAU;
use std::sync::OnceLock;

/// Space-time tube `{0 <= t <= R, |x - c(nu) + 2 t c(theta)| <= R^{1/2 + delta}}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tube {
    pub tile: Tile,
    pub radius: f64,
    pub length: f64,
    pub delta: f64,
}

impl Tube {
    /// Core position at time `t`: `c(nu) - 2 t c(theta)`.
    pub fn axis_at(&self, t: f64) -> [f64; 2] {
        let c = self.tile.theta_center;
        let v = self.tile.nu_center;
        [v[0] - 2.0 * t * c[0], v[1] - 2.0 * t * c[1]]
    }

    /// Direction `G_0(theta) = (-2 c(theta), 1)` as a space-time vector `(x_1, x_2, t)`.
    pub fn direction(&self) -> [f64; 3] {
        let c = self.tile.theta_center;
        [-2.0 * c[0], -2.0 * c[1], 1.0]
    }

    /// Angle between the tube direction and the time axis.
    pub fn angle_to_time_axis(&self) -> f64 {
        let d = self.direction();
        (d[0] * d[0] + d[1] * d[1]).sqrt().atan2(1.0)
    }

    /// Spatial distance from `x` to the core at time `t`.
    pub fn distance_to_axis(&self, x: [f64; 2], t: f64) -> f64 {
        let a = self.axis_at(t);
        ((x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2)).sqrt()
    }

    pub fn contains(&self, x: [f64; 2], t: f64) -> bool {
        (0.0..=self.length).contains(&t) && self.distance_to_axis(x, t) <= self.radius
    }
}

/// Tube of a tile with radius `R^{1/2 + delta}`; `delta` must lie in `(0, 1/4)`.
pub fn tube_of(tile: &Tile, delta: f64) -> Result<Tube> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1/4)")));
    }
    Ok(Tube { tile: *tile, radius: tile.scale.powf(0.5 + delta), length: tile.scale, delta })
}

fn cutoff_profile(s: f64) -> f64 {
    const N: usize = 4000;
    let h = 2.0 / N as f64;
    (1..N)
        .map(|i| {
            let tau = -1.0 + i as f64 * h;
            bump(tau) * (TAU * s * tau).cos()
        })
        .sum::<f64>()
        * h
}

/// Temporal cutoff `psi(s)`: Fourier transform supported in `[-1, 1]` (cycle units),
/// centred at `s = 1/2` and scaled so that `psi >= 1/2` on `[0, 1]`.
pub fn temporal_cutoff(s: f64) -> f64 {
    static EDGE: OnceLock<f64> = OnceLock::new();
    let edge = *EDGE.get_or_init(|| cutoff_profile(0.5));
    cutoff_profile(s - 0.5) / (2.0 * edge)
}

/// Localisation diagnostics of one packet on `B(0,R) x [0,R]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeLocalization {
    /// Share of `int int |psi_{theta,nu}|^2` carried inside the tube.
    pub fraction: f64,
    /// Largest `|psi(t/R) psi_{theta,nu}(x,t)|` outside the doubled tube.
    pub exterior_max: f64,
    /// `int int |psi_{theta,nu}|^2` over the box.
    pub total_mass: f64,
}

fn axis_packet(frame: &WavePacketFrame, line: &GridSpec, theta: f64, nu: f64) -> Vec<Complex64> {
    (0..line.nx)
        .map(|k| {
            let xi = line.wavenumber(k);
            Complex64::from_polar(frame.axis_amplitude * frame.window(xi, theta), -xi * nu)
        })
        .collect()
}

/// Fraction of the packet's space-time mass inside its tube, plus the exterior maximum.
pub fn tube_mass_fraction(tile: &Tile, frame: &WavePacketFrame, delta: f64, times: &TimeGrid) -> Result<TubeLocalization> {
    let tube = tube_of(tile, delta)?;
    let grid = &frame.grid;
    if grid.dx() > 0.25 * grid.scale.sqrt() {
        return Err(Error::InvalidGrid("spatial step does not resolve R^{1/2}".into()));
    }
    let line = GridSpec { dim: 1, ..grid.clone() };
    let plan = SpectralPlan::new(&line)?;
    let axes: Vec<Vec<Complex64>> = (0..grid.dim)
        .map(|a| axis_packet(frame, &line, tile.theta_center[a], tile.nu_center[a]))
        .collect();
    let r = grid.scale;
    let inside_band: Vec<usize> = (0..line.nx).filter(|&i| line.coordinate(i).abs() <= r).collect();
    let per_slice: Vec<(f64, f64, f64)> = times
        .samples
        .par_iter()
        .map(|&t| {
            let slices: Vec<Vec<Complex64>> = axes.iter().map(|c| plan.to_physical(c, t)).collect();
            let cut = temporal_cutoff(t / r).abs();
            let axis = tube.axis_at(t);
            let (mut total, mut inside, mut ext) = (0.0, 0.0, 0.0f64);
            if grid.dim == 1 {
                for &i in &inside_band {
                    let x = line.coordinate(i);
                    let m = slices[0][i].norm_sqr();
                    let d = (x - axis[0]).abs();
                    total += m;
                    if d <= tube.radius {
                        inside += m;
                    } else if d > 2.0 * tube.radius {
                        ext = ext.max(cut * m.sqrt());
                    }
                }
            } else {
                for &i in &inside_band {
                    let x0 = line.coordinate(i);
                    let a = slices[0][i].norm_sqr();
                    for &j in &inside_band {
                        let x1 = line.coordinate(j);
                        if x0 * x0 + x1 * x1 > r * r {
                            continue;
                        }
                        let m = a * slices[1][j].norm_sqr();
                        let d = ((x0 - axis[0]).powi(2) + (x1 - axis[1]).powi(2)).sqrt();
                        total += m;
                        if d <= tube.radius {
                            inside += m;
                        } else if d > 2.0 * tube.radius {
                            ext = ext.max(cut * m.sqrt());
                        }
                    }
                }
            }
            (total, inside, ext)
        })
        .collect();
    let weight = times.weight * grid.cell_volume();
    let total: f64 = per_slice.iter().map(|s| s.0).sum::<f64>() * weight;
    let inside: f64 = per_slice.iter().map(|s| s.1).sum::<f64>() * weight;
    let exterior_max = per_slice.iter().map(|s| s.2).fold(0.0, f64::max);
    let fraction = if total > 0.0 { (inside / total).min(1.0) } else { 0.0 };
    Ok(TubeLocalization { fraction, exterior_max, total_mass: total })
}

/// Share of the space-time Fourier mass of `psi(t/R) psi_{theta,nu}` inside the cap
/// `{(xi, xi_3): xi in theta, |xi_3 - |xi|^2| <= C / R}` with `C` in cycle units.
///
/// The spatial transform is exact on the lattice; the temporal transform is a DFT
/// over `[-16R, 17R]`, long enough for the cutoff's tails to be negligible.
pub fn frequency_cap_check(tile: &Tile, frame: &WavePacketFrame, cap: f64) -> Result<f64> {
    if !(cap > 0.0) {
        return Err(Error::InvalidParameter("cap constant must be positive".into()));
    }
    let grid = &frame.grid;
    let r = grid.scale;
    let span = 33.0 * r;
    let n = (span.ceil() as usize).next_power_of_two();
    let dt = span / n as f64;
    let start = -16.0 * r;
    let cut: Vec<f64> = (0..n).map(|j| temporal_cutoff((start + j as f64 * dt) / r)).collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let half_width = 0.5 * frame.theta_width;
    let band = TAU * cap / r;
    let modes: Vec<([f64; 2], f64)> = (0..grid.points())
        .filter_map(|i| {
            let xi = grid.frequency(i);
            let w = frame.profile(tile, xi).norm_sqr();
            (w > 0.0).then_some((xi, w))
        })
        .collect();
    let per_mode: Vec<(f64, f64)> = modes
        .par_iter()
        .map(|&(xi, w)| {
            let omega = xi[0] * xi[0] + xi[1] * xi[1];
            let mut buf: Vec<Complex64> = cut
                .iter()
                .enumerate()
                .map(|(j, c)| Complex64::from_polar(*c, (start + j as f64 * dt) * omega))
                .collect();
            fft.process(&mut buf);
            let in_theta = (0..grid.dim).all(|a| (xi[a] - tile.theta_center[a]).abs() <= half_width);
            let (mut inside, mut total) = (0.0, 0.0);
            for (m, s) in buf.iter().enumerate() {
                let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                let freq = TAU * signed / (n as f64 * dt);
                let mass = s.norm_sqr();
                total += mass;
                if in_theta && (freq - omega).abs() <= band {
                    inside += mass;
                }
            }
            (w * inside / total, w)
        })
        .collect();
    let inside: f64 = per_mode.iter().map(|p| p.0).sum();
    let total: f64 = per_mode.iter().map(|p| p.1).sum();
    Ok(if total > 0.0 { inside / total } else { 0.0 })
}

/// Mass-weighted mean tube fraction over the retained tiles of a set: the share of the
/// packets' space-time mass that the tubes account for.
pub fn tube_coverage(set: &CoefficientSet, delta: f64, times: &TimeGrid) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (index, c) in set.iter() {
        let tile = set.tile(index);
        let loc = tube_mass_fraction(&tile, &set.frame, delta, times)?;
        let w = c.norm_sqr() * loc.total_mass;
        num += w * loc.fraction;
        den += w;
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::wavepacket::TileIndex;

    fn frame(dim: usize, r: f64) -> WavePacketFrame {
        WavePacketFrame::new(&GridSpec::standard(dim, r).unwrap(), 0.125).unwrap()
    }

    #[test]
    fn vertical_tube_for_zero_frequency() {
        let f = frame(1, 64.0);
        let tube = tube_of(&f.tile(TileIndex { theta: [0, 0], nu: [2, 0] }), 0.05).unwrap();
        for t in [0.0, 10.0, 64.0] {
            assert_eq!(tube.axis_at(t), tube.tile.nu_center);
        }
        assert_eq!(tube.angle_to_time_axis(), 0.0);
    }

    #[test]
    fn tilted_tube_endpoint() {
        let f = frame(2, 256.0);
        let mut tile = f.tile(TileIndex { theta: [0, 0], nu: [1, -1] });
        tile.theta_center = [0.5, 0.0];
        let tube = tube_of(&tile, 0.05).unwrap();
        let end = [tile.nu_center[0] - 256.0, tile.nu_center[1]];
        assert!(tube.contains(end, 256.0));
        assert_eq!(tube.axis_at(256.0), end);
        assert!(!tube.contains(end, 256.5));
        assert!(tube.angle_to_time_axis() <= 2f64.atan() + 1e-12);
    }

    #[test]
    fn delta_range_enforced() {
        let f = frame(1, 64.0);
        let tile = f.tile(TileIndex { theta: [0, 0], nu: [0, 0] });
        assert!(tube_of(&tile, 0.0).is_err());
        assert!(tube_of(&tile, 0.3).is_err());
    }

    #[test]
    fn cutoff_dominates_half_on_unit_interval() {
        for i in 0..=20 {
            assert!(temporal_cutoff(i as f64 / 20.0) >= 0.5 - 1e-12);
        }
        assert!(temporal_cutoff(20.0).abs() < 1e-5);
        assert!((temporal_cutoff(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cap_fraction_is_monotone_and_bounded() {
        let f = frame(1, 64.0);
        let tile = f.tile(TileIndex { theta: [3, 0], nu: [1, 0] });
        let a = frequency_cap_check(&tile, &f, 0.5).unwrap();
        let b = frequency_cap_check(&tile, &f, 1.0).unwrap();
        let c = frequency_cap_check(&tile, &f, 4.0).unwrap();
        assert!(a <= b && b <= c && c <= 1.0 + 1e-12);
        assert!(c > 0.99);
    }
}

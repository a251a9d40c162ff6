use super::{GridSpec, Region, SpectralField, SupportBall, TimeGrid};
use crate::{Error, Result};

/// Relative spectral mass allowed outside `B(center, 1/M)`.
pub const SUPPORT_TOLERANCE: f64 = 1e-6;

/// Affine change of variables `(x,t) -> (y,r) = (x/M + 2 t center / M, t / M^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescaleMap {
    pub dim: usize,
    /// Frequency centre, snapped to the source frequency lattice.
    pub center: [f64; 2],
    pub factor: f64,
}

impl RescaleMap {
    pub fn forward(&self, x: [f64; 2], t: f64) -> ([f64; 2], f64) {
        let m = self.factor;
        ([(x[0] + 2.0 * t * self.center[0]) / m, (x[1] + 2.0 * t * self.center[1]) / m], t / (m * m))
    }

    pub fn backward(&self, y: [f64; 2], r: f64) -> ([f64; 2], f64) {
        let m = self.factor;
        let t = m * m * r;
        ([m * y[0] - 2.0 * t * self.center[0], m * y[1] - 2.0 * t * self.center[1]], t)
    }

    /// Exponent `a` in `||e^{it Delta} f||_p = M^a ||e^{ir Delta} g||_p`, i.e. `(n+2)/p - n/2`.
    pub fn norm_exponent(&self, p: f64) -> f64 {
        let n = self.dim as f64;
        (n + 2.0) / p - n / 2.0
    }

    /// Time samples `r = t / M^2` matching the source samples one to one.
    pub fn image_times(&self, times: &TimeGrid) -> TimeGrid {
        times.scaled(1.0 / (self.factor * self.factor))
    }

    /// Samples of the image grid whose preimage (on the source torus) lies in `B(0, radius)`.
    pub fn image_region(&self, source: &GridSpec, image: &GridSpec, image_times: &TimeGrid, radius: f64) -> Region {
        let period = source.period;
        Region::from_predicate(image, image_times, |y, r| {
            let (x, _) = self.backward(y, r);
            let wrap = |v: f64| v - period * ((v + 0.5 * period) / period).floor();
            let (a, b) = (wrap(x[0]), if self.dim == 2 { wrap(x[1]) } else { 0.0 });
            (a * a + b * b).sqrt() <= radius
        })
    }
}

/// Parabolic rescaling of data supported in `B(center, 1/M)` to unit-band data `g`
/// with `ghat(eta) = M^{-n/2} fhat(center + eta / M)` on the torus of period `L / M`.
pub fn parabolic_rescale(field: &SpectralField, center: [f64; 2], factor: f64) -> Result<(SpectralField, RescaleMap)> {
    if !(factor >= 1.0) {
        return Err(Error::InvalidParameter(format!("rescaling factor {factor} must be >= 1")));
    }
    let grid = &field.grid;
    let ball = SupportBall { center, radius: 1.0 / factor };
    let leak = field.leak_outside(&ball);
    if leak > SUPPORT_TOLERANCE {
        return Err(Error::BadSupport { leak });
    }
    let dxi = grid.dxi();
    let shift = [(center[0] / dxi).round() as i64, if grid.dim == 2 { (center[1] / dxi).round() as i64 } else { 0 }];
    let snapped = [shift[0] as f64 * dxi, shift[1] as f64 * dxi];
    let image_grid = GridSpec {
        dim: grid.dim,
        scale: grid.scale / factor,
        period: grid.period / factor,
        nx: grid.nx,
        nt: grid.nt,
    };
    image_grid.validate()?;
    let amp = factor.powf(-(grid.dim as f64) / 2.0);
    let mut image = SpectralField::zeros(image_grid.clone());
    let n = grid.nx;
    for i in 0..image_grid.points() {
        let source = match grid.dim {
            1 => grid.mode_index(grid.signed_mode(i) + shift[0]),
            _ => {
                let a = grid.mode_index(grid.signed_mode(i / n) + shift[0]);
                let b = grid.mode_index(grid.signed_mode(i % n) + shift[1]);
                a * n + b
            }
        };
        image.coeffs[i] = field.coeffs[source] * amp;
    }
    image.support = Some(SupportBall::unit());
    Ok((image, RescaleMap { dim: grid.dim, center: snapped, factor }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn unit_factor_at_origin_is_identity() {
        let g = GridSpec::standard(1, 16.0).unwrap();
        let f = SpectralField::from_fn(g, |xi| Complex64::new((-30.0 * xi[0] * xi[0]).exp(), 0.0));
        let (img, map) = parabolic_rescale(&f, [0.0, 0.0], 1.0).unwrap();
        assert_eq!(img.coeffs, f.coeffs);
        assert_eq!(img.grid.period, f.grid.period);
        assert_eq!(map.forward([3.0, 0.0], 5.0), ([3.0, 0.0], 5.0));
    }

    #[test]
    fn map_round_trips() {
        let map = RescaleMap { dim: 2, center: [0.3, -0.2], factor: 4.0 };
        let (y, r) = map.forward([1.5, -7.0], 12.0);
        let (x, t) = map.backward(y, r);
        assert!((x[0] - 1.5).abs() < 1e-12 && (x[1] + 7.0).abs() < 1e-12 && (t - 12.0).abs() < 1e-12);
        assert!((map.norm_exponent(6.0) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn preserves_l2_norm() {
        let g = GridSpec::standard(2, 32.0).unwrap();
        let c = [0.2, 0.1];
        let f = SpectralField::from_fn(g, |xi| {
            let d = (xi[0] - c[0]).powi(2) + (xi[1] - c[1]).powi(2);
            Complex64::new((-d * 256.0).exp(), 0.0)
        });
        let (img, _) = parabolic_rescale(&f, c, 2.0).unwrap();
        assert!((img.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn leaking_support_rejected() {
        let g = GridSpec::standard(1, 16.0).unwrap();
        let f = SpectralField::from_fn(g, |xi| Complex64::new((-xi[0] * xi[0]).exp(), 0.0));
        assert!(matches!(parabolic_rescale(&f, [0.0, 0.0], 4.0), Err(Error::BadSupport { .. })));
    }
}

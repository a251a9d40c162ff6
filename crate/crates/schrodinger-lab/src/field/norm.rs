use super::{GridSpec, SpaceTimeField, TimeGrid};
use crate::{Error, Result};
use rayon::prelude::*;

/// Subset of the space-time sample lattice over which a norm is taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// `{|x| <= radius} x` all time samples.
    Ball { radius: f64 },
    /// The whole torus at every time sample.
    Everything,
    /// Explicit membership per sample, laid out like `SpaceTimeField::values`.
    Mask(Vec<bool>),
}

impl Region {
    /// `B(0,R) x [0,R]` for the grid's own scale.
    pub fn standard(grid: &GridSpec) -> Self {
        Region::Ball { radius: grid.scale }
    }

    /// Mask built from a predicate on `(position, time)`.
    pub fn from_predicate(grid: &GridSpec, times: &TimeGrid, mut keep: impl FnMut([f64; 2], f64) -> bool) -> Self {
        let mut mask = Vec::with_capacity(grid.points() * times.len());
        for x in 0..grid.points() {
            let p = grid.position(x);
            for &t in &times.samples {
                mask.push(keep(p, t));
            }
        }
        Region::Mask(mask)
    }

    fn row_in_ball(grid: &GridSpec, x: usize, radius: f64) -> bool {
        let p = grid.position(x);
        (p[0] * p[0] + p[1] * p[1]).sqrt() <= radius
    }

    /// Membership of sample `(x, j)` with `nt` time samples per column.
    pub fn contains(&self, grid: &GridSpec, nt: usize, x: usize, j: usize) -> bool {
        match self {
            Region::Ball { radius } => Self::row_in_ball(grid, x, *radius),
            Region::Everything => true,
            Region::Mask(m) => m[x * nt + j],
        }
    }

    /// Number of member samples.
    pub fn count(&self, grid: &GridSpec, nt: usize) -> usize {
        match self {
            Region::Ball { radius } => (0..grid.points()).filter(|&x| Self::row_in_ball(grid, x, *radius)).count() * nt,
            Region::Everything => grid.points() * nt,
            Region::Mask(m) => m.iter().filter(|&&b| b).count(),
        }
    }
}

/// Exponents and domain of an `L^p_x L^q_t` norm. Infinite exponents are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedNormParams {
    pub p: f64,
    pub q: f64,
    pub region: Region,
}

impl MixedNormParams {
    pub fn new(p: f64, q: f64, region: Region) -> Result<Self> {
        if !(p >= 1.0) || !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!("exponents must be >= 1, got p = {p}, q = {q}")));
        }
        Ok(Self { p, q, region })
    }
}

/// `(int_x (int_t |u|^q dt)^{p/q} dx)^{1/p}` over the region, midpoint quadrature.
///
/// Values are rescaled by their maximum before powering so large exponents neither
/// underflow nor overflow. `q = inf` takes the per-x maximum over member time samples.
pub fn mixed_norm(u: &SpaceTimeField, params: &MixedNormParams) -> Result<f64> {
    if !(params.p >= 1.0) || !(params.q >= 1.0) {
        return Err(Error::InvalidParameter("exponents must be >= 1".into()));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    let grid = &u.grid;
    let nt = u.nt();
    if params.region.count(grid, nt) == 0 {
        return Err(Error::EmptyRegion);
    }
    let member = |x: usize, j: usize| params.region.contains(grid, nt, x, j);
    let peaks: Vec<f64> = (0..grid.points())
        .into_par_iter()
        .map(|x| (0..nt).filter(|&j| member(x, j)).map(|j| u.at(x, j).norm()).fold(0.0, f64::max))
        .collect();
    let peak = peaks.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let (p, q) = (params.p, params.q);
    let inner: Vec<Option<f64>> = (0..grid.points())
        .into_par_iter()
        .map(|x| {
            let mut any = false;
            let mut acc = 0.0f64;
            for j in (0..nt).filter(|&j| member(x, j)) {
                any = true;
                let v = u.at(x, j).norm() / peak;
                if q.is_infinite() {
                    acc = acc.max(v);
                } else {
                    acc += u.times.weight * v.powf(q);
                }
            }
            any.then(|| if q.is_infinite() { acc } else { acc.powf(1.0 / q) })
        })
        .collect();
    let dv = grid.cell_volume();
    let outer = if p.is_infinite() {
        inner.iter().flatten().copied().fold(0.0, f64::max)
    } else {
        inner.iter().flatten().map(|v| dv * v.powf(p)).sum::<f64>().powf(1.0 / p)
    };
    Ok(peak * outer)
}

/// Per-x supremum of `|u(x,t)|` over the time samples.
pub fn maximal_function(u: &SpaceTimeField) -> Result<Vec<f64>> {
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((0..u.grid.points())
        .map(|x| u.column(x).iter().map(|v| v.norm()).fold(0.0, f64::max))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn constant_field(dim: usize, r: f64, value: impl Fn([f64; 2], f64) -> f64) -> SpaceTimeField {
        let g = GridSpec::standard(dim, r).unwrap();
        let tg = g.time_grid();
        SpaceTimeField::from_fn(g, tg, |x, t| Complex64::new(value(x, t), 0.0))
    }

    #[test]
    fn constant_field_on_disc() {
        let r = 32.0;
        let u = constant_field(2, r, |_, _| 1.0);
        let g = &u.grid;
        let area = Region::standard(g).count(g, 1) as f64 * g.cell_volume();
        assert!((area / (PI * r * r) - 1.0).abs() < 0.02);
        for (p, q) in [(2.0, 3.0), (6.0, 6.0), (1.0, f64::INFINITY)] {
            let v = mixed_norm(&u, &MixedNormParams::new(p, q, Region::standard(g)).unwrap()).unwrap();
            let want = area.powf(1.0 / p) * if q.is_infinite() { 1.0 } else { r.powf(1.0 / q) };
            assert!((v / want - 1.0).abs() < 1e-12, "p={p} q={q}");
            let disc = (PI * r * r).powf(1.0 / p) * if q.is_infinite() { 1.0 } else { r.powf(1.0 / q) };
            assert!((v / disc - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn lower_half_indicator() {
        let r = 16.0;
        let u = constant_field(2, r, |_, t| if t < r / 2.0 { 1.0 } else { 0.0 });
        let g = &u.grid;
        let area = Region::standard(g).count(g, 1) as f64 * g.cell_volume();
        let v = mixed_norm(&u, &MixedNormParams::new(3.0, 2.0, Region::standard(g)).unwrap()).unwrap();
        let want = area.powf(1.0 / 3.0) * (r / 2.0).sqrt();
        assert!((v / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_region_is_an_error() {
        let u = constant_field(1, 8.0, |_, _| 1.0);
        let params = MixedNormParams::new(2.0, 2.0, Region::Ball { radius: -1.0 }).unwrap();
        assert!(matches!(mixed_norm(&u, &params), Err(Error::EmptyRegion)));
    }

    #[test]
    fn exponents_below_one_rejected() {
        assert!(MixedNormParams::new(0.5, 2.0, Region::Everything).is_err());
    }

    #[test]
    fn maximal_function_of_time_independent_field() {
        let u = constant_field(1, 8.0, |x, _| (x[0] * 0.1).sin());
        let m = maximal_function(&u).unwrap();
        for (x, v) in m.iter().enumerate() {
            assert_eq!(*v, u.at(x, 0).norm());
        }
    }

    #[test]
    fn maximal_function_of_linear_ramp() {
        let r = 8.0;
        let u = constant_field(1, r, |_, t| t / r);
        let nt = u.nt() as f64;
        for v in maximal_function(&u).unwrap() {
            assert!((v - 1.0).abs() <= 1.0 / nt);
        }
    }

    #[test]
    fn nan_rejected() {
        let u = constant_field(1, 8.0, |_, _| f64::NAN);
        assert!(matches!(maximal_function(&u), Err(Error::NonFinite)));
    }
}

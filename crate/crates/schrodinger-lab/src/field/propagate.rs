use super::{SpaceTimeField, SpectralField, SpectralPlan, TimeGrid};
use crate::Result;
use num_complex::Complex64;
use rayon::prelude::*;

/// Streaming evaluator of `e^{it Delta} f`, one spatial slice at a time.
pub struct Propagator<'a> {
    field: &'a SpectralField,
    plan: SpectralPlan,
}

impl<'a> Propagator<'a> {
    pub fn new(field: &'a SpectralField) -> Result<Self> {
        Ok(Self { field, plan: SpectralPlan::new(&field.grid)? })
    }

    /// Spatial samples of the solution at time `t`.
    pub fn slice(&self, t: f64) -> Vec<Complex64> {
        self.plan.to_physical(&self.field.coeffs, t)
    }

    /// Calls `visit(j, slice)` for every time sample, slices computed in parallel
    /// and delivered in time order.
    pub fn for_each_slice(&self, times: &TimeGrid, mut visit: impl FnMut(usize, &[Complex64])) {
        let threads = rayon::current_num_threads();
        if threads <= 1 {
            // A lone worker only adds a thread handoff per chunk.
            for (j, &t) in times.samples.iter().enumerate() {
                visit(j, &self.slice(t));
            }
            return;
        }
        let chunk = threads * 2;
        for (c, block) in times.samples.chunks(chunk).enumerate() {
            let slices: Vec<Vec<Complex64>> = block.par_iter().map(|&t| self.slice(t)).collect();
            for (k, s) in slices.iter().enumerate() {
                visit(c * chunk + k, s);
            }
        }
    }
}

/// Samples of the free Schrodinger solution `e^{it Delta} f` on the spatial grid at the given times.
pub fn propagate(field: &SpectralField, times: &TimeGrid) -> Result<SpaceTimeField> {
    let prop = Propagator::new(field)?;
    let np = field.grid.points();
    let nt = times.len();
    let mut values = vec![Complex64::new(0.0, 0.0); np * nt];
    prop.for_each_slice(times, |j, slice| {
        for (x, v) in slice.iter().enumerate() {
            values[x * nt + j] = *v;
        }
    });
    Ok(SpaceTimeField { grid: field.grid.clone(), times: times.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    #[test]
    fn single_mode_is_pure_phase() {
        let g = GridSpec::standard(1, 16.0).unwrap();
        let k = 3usize;
        let xi = g.wavenumber(k);
        let mut f = SpectralField::zeros(g.clone());
        f.coeffs[k] = Complex64::new(g.period, 0.0);
        let times = TimeGrid::midpoints(0.0, 16.0, 8);
        let u = propagate(&f, &times).unwrap();
        for x in 0..g.points() {
            let p = g.position(x)[0];
            for (j, &t) in times.samples.iter().enumerate() {
                let want = Complex64::from_polar(1.0, p * xi + t * xi * xi);
                assert!((u.at(x, j) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn time_zero_is_inverse_transform() {
        let g = GridSpec::standard(2, 8.0).unwrap();
        let f = SpectralField::from_fn(g.clone(), |xi| Complex64::new(xi[0].cos(), xi[1]));
        let u = propagate(&f, &TimeGrid::explicit(vec![0.0], 1.0)).unwrap();
        let direct = f.to_spatial().unwrap();
        let err: f64 = direct.iter().enumerate().map(|(x, v)| (u.at(x, 0) - v).norm_sqr()).sum();
        let norm: f64 = direct.iter().map(|v| v.norm_sqr()).sum();
        assert!((err / norm).sqrt() < 1e-10);
    }
}

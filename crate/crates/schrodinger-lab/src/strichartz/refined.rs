use super::eval::binned_power_sums;
use super::{strip_occupancy, CubeUnion};
use crate::field::{SpectralField, SupportBall};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest max/min ratio of per-cube norms still counted as essentially constant.
pub const UNIFORM_SPREAD: f64 = 4.0;

/// `int_Q prod_i |e^{it Delta} f_i|^{e_i}` for every cube `Q` of `y`, in cube order.
pub fn cube_power_sums(fields: &[&SpectralField], exponents: &[f64], y: &CubeUnion) -> Result<Vec<f64>> {
    if fields.iter().any(|f| f.grid.dim != y.spatial_dim) {
        return Err(Error::InvalidParameter("field and cube union dimensions differ".into()));
    }
    let index = y.index_map();
    let start = y.cubes.iter().next().map_or(0, |c| c.t) as f64 * y.side();
    let end = y.cubes.iter().next_back().map_or(0, |c| c.t + 1) as f64 * y.side();
    if y.is_empty() {
        return Ok(Vec::new());
    }
    binned_power_sums(fields, exponents, y.len(), (start.max(0.0), end), |x, t| {
        index.get(&y.cube_of(x, t)).copied()
    })
}

/// `||e^{it Delta} g||_{L^p(Q)}` for every cube of `y`.
pub fn cube_norms(g: &SpectralField, y: &CubeUnion, p: f64) -> Result<Vec<f64>> {
    Ok(cube_power_sums(&[g], &[p], y)?.into_iter().map(|s| s.powf(1.0 / p)).collect())
}

/// Largest over smallest entry (infinite when some entry vanishes).
pub fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(0.0, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Ingredients of the refined Strichartz ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedRatio {
    /// `||e^{it Delta} g||_{L^6(Y)} / (sigma^{-1/3} ||g||_2)`.
    pub ratio: f64,
    pub norm: f64,
    pub sigma: usize,
    pub l2: f64,
    /// Max/min of the per-cube `L^6` norms.
    pub cube_spread: f64,
    pub cube_norms: Vec<f64>,
}

/// Refined Strichartz ratio over the cube union `y`, with `sigma` its largest strip count.
/// Fails with `NonUniformCubes` when the per-cube `L^6` norms spread by more than
/// [`UNIFORM_SPREAD`].
pub fn refined_strichartz_ratio(g: &SpectralField, y: &CubeUnion) -> Result<RefinedRatio> {
    if y.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let sums = cube_power_sums(&[g], &[6.0], y)?;
    let cube_norms: Vec<f64> = sums.iter().map(|s| s.powf(1.0 / 6.0)).collect();
    let cube_spread = spread(&cube_norms);
    if !(cube_spread <= UNIFORM_SPREAD) {
        return Err(Error::NonUniformCubes { ratio: cube_spread });
    }
    let norm = sums.iter().sum::<f64>().powf(1.0 / 6.0);
    let sigma = strip_occupancy(y).sigma;
    let l2 = g.l2_norm();
    Ok(RefinedRatio { ratio: norm / ((sigma as f64).powf(-1.0 / 3.0) * l2), norm, sigma, l2, cube_spread, cube_norms })
}

/// Declared support ball, or the smallest lattice-aligned ball around the significant coefficients.
pub fn support_ball(f: &SpectralField) -> SupportBall {
    if let Some(b) = f.support {
        return b;
    }
    let peak = f.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pts: Vec<[f64; 2]> = (0..f.coeffs.len())
        .filter(|&i| peak > 0.0 && f.coeffs[i].norm() > super::eval::NEGLIGIBLE * peak)
        .map(|i| f.grid.frequency(i))
        .collect();
    if pts.is_empty() {
        return SupportBall { center: [0.0, 0.0], radius: 0.0 };
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &pts {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let radius = pts.iter().map(|p| (p[0] - center[0]).hypot(p[1] - center[1])).fold(0.0, f64::max);
    SupportBall { center, radius }
}

/// Ingredients of the bilinear refined ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearRatio {
    pub ratio: f64,
    /// `|| |u_1 u_2|^{1/2} ||_{L^6(Y)}`.
    pub norm: f64,
    /// Number of cubes in `Y`.
    pub cubes: usize,
    /// `1 / radius` of the smallest ball holding both supports.
    pub m: f64,
    /// Distance between the two supports.
    pub distance: f64,
    pub cube_spread: f64,
    /// `||u_i||_{L^6(Y)}` for the Holder comparison.
    pub linear_norms: [f64; 2],
}

/// `|| |e^{it Delta} f_1 e^{it Delta} f_2|^{1/2} ||_{L^6(Y)} / (M^{1/6} N^{-1/6} R^{-1/6} ||f_1||^{1/2} ||f_2||^{1/2})`
/// where `N = |Y|` in cubes and `B(xi_0, 1/M)` is the smallest ball holding both supports.
pub fn bilinear_refined_ratio(f1: &SpectralField, f2: &SpectralField, y: &CubeUnion, separation: f64) -> Result<BilinearRatio> {
    if y.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let (b1, b2) = (support_ball(f1), support_ball(f2));
    let gap = (b1.center[0] - b2.center[0]).hypot(b1.center[1] - b2.center[1]);
    let distance = gap - b1.radius - b2.radius;
    if distance < separation {
        return Err(Error::SeparationViolated { distance, required: separation });
    }
    let enclosing = 0.5 * (gap + b1.radius + b2.radius);
    let m = 1.0 / enclosing;
    let bil = cube_power_sums(&[f1, f2], &[3.0, 3.0], y)?;
    let cube_bil: Vec<f64> = bil.iter().map(|s| s.powf(1.0 / 6.0)).collect();
    let cube_spread = spread(&cube_bil);
    if !(cube_spread <= UNIFORM_SPREAD) {
        return Err(Error::NonUniformCubes { ratio: cube_spread });
    }
    let norm = bil.iter().sum::<f64>().powf(1.0 / 6.0);
    let lin1 = cube_power_sums(&[f1], &[6.0], y)?.iter().sum::<f64>().powf(1.0 / 6.0);
    let lin2 = cube_power_sums(&[f2], &[6.0], y)?.iter().sum::<f64>().powf(1.0 / 6.0);
    let n = y.len() as f64;
    let scale = y.scale;
    let denom = m.powf(1.0 / 6.0) * n.powf(-1.0 / 6.0) * scale.powf(-1.0 / 6.0) * (f1.l2_norm() * f2.l2_norm()).sqrt();
    Ok(BilinearRatio {
        ratio: norm / denom,
        norm,
        cubes: y.len(),
        m,
        distance,
        cube_spread,
        linear_norms: [lin1, lin2],
    })
}

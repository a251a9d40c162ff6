use super::eval::Baseband;
use super::{strip_occupancy, CubeUnion};
use crate::field::SpectralField;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Cubes of the full lattice whose centre lies within `radius` of the line
/// `x = x0 + velocity t` (one spatial dimension, or the first axis in two).
pub fn tube_cubes(spatial_dim: usize, scale: f64, x0: [f64; 2], velocity: [f64; 2], radius: f64) -> Result<CubeUnion> {
    CubeUnion::from_centers(spatial_dim, scale, |x, t| {
        let d0 = x[0] - x0[0] - velocity[0] * t;
        let d1 = if spatial_dim == 2 { x[1] - x0[1] - velocity[1] * t } else { 0.0 };
        d0.hypot(d1) <= radius
    })
}

/// `|Y_box ∩ Y|` against `(sigma_box / sigma) |Y|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripBound {
    pub intersection: usize,
    pub sigma_box: usize,
    pub sigma: usize,
    pub bound: f64,
    /// `intersection / bound`.
    pub ratio: f64,
}

/// Counts `|Y_box ∩ Y|` and compares it with `(sigma_box / sigma) |Y|`, where
/// `sigma_box` is the largest strip count of `Y_box` and `sigma` that of `Y`.
pub fn strip_bound(y: &CubeUnion, y_box: &CubeUnion) -> Result<StripBound> {
    if y.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let intersection = y.intersection(y_box).len();
    let sigma_box = strip_occupancy(y_box).sigma;
    let sigma = strip_occupancy(y).sigma;
    let bound = sigma_box as f64 / sigma as f64 * y.len() as f64;
    let ratio = if bound > 0.0 { intersection as f64 / bound } else { 0.0 };
    Ok(StripBound { intersection, sigma_box, sigma, bound, ratio })
}

/// Cubes shared by two families against the product of their strip counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseOverlap {
    pub shared: usize,
    pub sigma_first: usize,
    pub sigma_second: usize,
    /// `shared / (sigma_first sigma_second)`.
    pub ratio: f64,
}

pub fn transverse_overlap(first: &CubeUnion, second: &CubeUnion) -> TransverseOverlap {
    let shared = first.intersection(second).len();
    let sigma_first = strip_occupancy(first).sigma;
    let sigma_second = strip_occupancy(second).sigma;
    let product = (sigma_first * sigma_second) as f64;
    TransverseOverlap { shared, sigma_first, sigma_second, ratio: if product > 0.0 { shared as f64 / product } else { 0.0 } }
}

/// Sup-versus-average comparison of `|e^{it Delta} f_1 e^{it Delta} f_2|` on dual rectangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocallyConstant {
    /// Largest `sup_A / (avg_{E A} + tail)` over the tiled rectangles.
    pub worst_ratio: f64,
    pub rectangles: usize,
    /// Rectangle sides in the moving frame `(x + 2 c t, t)`.
    pub sides: [f64; 2],
    pub enlargement: f64,
}

/// Tiles `[-R/2, R/2] x [0, R]` (moving frame of the common frequency centre `c`) with
/// rectangles dual to the joint support, of sides `pi / rho` and `pi / rho^2`, and
/// compares the supremum of `|u_1 u_2|` on each rectangle with its average over the
/// rectangle enlarged by `enlargement`, plus `tail ||f_1|| ||f_2||`.
pub fn locally_constant_check(
    f1: &SpectralField,
    f2: &SpectralField,
    enlargement: f64,
    tail: f64,
) -> Result<LocallyConstant> {
    if f1.grid.dim != 1 {
        return Err(Error::InvalidParameter("the locally-constant check runs in one spatial dimension".into()));
    }
    if !(enlargement >= 1.0) {
        return Err(Error::InvalidParameter(format!("enlargement {enlargement} must be >= 1")));
    }
    let r = f1.grid.scale;
    let band = Baseband::new(&[f1, f2])?;
    let rho = band.radius.max(f1.grid.dxi());
    let sides = [std::f64::consts::PI / rho, std::f64::consts::PI / (rho * rho)];
    let n = band.points();
    let dy = f1.grid.period / n as f64;
    let per_side = [(sides[0] / dy).ceil().max(1.0) as usize, 8usize];
    let dt = sides[1] / per_side[1] as f64;
    let rows = (r / dt).floor() as usize;
    // |g_1 g_2| on the moving-frame lattice restricted to |y| <= R.
    let y0 = ((0.5 * f1.grid.period - r) / dy).floor() as usize;
    let cols = ((2.0 * r) / dy).floor() as usize;
    let mut field = vec![0.0; rows * cols];
    for j in 0..rows {
        let g = band.row((j as f64 + 0.5) * dt);
        for k in 0..cols {
            field[j * cols + k] = (g[0][y0 + k] * g[1][y0 + k]).norm();
        }
    }
    let at = |j: usize, k: usize| field[j * cols + k];
    let floor = tail * f1.l2_norm() * f2.l2_norm();
    let grow = [((enlargement - 1.0) * 0.5 * per_side[0] as f64).ceil() as usize, ((enlargement - 1.0) * 0.5 * per_side[1] as f64).ceil() as usize];
    // Rectangles cover |y| <= R/2, t in [0, R], with room for the enlargement.
    let k_start = ((0.5 * r) / dy) as usize;
    let k_end = ((1.5 * r) / dy) as usize;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut j = grow[1];
    while j + per_side[1] + grow[1] <= rows {
        let mut k = k_start.max(grow[0]);
        while k + per_side[0] + grow[0] <= k_end.min(cols) {
            let mut sup: f64 = 0.0;
            for a in j..j + per_side[1] {
                for b in k..k + per_side[0] {
                    sup = sup.max(at(a, b));
                }
            }
            let mut sum = 0.0;
            let mut cells = 0usize;
            for a in j - grow[1]..j + per_side[1] + grow[1] {
                for b in k - grow[0]..k + per_side[0] + grow[0] {
                    sum += at(a, b);
                    cells += 1;
                }
            }
            worst = worst.max(sup / (sum / cells as f64 + floor));
            count += 1;
            k += per_side[0];
        }
        j += per_side[1];
    }
    if count == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(LocallyConstant { worst_ratio: worst, rectangles: count, sides, enlargement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strichartz::CubeIndex;

    #[test]
    fn vertical_tube_has_one_cube_per_strip() {
        let y = tube_cubes(1, 256.0, [32.0, 0.0], [0.0, 0.0], 8.0).unwrap();
        assert_eq!(y.len(), 16);
        assert!(y.cubes.iter().all(|c| c.x[0] == 2));
    }

    #[test]
    fn strip_bound_by_hand() {
        let y = CubeUnion::new(1, 64.0, (0..8).flat_map(|t| (0..4).map(move |a| CubeIndex { t, x: [a, 0] }))).unwrap();
        let b = CubeUnion::new(1, 64.0, (0..8).map(|t| CubeIndex { t, x: [1, 0] })).unwrap();
        let s = strip_bound(&y, &b).unwrap();
        assert_eq!((s.intersection, s.sigma_box, s.sigma), (8, 1, 4));
        assert!((s.ratio - 1.0).abs() < 1e-15);
    }
}

use crate::field::SpaceTimeField;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Nonnegative space-time weight sampled on a product of spatial points and times.
///
/// `values` is point-major: `values[i * times.len() + j]` is the weight at
/// `(points[i], times[j])`. The mixed mass `||W||_{L^1_x L^r_t}` uses the quadrature
/// weights `point_weight` (spatial cell volume) and `time_weight`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassField {
    pub spatial_dim: usize,
    pub points: Vec<[f64; 2]>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub point_weight: f64,
    pub time_weight: f64,
}

impl MassField {
    pub fn new(
        spatial_dim: usize,
        points: Vec<[f64; 2]>,
        times: Vec<f64>,
        values: Vec<f64>,
        point_weight: f64,
        time_weight: f64,
    ) -> Result<Self> {
        if values.len() != points.len() * times.len() {
            return Err(Error::InvalidParameter("mass values do not match the sample lattice".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter("mass must be nonnegative".into()));
        }
        Ok(Self { spatial_dim, points, times, values, point_weight, time_weight })
    }

    /// Weight `f(x, t)` on a uniform lattice of the box `[-half_width, half_width]^n x [0, duration]`
    /// with `per_axis` cell-centred points per spatial axis and `nt` cell-centred times.
    pub fn on_box(
        spatial_dim: usize,
        half_width: f64,
        duration: f64,
        per_axis: usize,
        nt: usize,
        mut f: impl FnMut([f64; 2], f64) -> f64,
    ) -> Result<Self> {
        let h = 2.0 * half_width / per_axis as f64;
        let axis: Vec<f64> = (0..per_axis).map(|i| -half_width + (i as f64 + 0.5) * h).collect();
        let points: Vec<[f64; 2]> = if spatial_dim == 1 {
            axis.iter().map(|&x| [x, 0.0]).collect()
        } else {
            axis.iter().flat_map(|&a| axis.iter().map(move |&b| [a, b])).collect()
        };
        let dt = duration / nt as f64;
        let times: Vec<f64> = (0..nt).map(|j| (j as f64 + 0.5) * dt).collect();
        let values = points.iter().flat_map(|&x| times.iter().map(move |&t| (x, t))).map(|(x, t)| f(x, t)).collect();
        Self::new(spatial_dim, points, times, values, h.powi(spatial_dim as i32), dt)
    }

    /// `|u|^exponent` restricted to `B(0,R) x [0,R]`, block-averaged over `stride` samples
    /// per axis (space and time) to keep the partition solver tractable.
    pub fn from_solution(u: &SpaceTimeField, exponent: f64, stride: usize) -> Result<Self> {
        let grid = &u.grid;
        let stride = stride.max(1);
        let r = grid.scale;
        let nt = u.nt();
        let blocks_t = nt / stride;
        let blocks_x = grid.nx / stride;
        if blocks_t == 0 || blocks_x == 0 {
            return Err(Error::InvalidParameter("stride exceeds the grid".into()));
        }
        let block_time = |b: usize| u.times.samples[b * stride..(b + 1) * stride].iter().sum::<f64>() / stride as f64;
        let times: Vec<f64> = (0..blocks_t).map(block_time).collect();
        let coord = |b: usize| (0..stride).map(|i| grid.coordinate(b * stride + i)).sum::<f64>() / stride as f64;
        let spatial_blocks: Vec<Vec<usize>> = if grid.dim == 1 {
            (0..blocks_x).map(|b| vec![b]).collect()
        } else {
            (0..blocks_x).flat_map(|a| (0..blocks_x).map(move |b| vec![a, b])).collect()
        };
        let mut points = Vec::new();
        let mut values = Vec::new();
        for block in spatial_blocks {
            let centre = [coord(block[0]), block.get(1).map_or(0.0, |&b| coord(b))];
            if centre[0].hypot(centre[1]) > r {
                continue;
            }
            let members: Vec<usize> = if grid.dim == 1 {
                (0..stride).map(|i| block[0] * stride + i).collect()
            } else {
                let (a, b, nx) = (block[0], block[1], grid.nx);
                (0..stride).flat_map(|i| (0..stride).map(move |k| (a * stride + i) * nx + b * stride + k)).collect()
            };
            points.push(centre);
            for b in 0..blocks_t {
                let mut acc = 0.0;
                for &m in &members {
                    for j in b * stride..(b + 1) * stride {
                        acc += u.at(m, j).norm().powf(exponent);
                    }
                }
                values.push(acc / (members.len() * stride) as f64);
            }
        }
        let point_weight = (grid.dx() * stride as f64).powi(grid.dim as i32);
        let time_weight = u.times.weight * stride as f64;
        Self::new(grid.dim, points, times, values, point_weight, time_weight)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Space-time coordinates `(x_1, .., x_n, t)` of sample `index`.
    pub fn sample_point(&self, index: usize) -> Vec<f64> {
        let nt = self.times.len();
        let x = self.points[index / nt];
        let t = self.times[index % nt];
        if self.spatial_dim == 1 {
            vec![x[0], t]
        } else {
            vec![x[0], x[1], t]
        }
    }

    /// `||chi W||_{L^1_x L^r_t}` with `chi` the optional sample mask.
    pub fn mixed_mass(&self, r: f64, mask: Option<&[bool]>) -> f64 {
        let nt = self.times.len();
        let mut total = 0.0;
        for (i, row) in self.values.chunks(nt).enumerate() {
            let mut acc = 0.0;
            for (j, &v) in row.iter().enumerate() {
                if mask.map_or(true, |m| m[i * nt + j]) {
                    acc += v.powf(r);
                }
            }
            total += (acc * self.time_weight).powf(1.0 / r);
        }
        total * self.point_weight
    }

    /// Copy with the weight zeroed outside the mask.
    pub fn masked(&self, mask: &[bool]) -> Self {
        let values = self.values.iter().zip(mask).map(|(&v, &keep)| if keep { v } else { 0.0 }).collect();
        Self { values, ..self.clone() }
    }

    /// Axis-aligned bounding box of the sample lattice, as (lower, upper) corners.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let vars = self.spatial_dim + 1;
        let mut lo = vec![f64::INFINITY; vars];
        let mut hi = vec![f64::NEG_INFINITY; vars];
        for x in &self.points {
            for a in 0..self.spatial_dim {
                lo[a] = lo[a].min(x[a]);
                hi[a] = hi[a].max(x[a]);
            }
        }
        for &t in &self.times {
            lo[vars - 1] = lo[vars - 1].min(t);
            hi[vars - 1] = hi[vars - 1].max(t);
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_mass_matches_nested_loop() {
        let w = MassField::on_box(1, 2.0, 3.0, 4, 5, |x, t| (x[0] + 3.0) * t).unwrap();
        let r = 2.0;
        let mut expect = 0.0;
        for i in 0..4 {
            let mut s = 0.0;
            for j in 0..5 {
                s += w.values[i * 5 + j].powi(2) * w.time_weight;
            }
            expect += s.sqrt() * w.point_weight;
        }
        assert!((w.mixed_mass(r, None) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn uniform_box_has_volume_mass() {
        let w = MassField::on_box(2, 1.0, 2.0, 8, 4, |_, _| 1.0).unwrap();
        assert!((w.mixed_mass(1.0, None) - 8.0).abs() < 1e-12);
        assert_eq!(w.sample_point(5), vec![-0.875, -0.625, 0.75]);
    }

    #[test]
    fn rejects_negative_mass() {
        assert!(MassField::on_box(1, 1.0, 1.0, 2, 2, |_, _| -1.0).is_err());
    }
}

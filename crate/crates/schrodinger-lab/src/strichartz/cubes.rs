use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Lattice `R^{1/2}`-cube: spatial axis `a` covers `[(x_a - 1/2) s, (x_a + 1/2) s)` and
/// time covers `[t s, (t + 1) s)`, with `s = R^{1/2}`. Unused spatial axes are 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeIndex {
    pub t: i64,
    pub x: [i64; 2],
}

/// Union `Y` of lattice `R^{1/2}`-cubes with its per-strip occupancy.
///
/// Strip `k` is `R^n x [k s, (k + 1) s)`; every cube lies in exactly one strip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeUnion {
    pub spatial_dim: usize,
    pub scale: f64,
    pub cubes: BTreeSet<CubeIndex>,
    pub per_strip_counts: BTreeMap<i64, usize>,
}

/// Strip histogram of a cube union.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripOccupancy {
    /// Largest per-strip count.
    pub sigma: usize,
    /// Smallest count over occupied strips.
    pub min_count: usize,
    pub histogram: BTreeMap<i64, usize>,
    /// Every occupied strip holds at least `sigma / 2` cubes.
    pub uniform: bool,
}

impl CubeUnion {
    pub fn new(spatial_dim: usize, scale: f64, cubes: impl IntoIterator<Item = CubeIndex>) -> Result<Self> {
        if !(1..=2).contains(&spatial_dim) {
            return Err(Error::InvalidParameter(format!("spatial dimension {spatial_dim}")));
        }
        if !(scale >= 1.0) {
            return Err(Error::InvalidParameter(format!("scale {scale} must be >= 1")));
        }
        let mut y = Self { spatial_dim, scale, cubes: BTreeSet::new(), per_strip_counts: BTreeMap::new() };
        for c in cubes {
            y.insert(c);
        }
        Ok(y)
    }

    /// Every lattice cube whose centre lies in `B(0,R) x [0,R]`.
    pub fn full(spatial_dim: usize, scale: f64) -> Result<Self> {
        let s = scale.sqrt();
        let columns = (scale / s).floor() as i64;
        let strips = (scale / s).ceil() as i64;
        let mut cubes = Vec::new();
        for t in 0..strips {
            for a in -columns..=columns {
                if spatial_dim == 1 {
                    cubes.push(CubeIndex { t, x: [a, 0] });
                } else {
                    for b in -columns..=columns {
                        if ((a * a + b * b) as f64).sqrt() * s <= scale {
                            cubes.push(CubeIndex { t, x: [a, b] });
                        }
                    }
                }
            }
        }
        Self::new(spatial_dim, scale, cubes)
    }

    /// Cubes whose centre satisfies the predicate, among those of [`CubeUnion::full`].
    pub fn from_centers(spatial_dim: usize, scale: f64, mut keep: impl FnMut([f64; 2], f64) -> bool) -> Result<Self> {
        let full = Self::full(spatial_dim, scale)?;
        let chosen: Vec<CubeIndex> = full.cubes.iter().copied().filter(|&c| {
            let (x, t) = full.center(c);
            keep(x, t)
        }).collect();
        Self::new(spatial_dim, scale, chosen)
    }

    /// Cube side `R^{1/2}`.
    pub fn side(&self) -> f64 {
        self.scale.sqrt()
    }

    /// Adds a cube; returns whether it was new.
    pub fn insert(&mut self, cube: CubeIndex) -> bool {
        let cube = if self.spatial_dim == 1 { CubeIndex { x: [cube.x[0], 0], ..cube } } else { cube };
        let fresh = self.cubes.insert(cube);
        if fresh {
            *self.per_strip_counts.entry(cube.t).or_insert(0) += 1;
        }
        fresh
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Cube containing `(x, t)`.
    pub fn cube_of(&self, x: [f64; 2], t: f64) -> CubeIndex {
        let s = self.side();
        let xi = |v: f64| (v / s + 0.5).floor() as i64;
        let x1 = if self.spatial_dim == 2 { xi(x[1]) } else { 0 };
        CubeIndex { t: (t / s).floor() as i64, x: [xi(x[0]), x1] }
    }

    /// Centre of a cube.
    pub fn center(&self, c: CubeIndex) -> ([f64; 2], f64) {
        let s = self.side();
        let x1 = if self.spatial_dim == 2 { c.x[1] as f64 * s } else { 0.0 };
        ([c.x[0] as f64 * s, x1], (c.t as f64 + 0.5) * s)
    }

    pub fn contains_cube(&self, c: CubeIndex) -> bool {
        self.cubes.contains(&c)
    }

    pub fn contains(&self, x: [f64; 2], t: f64) -> bool {
        self.cubes.contains(&self.cube_of(x, t))
    }

    /// Position of every cube in iteration order, for binning.
    pub fn index_map(&self) -> HashMap<CubeIndex, usize> {
        self.cubes.iter().enumerate().map(|(i, &c)| (c, i)).collect()
    }

    pub fn intersection(&self, other: &CubeUnion) -> CubeUnion {
        let cubes = self.cubes.intersection(&other.cubes).copied();
        CubeUnion::new(self.spatial_dim, self.scale, cubes).expect("parameters already validated")
    }

    pub fn union(&self, other: &CubeUnion) -> CubeUnion {
        let cubes = self.cubes.union(&other.cubes).copied();
        CubeUnion::new(self.spatial_dim, self.scale, cubes).expect("parameters already validated")
    }
}

/// Per-strip counts `sigma` and the `~ sigma` uniformity flag.
pub fn strip_occupancy(y: &CubeUnion) -> StripOccupancy {
    let sigma = y.per_strip_counts.values().copied().max().unwrap_or(0);
    let min_count = y.per_strip_counts.values().copied().min().unwrap_or(0);
    StripOccupancy {
        sigma,
        min_count,
        histogram: y.per_strip_counts.clone(),
        uniform: 2 * min_count >= sigma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cube_per_strip() {
        let y = CubeUnion::new(1, 1024.0, (0..32).map(|t| CubeIndex { t, x: [t % 5, 0] })).unwrap();
        let occ = strip_occupancy(&y);
        assert_eq!(occ.sigma, 1);
        assert!(occ.uniform);
        assert_eq!(occ.histogram.len(), 32);
    }

    #[test]
    fn full_grid_has_sigma_equal_to_columns() {
        let y = CubeUnion::full(1, 256.0).unwrap();
        let occ = strip_occupancy(&y);
        assert_eq!(occ.sigma, 33);
        assert_eq!(occ.min_count, 33);
        assert_eq!(y.len(), 33 * 16);
    }

    #[test]
    fn duplicates_are_ignored_and_points_map_to_cubes() {
        let mut y = CubeUnion::new(1, 64.0, []).unwrap();
        assert!(y.insert(CubeIndex { t: 1, x: [2, 7] }));
        assert!(!y.insert(CubeIndex { t: 1, x: [2, 0] }));
        assert_eq!(y.len(), 1);
        assert!(y.contains([16.0 - 3.9, 0.0], 8.0));
        assert!(!y.contains([20.0, 0.0], 8.0));
        assert_eq!(y.cube_of([-4.0, 0.0], 0.0), CubeIndex { t: 0, x: [0, 0] });
        assert_eq!(y.cube_of([-4.01, 0.0], 0.0), CubeIndex { t: 0, x: [-1, 0] });
    }
}

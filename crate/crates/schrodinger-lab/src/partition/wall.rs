use super::PartitionPolynomial;
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::HashMap;

/// Axis-aligned box in space-time `(x_1, .., x_n, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter("box corners are not ordered".into()));
        }
        Ok(Self { lower, upper })
    }

    /// `[-R, R]^n x [0, R]`, the bounding box of `B(0,R) x [0,R]`.
    pub fn space_time(spatial_dim: usize, r: f64) -> Self {
        let mut lower = vec![-r; spatial_dim];
        let mut upper = vec![r; spatial_dim];
        lower.push(0.0);
        upper.push(r);
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (a, b))| *x >= *a && *x <= *b)
    }

    pub fn enlarged(&self, by: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|a| a - by).collect(),
            upper: self.upper.iter().map(|b| b + by).collect(),
        }
    }

    /// Parameter interval `[s_0, s_1]` on which `origin + s direction` lies in the box.
    pub fn clip(&self, origin: &[f64], direction: &[f64]) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..self.dim() {
            let (o, d) = (origin[i], direction[i]);
            if d == 0.0 {
                if o < self.lower[i] || o > self.upper[i] {
                    return None;
                }
                continue;
            }
            let a = (self.lower[i] - o) / d;
            let b = (self.upper[i] - o) / d;
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        (lo < hi).then_some((lo, hi))
    }
}

/// Sampled point of `Z(P_k)` with its gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroPoint {
    pub position: Vec<f64>,
    pub factor: usize,
    /// Gradient of the factor in physical coordinates (normal to the zero set).
    pub normal: Vec<f64>,
    /// `|grad P_k|` in the normalised coordinates the factor is stored in.
    pub gradient_norm: f64,
}

/// Sample the zero set of every factor by marching over a lattice of the box: every
/// lattice edge whose endpoint values change sign contributes its linearly interpolated
/// crossing. The result is within `spacing` of the true zero set wherever the factor
/// changes sign across a lattice edge.
pub fn sample_zero_set(p: &PartitionPolynomial, domain: &DomainBox, spacing: f64) -> Vec<ZeroPoint> {
    let dim = domain.dim();
    let counts: Vec<usize> = (0..dim)
        .map(|a| ((domain.upper[a] - domain.lower[a]) / spacing).ceil() as usize + 1)
        .collect();
    let steps: Vec<f64> = (0..dim).map(|a| (domain.upper[a] - domain.lower[a]) / (counts[a] - 1) as f64).collect();
    let strides: Vec<usize> = (0..dim).map(|a| counts[a + 1..].iter().product()).collect();
    let total: usize = counts.iter().product();
    let node = |index: usize| -> Vec<f64> {
        (0..dim).map(|a| domain.lower[a] + (index / strides[a] % counts[a]) as f64 * steps[a]).collect()
    };
    let mut out = Vec::new();
    for k in 0..p.factors.len() {
        let values: Vec<f64> = (0..total).into_par_iter().map(|i| p.factor_value(k, &node(i))).collect();
        let found: Vec<Vec<f64>> = (0..total)
            .into_par_iter()
            .flat_map_iter(|i| {
                let v0 = values[i];
                let here = node(i);
                let mut pts = Vec::new();
                if v0 == 0.0 {
                    pts.push(here.clone());
                }
                for a in 0..dim {
                    if (i / strides[a] % counts[a]) + 1 >= counts[a] {
                        continue;
                    }
                    let v1 = values[i + strides[a]];
                    if v0 != 0.0 && v1 != 0.0 && (v0 > 0.0) != (v1 > 0.0) {
                        let s = v0 / (v0 - v1);
                        let mut q = here.clone();
                        q[a] += s * steps[a];
                        pts.push(q);
                    }
                }
                pts
            })
            .collect();
        out.extend(found.into_iter().map(|position| {
            let normal = p.factor_gradient(k, &position);
            let gradient_norm = normal.iter().map(|g| g * g).sum::<f64>().sqrt() * p.scale;
            ZeroPoint { position, factor: k, normal, gradient_norm }
        }));
    }
    out
}

/// The `width`-neighbourhood of the sampled zero set inside `B(0,R) x [0,R]`.
#[derive(Clone, Debug)]
pub struct Wall {
    pub polynomial: PartitionPolynomial,
    pub width: f64,
    /// Lattice spacing used to sample the zero set.
    pub resolution: f64,
    /// Spatial radius `R` of the ball `B(0,R)`; times run over `[0, R]`.
    pub radius: f64,
    pub zeros: Vec<ZeroPoint>,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl Wall {
    /// Wall of the given width; the zero set is sampled at `width / 8` on the box enlarged
    /// by `width` so that zeros just outside the ball still count.
    pub fn with_width(polynomial: &PartitionPolynomial, radius: f64, width: f64) -> Self {
        let resolution = width / 8.0;
        let domain = DomainBox::space_time(polynomial.spatial_dim, radius).enlarged(width);
        let zeros = sample_zero_set(polynomial, &domain, resolution);
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, z) in zeros.iter().enumerate() {
            buckets.entry(bucket(&z.position, width)).or_default().push(i);
        }
        Self { polynomial: polynomial.clone(), width, resolution, radius, zeros, buckets }
    }

    /// Whether the point lies in `B(0,R) x [0,R]`.
    pub fn in_domain(&self, p: &[f64]) -> bool {
        let n = p.len() - 1;
        let x2: f64 = p[..n].iter().map(|x| x * x).sum();
        x2 <= self.radius * self.radius && p[n] >= 0.0 && p[n] <= self.radius
    }

    /// Distance to the nearest sampled zero if it is at most `width`.
    pub fn distance_within_width(&self, p: &[f64]) -> Option<f64> {
        let key = bucket(p, self.width);
        let dim = p.len();
        let mut best = f64::INFINITY;
        let offsets: i64 = if dim == 2 { 9 } else { 27 };
        for o in 0..offsets {
            let mut k = key;
            k[0] += o % 3 - 1;
            k[1] += o / 3 % 3 - 1;
            if dim == 3 {
                k[2] += o / 9 - 1;
            }
            if let Some(list) = self.buckets.get(&k) {
                for &i in list {
                    let d = distance(&self.zeros[i].position, p);
                    best = best.min(d);
                }
            }
        }
        (best <= self.width).then_some(best)
    }

    /// Membership in `W = N_width(Z) ∩ (B(0,R) x [0,R])`.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.in_domain(p) && self.distance_within_width(p).is_some()
    }

    pub fn mask(&self, points: &[Vec<f64>]) -> Vec<bool> {
        points.par_iter().map(|p| self.contains(p)).collect()
    }
}

fn bucket(p: &[f64], width: f64) -> [i64; 3] {
    let mut k = [0i64; 3];
    for (slot, x) in k.iter_mut().zip(p) {
        *slot = (x / width).floor() as i64;
    }
    k
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Wall of width `R^{1/2 + delta}` around `Z(P)`.
pub fn wall_region(p: &PartitionPolynomial, r: f64, delta: f64) -> Wall {
    Wall::with_width(p, r, r.powf(0.5 + delta))
}

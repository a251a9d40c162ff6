use crate::field::{GridSpec, SpectralField};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Tuning knobs of the lattice-frequency focusing construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocusingParams {
    /// Frequency spacing is `lambda R^{-1/6}` (angular), snapped to the torus lattice.
    pub lambda: f64,
    /// A unit square belongs to `X` when `|u|` reaches this fraction of the global maximum.
    pub threshold: f64,
    /// Samples per unit length along `x` and along `t`.
    pub samples_per_unit: usize,
}

impl Default for FocusingParams {
    fn default() -> Self {
        Self { lambda: DEFAULT_LAMBDA, threshold: 0.5, samples_per_unit: 4 }
    }
}

/// Spacing knob tuned so that `|X|` lands near `R^{3/2}` for `R` in `2^8 ..= 2^11`.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Data whose solution focuses, at a common height, on a sparse set of unit squares.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparseFocusingExample {
    pub scale: f64,
    pub params: FocusingParams,
    /// Angular frequency spacing of the lattice.
    pub spacing: f64,
    /// Number of lattice frequencies in `[-1, 1]`.
    pub modes: usize,
    pub g: SpectralField,
    /// Unit squares `[x, x+1) x [t, t+1)` of `[0, R]^2` where `|u|` is large, as `(x, t)`.
    pub squares: BTreeSet<(i64, i64)>,
    /// Largest sampled `|u|` over `X` (equal to the global sampled maximum).
    pub height: f64,
    /// `||g||_{L^2([0, R])}`, in closed form.
    pub l2_norm: f64,
    /// Most squares of `X` inside any `R^{1/2} x R^{1/2}` window.
    pub per_ball_density: usize,
}

impl SparseFocusingExample {
    /// `H / ||g||_{L^2([0,R])}`.
    pub fn relative_height(&self) -> f64 {
        self.height / self.l2_norm
    }

    /// `H |X|^{1/6} / (R^{-1/6} ||g||_2)`, the quantity refined Strichartz keeps below `R^eps`.
    pub fn strichartz_consistency(&self) -> f64 {
        self.height * (self.squares.len() as f64).powf(1.0 / 6.0) / (self.scale.powf(-1.0 / 6.0) * self.l2_norm)
    }
}

/// Builds `ghat = 1` on the frequencies `k s`, `|k s| <= 1`, samples `|e^{it Delta} g|` on
/// `[0, R]^2`, and collects the unit squares where it reaches `threshold` times its maximum.
pub fn build_sparse_focusing(r: f64, params: FocusingParams) -> Result<SparseFocusingExample> {
    if !(r >= 256.0) || r.log2().fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("R = {r} must be a power of two, at least 2^8")));
    }
    if !(params.lambda > 0.0) || !(params.threshold > 0.0 && params.threshold < 1.0) || params.samples_per_unit == 0 {
        return Err(Error::InvalidParameter(format!("bad focusing parameters {params:?}")));
    }
    let grid = GridSpec::standard(1, r)?;
    let dxi = grid.dxi();
    let step = ((params.lambda * r.powf(-1.0 / 6.0)) / dxi).round().max(1.0) as i64;
    let spacing = step as f64 * dxi;
    let half = (1.0 / spacing + 1e-12).floor() as i64;
    let ks: Vec<i64> = (-half..=half).collect();
    let mut g = SpectralField::zeros(grid.clone());
    for &k in &ks {
        g.coeffs[grid.mode_index(k * step)] = Complex64::new(1.0, 0.0);
    }
    let side = r as usize;
    let q = params.samples_per_unit;
    let inv_l = 1.0 / grid.period;
    // Per unit-time slab, the maximum of |u| on each unit square.
    let slabs: Vec<Vec<f64>> = (0..side)
        .into_par_iter()
        .map(|j| {
            let mut best = vec![0.0f64; side];
            for a in 0..q {
                let t = j as f64 + (a as f64 + 0.5) / q as f64;
                let c: Vec<Complex64> =
                    ks.iter().map(|&k| Complex64::from_polar(inv_l, (k as f64 * spacing).powi(2) * t)).collect();
                for (i, cell) in best.iter_mut().enumerate() {
                    for b in 0..q {
                        let x = i as f64 + (b as f64 + 0.5) / q as f64;
                        let z = Complex64::from_polar(1.0, spacing * x);
                        // Horner in z; the coefficients are even in k, so the overall power of z drops out.
                        let mut acc = Complex64::new(0.0, 0.0);
                        for ck in c.iter().rev() {
                            acc = acc * z + ck;
                        }
                        *cell = cell.max(acc.norm());
                    }
                }
            }
            best
        })
        .collect();
    let peak = slabs.iter().flatten().copied().fold(0.0, f64::max);
    let cut = params.threshold * peak;
    let mut squares = BTreeSet::new();
    for (j, slab) in slabs.iter().enumerate() {
        for (i, &v) in slab.iter().enumerate() {
            if v >= cut {
                squares.insert((i as i64, j as i64));
            }
        }
    }
    let height = squares
        .iter()
        .map(|&(i, j)| slabs[j as usize][i as usize])
        .fold(0.0, f64::max);
    let l2_norm = l2_on_interval(&ks, spacing, inv_l, r);
    let window = r.sqrt().round() as usize;
    let per_ball_density = window_maximum(&squares, side, window);
    let example =
        SparseFocusingExample { scale: r, params, spacing, modes: ks.len(), g, squares, height, l2_norm, per_ball_density };
    let floor = r.powf(1.5) / 16.0;
    if (example.squares.len() as f64) < floor {
        return Err(Error::ConstructionDegenerate(format!(
            "|X| = {} below R^(3/2)/16 = {floor:.1} at lambda = {}; retune the spacing knob",
            example.squares.len(),
            params.lambda
        )));
    }
    Ok(example)
}

/// `int_0^R |L^-1 sum_k e^{i k s x}|^2 dx` in closed form.
fn l2_on_interval(ks: &[i64], spacing: f64, inv_l: f64, r: f64) -> f64 {
    let mut total = 0.0;
    for &a in ks {
        for &b in ks {
            let w = (a - b) as f64 * spacing;
            total += if a == b { r } else { (w * r).sin() / w };
        }
    }
    (total * inv_l * inv_l).sqrt()
}

/// Largest number of squares in any `window x window` block of the `side x side` board.
fn window_maximum(squares: &BTreeSet<(i64, i64)>, side: usize, window: usize) -> usize {
    let w = window.min(side).max(1);
    let stride = side + 1;
    let mut prefix = vec![0usize; stride * stride];
    for j in 0..side {
        for i in 0..side {
            let here = usize::from(squares.contains(&(i as i64, j as i64)));
            prefix[(j + 1) * stride + i + 1] =
                here + prefix[j * stride + i + 1] + prefix[(j + 1) * stride + i] - prefix[j * stride + i];
        }
    }
    let mut best = 0;
    for j in 0..=side - w {
        for i in 0..=side - w {
            let count = prefix[(j + w) * stride + i + w] + prefix[j * stride + i]
                - prefix[j * stride + i + w]
                - prefix[(j + w) * stride + i];
            best = best.max(count);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_maximum_by_hand() {
        let squares: BTreeSet<(i64, i64)> = [(0, 0), (1, 1), (3, 3), (2, 3)].into_iter().collect();
        assert_eq!(window_maximum(&squares, 4, 2), 2);
        assert_eq!(window_maximum(&squares, 4, 4), 4);
        assert_eq!(window_maximum(&squares, 4, 1), 1);
    }

    #[test]
    fn closed_form_l2_matches_quadrature() {
        let ks = [-2i64, -1, 0, 1, 2];
        let (s, inv_l, r) = (0.37, 0.01, 50.0);
        let n = 200_000;
        let dx = r / n as f64;
        let quad: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * dx;
                let u: Complex64 = ks.iter().map(|&k| Complex64::from_polar(inv_l, k as f64 * s * x)).sum();
                u.norm_sqr() * dx
            })
            .sum();
        assert!((l2_on_interval(&ks, s, inv_l, r) - quad.sqrt()).abs() < 1e-8);
    }
}

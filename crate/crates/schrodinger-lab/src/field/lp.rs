use super::SpectralField;
use crate::bump::step;

/// Square of the cumulative low-pass weight: 1 for `|xi| <= 2^k`, 0 for `|xi| >= 2^{k+1/2}`.
fn low_pass_sq(radius: f64, k: i32) -> f64 {
    if radius <= 0.0 {
        return 1.0;
    }
    1.0 - step(2.0 * (radius.log2() - k as f64))
}

/// Weight `psi_k(|xi|)` of piece `k` in a partition with `last + 1` pieces.
///
/// `psi_0` lives on `B(0, 2^{1/2})`, `psi_k` on the annulus `[2^{k-1}, 2^{k+1/2}]`, and the
/// last piece absorbs everything beyond. `sum_k psi_k^2 = 1` identically.
pub fn lp_weight(radius: f64, k: usize, last: usize) -> f64 {
    let k = k as i32;
    let upper = if k as usize == last { 1.0 } else { low_pass_sq(radius, k) };
    let lower = if k == 0 { 0.0 } else { low_pass_sq(radius, k - 1) };
    (upper - lower).max(0.0).sqrt()
}

/// Smooth Littlewood-Paley slicing `f = sum_k f_k` in the square-sum sense, pieces
/// `k = 0..=K` with `K` the first level whose low-pass covers the spectral support.
pub fn littlewood_paley(field: &SpectralField) -> Vec<SpectralField> {
    let band = field.band_radius(0.0);
    let last = if band <= 1.0 { 0 } else { band.log2().ceil() as usize };
    (0..=last)
        .map(|k| {
            let mut piece = field.clone();
            piece.support = None;
            for (i, c) in piece.coeffs.iter_mut().enumerate() {
                let xi = field.grid.frequency(i);
                *c *= lp_weight((xi[0] * xi[0] + xi[1] * xi[1]).sqrt(), k, last);
            }
            piece
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_square_sum_to_one() {
        for last in [0usize, 3, 6] {
            for i in 0..2000 {
                let r = i as f64 * 0.05;
                let s: f64 = (0..=last).map(|k| lp_weight(r, k, last).powi(2)).sum();
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn weights_live_on_annuli() {
        let last = 6;
        for k in 1..last {
            let lo = 2f64.powi(k as i32 - 1);
            let hi = 2f64.powf(k as f64 + 0.5);
            assert_eq!(lp_weight(0.99 * lo, k, last), 0.0);
            assert_eq!(lp_weight(1.01 * hi, k, last), 0.0);
            assert!(lp_weight(2f64.powf(k as f64 - 0.25), k, last) > 0.999);
        }
    }
}

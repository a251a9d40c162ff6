use super::eval::binned_power_sums;
use crate::field::{SpectralField, SupportBall};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Relative `L^2` leak a piece may have outside its cap.
pub const PIECE_LEAK_TOLERANCE: f64 = 1e-6;
/// Relative `L^2` mismatch allowed between `F` and the sum of its pieces.
pub const PIECE_SUM_TOLERANCE: f64 = 1e-9;

/// Angular side of a cap, `2 pi R^{-1/2}` (side `R^{-1/2}` in cycle units).
pub fn cap_width(r: f64) -> f64 {
    TAU / r.sqrt()
}

/// Splits `f` into cap pieces: lattice cubes of side [`cap_width`] centred on multiples
/// of the side. Each piece carries its cap as declared support; empty caps are skipped.
pub fn cap_pieces(f: &SpectralField, r: f64) -> Result<Vec<SpectralField>> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!("scale {r} must exceed 1")));
    }
    let w = cap_width(r);
    let grid = &f.grid;
    let mut caps: BTreeMap<[i64; 2], Vec<usize>> = BTreeMap::new();
    for (i, c) in f.coeffs.iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let xi = grid.frequency(i);
        let key = [(xi[0] / w).round() as i64, if grid.dim == 2 { (xi[1] / w).round() as i64 } else { 0 }];
        caps.entry(key).or_default().push(i);
    }
    let radius = 0.5 * w * (grid.dim as f64).sqrt();
    Ok(caps
        .into_iter()
        .map(|(key, members)| {
            let mut piece = SpectralField::zeros(grid.clone());
            for i in members {
                piece.coeffs[i] = f.coeffs[i];
            }
            piece.support = Some(SupportBall { center: [key[0] as f64 * w, key[1] as f64 * w], radius });
            piece
        })
        .collect())
}

/// Numerator, per-piece norms and the resulting decoupling ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub ratio: f64,
    /// `||F||_{L^6(Q)}`.
    pub norm: f64,
    /// `||F_tau||_{L^6(10Q)}` per piece.
    pub piece_norms: Vec<f64>,
    /// `(sum ||F_tau||^2)^{1/2}`.
    pub square_sum: f64,
}

/// `||F||_{L^6(Q)} / (sum_tau ||F_tau||^2_{L^6(10 Q)})^{1/2}` with `Q = [-R/2, R/2]^n x [0, R]`
/// and `10 Q` clipped to `B(0,R) x [0,R]`.
pub fn decoupling_ratio(f: &SpectralField, pieces: &[SpectralField], r: f64) -> Result<DecouplingReport> {
    let half = 0.5 * r;
    decoupling_ratio_on(
        f,
        pieces,
        r,
        |x, _| x[0].abs() <= half && x[1].abs() <= half,
        |x, _| x[0].hypot(x[1]) <= r,
    )
}

/// Decoupling ratio with explicit spatial regions for `F` and for the pieces (times `[0, R]`).
pub fn decoupling_ratio_on(
    f: &SpectralField,
    pieces: &[SpectralField],
    r: f64,
    region: impl Fn([f64; 2], f64) -> bool + Sync,
    piece_region: impl Fn([f64; 2], f64) -> bool + Sync,
) -> Result<DecouplingReport> {
    if pieces.is_empty() {
        return Err(Error::InvalidParameter("no pieces".into()));
    }
    let w = cap_width(r);
    let mut sum = SpectralField::zeros(f.grid.clone());
    for (k, piece) in pieces.iter().enumerate() {
        let ball = piece
            .support
            .ok_or_else(|| Error::InvalidParameter(format!("piece {k} has no declared cap")))?;
        let cap = SupportBall { center: ball.center, radius: ball.radius.min(0.5 * w * (f.grid.dim as f64).sqrt()) };
        let leak = piece.leak_outside(&cap);
        if leak > PIECE_LEAK_TOLERANCE {
            return Err(Error::SupportViolation { piece: k, leak });
        }
        sum = sum.plus(piece)?;
    }
    let diff: f64 = sum.coeffs.iter().zip(&f.coeffs).map(|(a, b)| (a - b).norm_sqr()).sum();
    let total: f64 = f.coeffs.iter().map(Complex64::norm_sqr).sum();
    if diff > PIECE_SUM_TOLERANCE.powi(2) * total.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidParameter(format!(
            "pieces do not sum to F: relative mismatch {:.3e}",
            (diff / total).sqrt()
        )));
    }
    let norm = region_norm(f, r, &region)?;
    let piece_norms = pieces.iter().map(|p| region_norm(p, r, &piece_region)).collect::<Result<Vec<_>>>()?;
    let square_sum = piece_norms.iter().map(|n| n * n).sum::<f64>().sqrt();
    if !(square_sum > 0.0) {
        return Err(Error::DegenerateInput("every piece vanishes on the enlarged region".into()));
    }
    Ok(DecouplingReport { ratio: norm / square_sum, norm, piece_norms, square_sum })
}

fn region_norm(f: &SpectralField, r: f64, region: &(impl Fn([f64; 2], f64) -> bool + Sync)) -> Result<f64> {
    let s = binned_power_sums(&[f], &[6.0], 1, (0.0, r), |x, t| region(x, t).then_some(0))?;
    Ok(s[0].powf(1.0 / 6.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::rng::{random_band_limited, seeded};

    #[test]
    fn pieces_partition_the_data() {
        let g = GridSpec::standard(1, 256.0).unwrap();
        let f = random_band_limited(&g, SupportBall::unit(), &mut seeded(3));
        let pieces = cap_pieces(&f, 256.0).unwrap();
        assert!(pieces.len() >= 5 && pieces.len() <= 7, "{}", pieces.len());
        let mass: f64 = pieces.iter().map(|p| p.l2_norm().powi(2)).sum();
        assert!((mass - f.l2_norm().powi(2)).abs() < 1e-12);
        for p in &pieces {
            assert_eq!(p.leak_outside(&p.support.unwrap()), 0.0);
        }
    }

    #[test]
    fn single_piece_on_same_region_is_exactly_one() {
        let g = GridSpec::standard(1, 256.0).unwrap();
        let f = random_band_limited(&g, SupportBall { center: [0.39, 0.0], radius: 0.1 }, &mut seeded(4));
        let pieces = cap_pieces(&f, 256.0).unwrap();
        assert_eq!(pieces.len(), 1);
        let same = |x: [f64; 2], _t: f64| x[0].abs() <= 128.0;
        let rep = decoupling_ratio_on(&f, &pieces, 256.0, same, same).unwrap();
        assert_eq!(rep.ratio, 1.0);
        let rep = decoupling_ratio(&f, &pieces, 256.0).unwrap();
        assert!(rep.ratio <= 1.0);
    }

    #[test]
    fn leaking_piece_is_rejected() {
        let g = GridSpec::standard(1, 256.0).unwrap();
        let f = random_band_limited(&g, SupportBall::unit(), &mut seeded(5));
        let mut pieces = cap_pieces(&f, 256.0).unwrap();
        let ball = pieces[0].support.unwrap();
        pieces[0].support = Some(SupportBall { radius: 0.25 * ball.radius, ..ball });
        assert!(matches!(decoupling_ratio(&f, &pieces, 256.0), Err(Error::SupportViolation { piece: 0, .. })));
    }
}

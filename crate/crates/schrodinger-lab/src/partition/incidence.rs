use super::poly::sign_change_roots;
use super::wall::{distance, DomainBox, Wall};
use super::{horner, PartitionPolynomial};
use crate::wavepacket::{reconstruct, tube_of, CoefficientSet, TileIndex, Tube};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Line `origin + s direction` in space-time.
#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineCrossing {
    /// Distinct sign vectors met along the line inside the box.
    pub cells: usize,
    /// Factors vanishing identically on the line; they are left out of the count.
    pub degenerate_factors: Vec<usize>,
}

impl LineCrossing {
    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_factors.is_empty()
    }
}

/// Number of partition cells a line enters within `domain`.
///
/// Each factor is restricted exactly to the line (a univariate polynomial); its sign
/// changes are isolated on monotone pieces and bisected, and the sign vector is read
/// between consecutive crossings. A factor vanishing identically on the line is flagged
/// and the count is reported over the remaining factors.
pub fn cells_entered_by_line(p: &PartitionPolynomial, line: &Line, domain: &DomainBox) -> Result<LineCrossing> {
    let vars = p.vars();
    if line.origin.len() != vars || line.direction.len() != vars || domain.dim() != vars {
        return Err(Error::InvalidParameter("line and polynomial dimensions differ".into()));
    }
    if line.direction.iter().all(|d| *d == 0.0) {
        return Err(Error::InvalidParameter("line direction is zero".into()));
    }
    let Some((s0, s1)) = domain.clip(&line.origin, &line.direction) else {
        return Ok(LineCrossing { cells: 0, degenerate_factors: Vec::new() });
    };
    let origin = p.normalize(&line.origin);
    let direction: Vec<f64> = line.direction.iter().map(|d| d / p.scale).collect();
    let mut restricted = Vec::new();
    let mut degenerate_factors = Vec::new();
    for (k, f) in p.factors.iter().enumerate() {
        let coeffs = f.restrict_to_line(&origin, &direction);
        let size = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if size <= 1e-12 * f.coefficient_norm() {
            degenerate_factors.push(k);
        } else {
            restricted.push(coeffs);
        }
    }
    let mut knots = vec![s0];
    for c in &restricted {
        knots.extend(sign_change_roots(c, s0, s1));
    }
    knots.push(s1);
    knots.sort_by(f64::total_cmp);
    let mut seen = BTreeSet::new();
    for w in knots.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let signs: Vec<bool> = restricted.iter().map(|c| horner(c, mid) > 0.0).collect();
        seen.insert(signs);
    }
    Ok(LineCrossing { cells: seen.len(), degenerate_factors })
}

/// Cells `O_i' = (O_i ∩ B*_R) \ W` met by the tube's central line, sampled at the wall resolution.
pub fn tube_cells(tube: &Tube, p: &PartitionPolynomial, wall: &Wall) -> BTreeSet<u64> {
    let n = p.spatial_dim;
    let steps = (tube.length / wall.resolution).ceil() as usize;
    let mut out = BTreeSet::new();
    for i in 0..=steps {
        let t = tube.length * i as f64 / steps as f64;
        let axis = tube.axis_at(t);
        let mut point: Vec<f64> = axis[..n].to_vec();
        point.push(t);
        if !wall.in_domain(&point) || wall.contains(&point) {
            continue;
        }
        if let Some(id) = p.cell_id(&point) {
            out.insert(id);
        }
    }
    out
}

/// `Sum_i ||f_i||^2` against `D ||f||^2`, where `f_i` collects the packets whose tubes enter cell `i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetReport {
    pub cell_sum: f64,
    pub total: f64,
    pub degree: u32,
    /// `cell_sum / (degree * total)`.
    pub ratio: f64,
    pub per_cell: BTreeMap<u64, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IncidenceReport {
    pub tiles: Vec<TileIndex>,
    pub cells: Vec<BTreeSet<u64>>,
    /// Largest number of cells entered by one tube.
    pub max_count: usize,
    /// The bound `deg P + 1`.
    pub bound: usize,
    pub violations: usize,
    pub budget: BudgetReport,
}

/// Assemble `f_i` for each cell from the packets entering it and compare the total energy.
pub fn orthogonality_budget(set: &CoefficientSet, tiles: &[TileIndex], cells: &[BTreeSet<u64>], degree: u32) -> BudgetReport {
    let mut members: BTreeMap<u64, BTreeSet<TileIndex>> = BTreeMap::new();
    for (tile, ids) in tiles.iter().zip(cells) {
        for &id in ids {
            members.entry(id).or_default().insert(*tile);
        }
    }
    let per_cell: BTreeMap<u64, f64> = members
        .into_par_iter()
        .map(|(id, keep)| {
            let part = reconstruct(&set.filtered(|index| keep.contains(&index)));
            (id, part.l2_norm().powi(2))
        })
        .collect();
    let cell_sum: f64 = per_cell.values().sum();
    let total = reconstruct(set).l2_norm().powi(2);
    let ratio = cell_sum / (degree.max(1) as f64 * total);
    BudgetReport { cell_sum, total, degree, ratio, per_cell }
}

/// Cells entered by every retained tube of a coefficient set, with the crossing bound
/// `count <= deg P + 1` checked per tube and the energy budget aggregated over cells.
pub fn tube_cell_incidence(set: &CoefficientSet, p: &PartitionPolynomial, wall: &Wall, delta: f64) -> Result<IncidenceReport> {
    let tiles: Vec<TileIndex> = set.iter().map(|(index, _)| index).collect();
    let tubes: Vec<Tube> = tiles.iter().map(|&index| tube_of(&set.tile(index), delta)).collect::<Result<_>>()?;
    let cells: Vec<BTreeSet<u64>> = tubes.par_iter().map(|t| tube_cells(t, p, wall)).collect();
    let bound = p.degree() as usize + 1;
    let max_count = cells.iter().map(BTreeSet::len).max().unwrap_or(0);
    let violations = cells.iter().filter(|c| c.len() > bound).count();
    let budget = orthogonality_budget(set, &tiles, &cells, p.degree());
    Ok(IncidenceReport { tiles, cells, max_count, bound, violations, budget })
}

/// Space-time ball `B_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Covering of `B(0,R) x [0,R]` by balls of radius `R^{1 - delta}` centred on a cubic
/// lattice of spacing `radius` (every point lies within `sqrt(n+1)/2 * radius < radius`
/// of a centre when `n <= 2`).
pub fn ball_cover(spatial_dim: usize, r: f64, delta: f64) -> Vec<Ball> {
    let radius = r.powf(1.0 - delta);
    let per_space = (2.0 * r / radius).ceil() as i64;
    let per_time = (r / radius).ceil() as i64;
    let space = |i: i64| -r + (i as f64 + 0.5) * 2.0 * r / per_space as f64;
    let time = |j: i64| (j as f64 + 0.5) * r / per_time as f64;
    let mut out = Vec::new();
    for j in 0..per_time {
        for a in 0..per_space {
            let b_range = if spatial_dim == 2 { 0..per_space } else { 0..1 };
            for b in b_range {
                let mut center = vec![space(a)];
                if spatial_dim == 2 {
                    center.push(space(b));
                }
                center.push(time(j));
                let x2: f64 = center[..spatial_dim].iter().map(|x| x * x).sum();
                if x2.sqrt() <= r + radius {
                    out.push(Ball { center, radius });
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tangency {
    Tangent,
    Transverse,
    Disjoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TangencyLabel {
    pub kind: Tangency,
    pub ball_id: usize,
    /// Angle bound separating tangent from transverse.
    pub threshold: f64,
    /// `E` with `threshold = E R^{-1/2}`.
    pub tangency_parameter: f64,
}

/// `R^{-1/2 + 2 delta}`.
pub fn tangency_threshold(r: f64, delta: f64) -> f64 {
    r.powf(-0.5 + 2.0 * delta)
}

/// Non-singular gradient threshold in the normalised coordinates of the factors.
const SINGULAR_GRADIENT: f64 = 1e-8;

fn angle_to_tangent_plane(direction: &[f64], normal: &[f64]) -> f64 {
    let dot: f64 = direction.iter().zip(normal).map(|(a, b)| a * b).sum();
    let dn = direction.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn = normal.iter().map(|a| a * a).sum::<f64>().sqrt();
    (dot.abs() / (dn * nn)).min(1.0).asin()
}

fn tube_meets_wall_in_ball(tube: &Tube, wall: &Wall, ball: &Ball) -> bool {
    let n = wall.polynomial.spatial_dim;
    let h = wall.resolution;
    let t_lo = (ball.center[n] - ball.radius).max(0.0);
    let t_hi = (ball.center[n] + ball.radius).min(tube.length);
    if t_lo > t_hi {
        return false;
    }
    let nt = ((t_hi - t_lo) / h).ceil() as usize;
    let nr = (tube.radius / h).ceil() as i64;
    for i in 0..=nt {
        let t = t_lo + (t_hi - t_lo) * i as f64 / nt.max(1) as f64;
        let axis = tube.axis_at(t);
        for a in -nr..=nr {
            let bs: Vec<i64> = if n == 2 { (-nr..=nr).collect() } else { vec![0] };
            for b in bs {
                let off = [a as f64 * tube.radius / nr as f64, b as f64 * tube.radius / nr as f64];
                if off[0].hypot(off[1]) > tube.radius {
                    continue;
                }
                let mut point: Vec<f64> = (0..n).map(|k| axis[k] + off[k]).collect();
                point.push(t);
                if distance(&point, &ball.center) <= ball.radius && wall.contains(&point) {
                    return true;
                }
            }
        }
    }
    false
}

/// Tangent / transverse / disjoint label of a tube relative to `Z(P)` in the ball `B_j`.
///
/// Disjoint when the tube misses the wall inside the ball. Otherwise the angle between
/// the tube direction `(-2 c(theta), 1)` and the tangent plane `{grad P(z)}^perp` is
/// measured at every sampled non-singular zero `z` in `10T ∩ 2B_j`; the tube is tangent
/// when all angles are within `threshold` (vacuously so if no zero is sampled there).
pub fn classify_tangency(tube: &Tube, wall: &Wall, ball: &Ball, ball_id: usize, threshold: f64) -> Result<TangencyLabel> {
    let n = wall.polynomial.spatial_dim;
    let label = |kind| TangencyLabel {
        kind,
        ball_id,
        threshold,
        tangency_parameter: threshold * tube.tile.scale.sqrt(),
    };
    if !tube_meets_wall_in_ball(tube, wall, ball) {
        return Ok(label(Tangency::Disjoint));
    }
    let full = tube.direction();
    let direction: Vec<f64> = if n == 1 { vec![full[0], full[2]] } else { full.to_vec() };
    let mut sampled = 0usize;
    let mut worst: f64 = 0.0;
    let mut regular = 0usize;
    for z in &wall.zeros {
        let t = z.position[n];
        let mut x = [0.0; 2];
        x[..n].copy_from_slice(&z.position[..n]);
        if tube.distance_to_axis(x, t) > 10.0 * tube.radius || distance(&z.position, &ball.center) > 2.0 * ball.radius {
            continue;
        }
        sampled += 1;
        if z.gradient_norm <= SINGULAR_GRADIENT {
            continue;
        }
        regular += 1;
        worst = worst.max(angle_to_tangent_plane(&direction, &z.normal));
    }
    if sampled > 0 && regular == 0 {
        return Err(Error::NoNonSingularPoints);
    }
    Ok(label(if worst <= threshold { Tangency::Tangent } else { Tangency::Transverse }))
}

/// Number of balls of the cover in which the tube is transverse.
pub fn transverse_ball_count(tube: &Tube, wall: &Wall, balls: &[Ball], threshold: f64) -> Result<usize> {
    let labels: Vec<TangencyLabel> = balls
        .par_iter()
        .enumerate()
        .map(|(j, b)| classify_tangency(tube, wall, b, j, threshold))
        .collect::<Result<_>>()?;
    Ok(labels.iter().filter(|l| l.kind == Tangency::Transverse).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Polynomial;

    #[test]
    fn plane_crossed_once() {
        let p = PartitionPolynomial::physical(1, 1, vec![Polynomial::affine(0.0, &[1.0, -0.5])]).unwrap();
        let line = Line { origin: vec![-3.0, 1.0], direction: vec![1.0, 0.2] };
        let c = cells_entered_by_line(&p, &line, &DomainBox::space_time(1, 10.0)).unwrap();
        assert_eq!(c, LineCrossing { cells: 2, degenerate_factors: vec![] });
    }

    #[test]
    fn parallel_hyperplanes() {
        // D parallel planes x = k: a transversal line sees D + 1 cells
        let d = 4;
        let factors = (0..d).map(|k| Polynomial::affine(-(k as f64), &[1.0, 0.0])).collect();
        let p = PartitionPolynomial::physical(1, d, factors).unwrap();
        let line = Line { origin: vec![-5.0, 2.0], direction: vec![1.0, 0.1] };
        let c = cells_entered_by_line(&p, &line, &DomainBox::space_time(1, 10.0)).unwrap();
        assert_eq!(c.cells, d as usize + 1);
    }

    #[test]
    fn line_inside_zero_set_is_flagged() {
        let p = PartitionPolynomial::physical(
            1,
            2,
            vec![Polynomial::affine(0.0, &[1.0, 0.0]), Polynomial::affine(-5.0, &[0.0, 1.0])],
        )
        .unwrap();
        let line = Line { origin: vec![0.0, 1.0], direction: vec![0.0, 1.0] };
        let c = cells_entered_by_line(&p, &line, &DomainBox::space_time(1, 10.0)).unwrap();
        assert_eq!(c.degenerate_factors, vec![0]);
        assert_eq!(c.cells, 2);
    }

    #[test]
    fn angle_between_direction_and_plane() {
        // plane t = x: normal (1, -1); direction (1, 1) lies in it
        assert!(angle_to_tangent_plane(&[1.0, 1.0], &[1.0, -1.0]).abs() < 1e-15);
        let a = angle_to_tangent_plane(&[0.0, 1.0], &[1.0, -1.0]);
        assert!((a - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn ball_cover_reaches_every_point() {
        let balls = ball_cover(1, 64.0, 0.1);
        for x in [-64.0, -10.0, 0.0, 63.0] {
            for t in [0.0, 30.0, 64.0] {
                assert!(balls.iter().any(|b| distance(&b.center, &[x, t]) <= b.radius));
            }
        }
    }
}

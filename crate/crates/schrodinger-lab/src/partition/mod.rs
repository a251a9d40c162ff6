//! Polynomial partitioning of space-time mass, walls around the zero set, tube-cell
//! incidence and tangency classification.
//!
//! Points are `(x_1, .., x_n, t)` in physical units. Factors are stored in normalised
//! coordinates `u = (p - center) / scale` so that coefficients stay well conditioned.

mod bisect;
mod incidence;
mod mass;
mod poly;
mod wall;

pub use bisect::{
    degree_schedule, ham_sandwich_bisect, polynomial_partition, BisectOptions, Cell, PartitionOptions,
    PartitionResult, DEFAULT_TOLERANCE,
};
pub use incidence::{
    ball_cover, cells_entered_by_line, classify_tangency, orthogonality_budget, tangency_threshold,
    transverse_ball_count, tube_cell_incidence, tube_cells, Ball, BudgetReport, IncidenceReport, Line,
    LineCrossing, Tangency, TangencyLabel,
};
pub use mass::MassField;
pub use poly::{horner, monomial_exponents, sign_change_roots, space_dimension, Polynomial, Term};
pub use wall::{sample_zero_set, wall_region, DomainBox, Wall, ZeroPoint};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative size below which a factor value counts as zero (the point is a tie).
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Product `P = P_1 ... P_s` of factors in normalised coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionPolynomial {
    pub spatial_dim: usize,
    pub degree_bound: u32,
    pub center: Vec<f64>,
    pub scale: f64,
    pub factors: Vec<Polynomial>,
}

impl PartitionPolynomial {
    pub fn new(
        spatial_dim: usize,
        degree_bound: u32,
        center: Vec<f64>,
        scale: f64,
        factors: Vec<Polynomial>,
    ) -> Result<Self> {
        if !(1..=2).contains(&spatial_dim) {
            return Err(Error::InvalidParameter(format!("spatial dimension {spatial_dim}")));
        }
        if center.len() != spatial_dim + 1 || !(scale > 0.0) {
            return Err(Error::InvalidParameter("normalisation frame does not match the dimension".into()));
        }
        if factors.iter().any(|f| f.vars() != spatial_dim + 1) {
            return Err(Error::InvalidParameter("factor variable count does not match the dimension".into()));
        }
        let p = Self { spatial_dim, degree_bound, center, scale, factors };
        if p.degree() > degree_bound {
            return Err(Error::InvalidParameter(format!(
                "product degree {} exceeds the bound {degree_bound}",
                p.degree()
            )));
        }
        Ok(p)
    }

    /// Factors written directly in physical coordinates (identity normalisation).
    pub fn physical(spatial_dim: usize, degree_bound: u32, factors: Vec<Polynomial>) -> Result<Self> {
        Self::new(spatial_dim, degree_bound, vec![0.0; spatial_dim + 1], 1.0, factors)
    }

    /// Degree of the product.
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.degree).sum()
    }

    pub fn vars(&self) -> usize {
        self.spatial_dim + 1
    }

    pub fn normalize(&self, point: &[f64]) -> Vec<f64> {
        point.iter().zip(&self.center).map(|(p, c)| (p - c) / self.scale).collect()
    }

    pub fn factor_value(&self, k: usize, point: &[f64]) -> f64 {
        self.factors[k].eval(&self.normalize(point))
    }

    /// Value of the product.
    pub fn value(&self, point: &[f64]) -> f64 {
        let u = self.normalize(point);
        self.factors.iter().map(|f| f.eval(&u)).product()
    }

    /// Gradient of factor `k` with respect to physical coordinates.
    pub fn factor_gradient(&self, k: usize, point: &[f64]) -> Vec<f64> {
        self.factors[k].gradient(&self.normalize(point)).into_iter().map(|g| g / self.scale).collect()
    }

    /// Cell id (bit `k` set iff `P_k > 0`), or `None` if some factor is a tie.
    pub fn cell_id(&self, point: &[f64]) -> Option<u64> {
        let u = self.normalize(point);
        let mut id = 0u64;
        for (k, f) in self.factors.iter().enumerate() {
            let (v, magnitude) = f.eval_with_magnitude(&u);
            if v.abs() <= TIE_TOLERANCE * magnitude.max(f64::MIN_POSITIVE) {
                return None;
            }
            if v > 0.0 {
                id |= 1 << k;
            }
        }
        Some(id)
    }

    /// Number of sign-vector cells, `2^s`.
    pub fn cell_count(&self) -> usize {
        1 << self.factors.len()
    }
}

/// Sign vector of a cell id over `s` factors, `true` meaning positive.
pub fn sign_vector(id: u64, factors: usize) -> Vec<bool> {
    (0..factors).map(|k| id >> k & 1 == 1).collect()
}

/// `+`/`-` rendering of a sign vector.
pub fn sign_string(signs: &[bool]) -> String {
    signs.iter().map(|&s| if s { '+' } else { '-' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_bound_enforced() {
        let f = Polynomial::affine(0.0, &[1.0, 0.0]);
        assert!(PartitionPolynomial::physical(1, 1, vec![f.clone(), f.clone()]).is_err());
        assert_eq!(PartitionPolynomial::physical(1, 2, vec![f.clone(), f]).unwrap().degree(), 2);
    }

    #[test]
    fn cell_ids_and_ties() {
        let p = PartitionPolynomial::physical(
            1,
            2,
            vec![Polynomial::affine(0.0, &[1.0, 0.0]), Polynomial::affine(-5.0, &[0.0, 1.0])],
        )
        .unwrap();
        assert_eq!(p.cell_id(&[1.0, 6.0]), Some(0b11));
        assert_eq!(p.cell_id(&[-1.0, 6.0]), Some(0b10));
        assert_eq!(p.cell_id(&[-1.0, 4.0]), Some(0b00));
        assert_eq!(p.cell_id(&[0.0, 4.0]), None);
        assert_eq!(sign_string(&sign_vector(0b10, 2)), "-+");
    }

    #[test]
    fn json_shape() {
        let p = PartitionPolynomial::physical(1, 1, vec![Polynomial::affine(0.5, &[1.0, 0.0])]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        let term = &v["factors"][0]["terms"][1];
        assert_eq!(term["exponents"], serde_json::json!([1, 0]));
        assert_eq!(term["coefficient"], serde_json::json!(1.0));
        assert_eq!(v["factors"][0]["degree"], serde_json::json!(1));
    }
}

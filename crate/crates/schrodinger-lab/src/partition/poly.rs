use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One monomial `coefficient * prod_i u_i^{exponents[i]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

/// Real polynomial in `n + 1` variables `(x_1, .., x_n, t)` with a recorded degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub degree: u32,
    pub terms: Vec<Term>,
}

/// Exponent vectors of all monomials of total degree `<= degree`, graded by degree and
/// then ordered so that the first linear monomial is `u_0`.
pub fn monomial_exponents(vars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(vars: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == vars {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=total).rev() {
            prefix.push(e);
            fill(vars, total - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree {
        fill(vars, total, &mut Vec::with_capacity(vars), &mut out);
    }
    out
}

/// Dimension of the space of polynomials of degree `<= degree` in `vars` variables.
pub fn space_dimension(vars: usize, degree: u32) -> usize {
    (1..=vars).fold(1usize, |acc, i| acc * (degree as usize + i) / i)
}

fn monomial(exponents: &[u32], u: &[f64]) -> f64 {
    exponents.iter().zip(u).map(|(&e, &x)| x.powi(e as i32)).product()
}

impl Polynomial {
    /// Polynomial with coefficients listed in the order of [`monomial_exponents`].
    pub fn from_coefficients(vars: usize, degree: u32, coeffs: &[f64]) -> Result<Self> {
        let basis = monomial_exponents(vars, degree);
        if basis.len() != coeffs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        let terms = basis
            .into_iter()
            .zip(coeffs)
            .map(|(exponents, &coefficient)| Term { exponents, coefficient })
            .collect();
        Ok(Self { degree, terms })
    }

    /// Polynomial given by explicit terms; the degree is the largest total degree present.
    pub fn from_terms(terms: Vec<Term>) -> Self {
        let degree = terms.iter().map(|t| t.exponents.iter().sum::<u32>()).max().unwrap_or(0);
        Self { degree, terms }
    }

    /// Affine polynomial `constant + sum_i linear[i] u_i`.
    pub fn affine(constant: f64, linear: &[f64]) -> Self {
        let vars = linear.len();
        let mut terms = vec![Term { exponents: vec![0; vars], coefficient: constant }];
        for (i, &c) in linear.iter().enumerate() {
            let mut exponents = vec![0; vars];
            exponents[i] = 1;
            terms.push(Term { exponents, coefficient: c });
        }
        Self { degree: 1, terms }
    }

    pub fn vars(&self) -> usize {
        self.terms.first().map_or(0, |t| t.exponents.len())
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.coefficient * monomial(&t.exponents, u)).sum()
    }

    /// Value together with `sum |c_m m(u)|`, the scale of its rounding error.
    pub fn eval_with_magnitude(&self, u: &[f64]) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(v, a), t| {
            let term = t.coefficient * monomial(&t.exponents, u);
            (v + term, a + term.abs())
        })
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        for t in &self.terms {
            for (i, gi) in g.iter_mut().enumerate() {
                let e = t.exponents[i];
                if e == 0 {
                    continue;
                }
                let mut d = t.exponents.clone();
                d[i] -= 1;
                *gi += t.coefficient * e as f64 * monomial(&d, u);
            }
        }
        g
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient * t.coefficient).sum::<f64>().sqrt()
    }

    /// Univariate coefficients (ascending powers of `s`) of `s -> P(origin + s direction)`.
    pub fn restrict_to_line(&self, origin: &[f64], direction: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.degree as usize + 1];
        for t in &self.terms {
            let mut poly = vec![t.coefficient];
            for (i, &e) in t.exponents.iter().enumerate() {
                for _ in 0..e {
                    poly = multiply(&poly, &[origin[i], direction[i]]);
                }
            }
            if poly.len() > out.len() {
                out.resize(poly.len(), 0.0);
            }
            for (o, p) in out.iter_mut().zip(&poly) {
                *o += p;
            }
        }
        out
    }

    /// Whether the two polynomials are proportional (coefficient vectors parallel).
    pub fn is_proportional_to(&self, other: &Polynomial) -> bool {
        let dot: f64 = self
            .terms
            .iter()
            .map(|a| {
                other
                    .terms
                    .iter()
                    .find(|b| b.exponents == a.exponents)
                    .map_or(0.0, |b| a.coefficient * b.coefficient)
            })
            .sum();
        let scale = self.coefficient_norm() * other.coefficient_norm();
        scale > 0.0 && (dot.abs() - scale).abs() <= 1e-12 * scale
    }
}

fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Evaluate an ascending coefficient list by Horner's rule.
pub fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut end = coeffs.len();
    while end > 0 && coeffs[end - 1].abs() <= 1e-14 * scale {
        end -= 1;
    }
    &coeffs[..end]
}

/// Points in `(a, b)` where the univariate polynomial changes sign.
///
/// The interval is split at the sign changes of the derivative (recursively), so each
/// piece is monotone and holds at most one crossing, which is then bisected to full
/// precision. Roots of even multiplicity are not sign changes and are not reported.
pub fn sign_change_roots(coeffs: &[f64], a: f64, b: f64) -> Vec<f64> {
    let p = trimmed(coeffs);
    if p.len() <= 1 || !(a < b) {
        return Vec::new();
    }
    if p.len() == 2 {
        let root = -p[0] / p[1];
        return if root > a && root < b { vec![root] } else { Vec::new() };
    }
    let mut knots = vec![a];
    knots.extend(sign_change_roots(&derivative(p), a, b));
    knots.push(b);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (horner(p, lo), horner(p, hi));
        if flo == 0.0 || fhi == 0.0 || (flo > 0.0) == (fhi > 0.0) {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = horner(p, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    // a crossing exactly at an interior knot is invisible to the bracketing above
    for w in knots.windows(3) {
        let k = w[1];
        if horner(p, k) == 0.0 {
            let left = horner(p, 0.5 * (w[0] + k));
            let right = horner(p, 0.5 * (k + w[2]));
            if left * right < 0.0 {
                roots.push(k);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_size_matches_binomial() {
        for vars in 1..=3 {
            for d in 0..=4 {
                assert_eq!(monomial_exponents(vars, d).len(), space_dimension(vars, d));
            }
        }
        assert_eq!(space_dimension(2, 1), 3);
        assert_eq!(space_dimension(3, 2), 10);
        assert_eq!(monomial_exponents(2, 1)[1], vec![1, 0]);
    }

    #[test]
    fn restriction_matches_pointwise_evaluation() {
        let p = Polynomial::from_coefficients(2, 3, &[0.3, -1.0, 0.5, 2.0, 0.1, -0.7, 0.2, 0.4, -0.3, 1.1]).unwrap();
        let origin = [0.2, -0.4];
        let dir = [0.7, 1.3];
        let line = p.restrict_to_line(&origin, &dir);
        for s in [-1.0, -0.3, 0.0, 0.8] {
            let u = [origin[0] + s * dir[0], origin[1] + s * dir[1]];
            assert!((horner(&line, s) - p.eval(&u)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let p = Polynomial::from_coefficients(3, 2, &[0.1, 0.2, -0.3, 0.4, 1.0, -2.0, 0.5, 0.3, 0.7, -0.9]).unwrap();
        let u = [0.3, -0.2, 0.6];
        let g = p.gradient(&u);
        for i in 0..3 {
            let mut a = u;
            let mut b = u;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            assert!(((p.eval(&a) - p.eval(&b)) / 2e-6 - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn roots_of_product_of_linear_factors() {
        // (s - 0.1)(s + 0.5)(s - 0.9)
        let mut c = vec![1.0];
        for r in [0.1, -0.5, 0.9] {
            c = multiply(&c, &[-r, 1.0]);
        }
        let roots = sign_change_roots(&c, -1.0, 1.0);
        assert_eq!(roots.len(), 3);
        for (got, want) in roots.iter().zip([-0.5, 0.1, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn double_root_is_not_a_crossing() {
        // (s - 0.25)^2 (s + 0.5)
        let c = multiply(&multiply(&[-0.25, 1.0], &[-0.25, 1.0]), &[0.5, 1.0]);
        let roots = sign_change_roots(&c, -1.0, 1.0);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn proportionality() {
        let p = Polynomial::affine(1.0, &[2.0, 0.0]);
        let q = Polynomial::affine(-0.5, &[-1.0, 0.0]);
        assert!(p.is_proportional_to(&q));
        assert!(!p.is_proportional_to(&Polynomial::affine(1.0, &[0.0, 2.0])));
    }
}

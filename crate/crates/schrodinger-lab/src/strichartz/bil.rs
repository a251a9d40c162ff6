use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Caps `tau`: balls of radius `1/(KM)` at the given centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapLayout {
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
}

impl CapLayout {
    /// Distance between caps `i` and `j` (as balls).
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.centers[i], self.centers[j]);
        ((a[0] - b[0]).hypot(a[1] - b[1]) - 2.0 * self.radius).max(0.0)
    }
}

/// Values of `e^{it Delta} f_{tau, tang}` and `e^{it Delta} f_{tau, trans}` at one point,
/// one entry per cap; `f_tau` is their sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapSample {
    pub tangent: Vec<Complex64>,
    pub transverse: Vec<Complex64>,
}

/// Worst constant in `|u| <= C (|u_{I,trans}| + K^10 Bil(tangent))` over broad points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilReport {
    pub worst_constant: f64,
    pub checked: usize,
    /// Points where `max_tau |f_tau| > K^{-eps^4} |f|`.
    pub excluded: usize,
    /// Points where two separated caps both carry a large tangent part.
    pub bilinear_points: usize,
    /// Size of `I` at each checked point.
    pub transverse_set_sizes: Vec<usize>,
}

/// Bilinear tangent term: `max |u_{tau_1, tang}|^{1/2} |u_{tau_2, tang}|^{1/2}` over caps at
/// distance at least `1/(KM)` (the cap radius).
pub fn bilinear_tangent_term(layout: &CapLayout, tangent: &[Complex64]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..tangent.len() {
        for j in i + 1..tangent.len() {
            if layout.distance(i, j) >= layout.radius {
                best = best.max((tangent[i].norm() * tangent[j].norm()).sqrt());
            }
        }
    }
    best
}

/// Checks the transverse plus bilinear-tangent domination pointwise, with
/// `I = {tau : |u_{tau,tang}| <= K^{-10} |u|}`.
pub fn bil_decomposition_check(layout: &CapLayout, samples: &[CapSample], k: f64, epsilon: f64) -> Result<BilReport> {
    let caps = layout.centers.len();
    if samples.iter().any(|s| s.tangent.len() != caps || s.transverse.len() != caps) {
        return Err(Error::InvalidParameter("every sample needs one tangent and one transverse value per cap".into()));
    }
    if !(k > 1.0) {
        return Err(Error::InvalidParameter(format!("K = {k} must exceed 1")));
    }
    let broad = k.powf(-epsilon.powi(4));
    let k10 = k.powi(10);
    let mut report =
        BilReport { worst_constant: 0.0, checked: 0, excluded: 0, bilinear_points: 0, transverse_set_sizes: Vec::new() };
    for s in samples {
        let pieces: Vec<Complex64> = s.tangent.iter().zip(&s.transverse).map(|(a, b)| a + b).collect();
        let u: Complex64 = pieces.iter().sum();
        let size = u.norm();
        if pieces.iter().any(|p| p.norm() > broad * size) {
            report.excluded += 1;
            continue;
        }
        let in_i: Vec<bool> = s.tangent.iter().map(|t| t.norm() <= size / k10).collect();
        let trans: Complex64 = s.transverse.iter().zip(&in_i).filter(|(_, &keep)| keep).map(|(v, _)| v).sum();
        let bil = bilinear_tangent_term(layout, &s.tangent);
        let heavy: Vec<usize> = (0..caps).filter(|&i| !in_i[i]).collect();
        if heavy.iter().any(|&i| heavy.iter().any(|&j| layout.distance(i, j) >= layout.radius)) {
            report.bilinear_points += 1;
        }
        let bound = trans.norm() + k10 * bil;
        let c = if size == 0.0 {
            0.0
        } else if bound == 0.0 {
            f64::INFINITY
        } else {
            size / bound
        };
        report.worst_constant = report.worst_constant.max(c);
        report.checked += 1;
        report.transverse_set_sizes.push(in_i.iter().filter(|&&b| b).count());
    }
    if report.checked == 0 && !samples.is_empty() {
        return Err(Error::PreconditionFailed);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(n: usize) -> CapLayout {
        CapLayout { centers: (0..n).map(|i| [i as f64 * 0.25, 0.0]).collect(), radius: 1.0 / 16.0 }
    }

    #[test]
    fn all_transverse_reduces_to_identity() {
        let l = layout(4);
        let s = CapSample {
            tangent: vec![Complex64::new(0.0, 0.0); 4],
            transverse: vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5), Complex64::new(0.3, -0.2), Complex64::new(0.7, 0.1)],
        };
        let rep = bil_decomposition_check(&l, &[s], 16.0, 0.5).unwrap();
        assert_eq!(rep.checked, 1);
        assert!((rep.worst_constant - 1.0).abs() < 1e-15);
        assert_eq!(rep.transverse_set_sizes, vec![4]);
    }

    #[test]
    fn two_tangent_caps_use_the_bilinear_term() {
        let l = CapLayout { centers: vec![[0.0, 0.0], [0.5, 0.0]], radius: 1.0 / 16.0 };
        let s = CapSample {
            tangent: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
            transverse: vec![Complex64::new(0.0, 0.0); 2],
        };
        let rep = bil_decomposition_check(&l, &[s], 16.0, 0.5).unwrap();
        assert_eq!(rep.bilinear_points, 1);
        assert!(rep.worst_constant < 1e-11);
    }

    #[test]
    fn concentrated_points_are_excluded() {
        let l = layout(2);
        let s = CapSample {
            tangent: vec![Complex64::new(0.0, 0.0); 2],
            transverse: vec![Complex64::new(1.0, 0.0), Complex64::new(-0.9, 0.0)],
        };
        assert!(matches!(bil_decomposition_check(&l, &[s], 16.0, 0.5), Err(Error::PreconditionFailed)));
    }
}

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Least-squares line through log-log data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in natural-log units.
    pub max_residual: f64,
    /// `(ln scale, ln value)` pairs the fit was computed from.
    pub points: Vec<(f64, f64)>,
}

impl ExponentFit {
    pub fn predict(&self, scale: f64) -> f64 {
        (self.intercept + self.slope * scale.ln()).exp()
    }
}

/// Fits `value ~ C scale^slope`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(s, v)| !(s > 0.0) || !(v > 0.0) || !s.is_finite() || !v.is_finite()) {
        return Err(Error::DegenerateInput("scales and values must be positive and finite".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(s, v)| (s.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) {
        return Err(Error::DegenerateInput("scales are not distinct".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs.iter().map(|p| (p.1 - intercept - slope * p.0).abs()).fold(0.0, f64::max);
    Ok(ExponentFit { slope, intercept, max_residual, points: logs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_law() {
        let fit = fit_exponent(&[(2.0, 4.0), (4.0, 16.0), (8.0, 64.0)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn synthetic_cube_root_decay() {
        let pts: Vec<_> = [2.0, 4.0, 8.0, 16.0, 32.0].iter().map(|&s: &f64| (s, 3.0 * s.powf(-1.0 / 3.0))).collect();
        let fit = fit_exponent(&pts).unwrap();
        assert!((fit.slope + 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.predict(10.0) - 3.0 * 10f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_exponent(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
        assert!(fit_exponent(&[(1.0, -1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
    }
}

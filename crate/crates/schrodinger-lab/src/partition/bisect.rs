use super::poly::{monomial_exponents, space_dimension};
use super::wall::{sample_zero_set, DomainBox};
use super::{sign_string, sign_vector, MassField, PartitionPolynomial, Polynomial, TIE_TOLERANCE};
use crate::rng::{seeded, standard_normal, LabRng};
use crate::{Error, Result};
use serde::Serialize;

/// Default relative bisection tolerance on `|G_j| / ||W_j||`.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// Smallest admissible `|grad P|` (normalised coordinates) at sampled zeros.
const SINGULAR_GRADIENT: f64 = 1e-8;

const SMOOTHING: [f64; 10] = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 5e-3, 2e-3, 1e-3, 5e-4];

#[derive(Clone, Debug, PartialEq)]
pub struct BisectOptions {
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, restarts: 64, seed: 0 }
    }
}

/// Positive-weight samples of one weight, with basis values in normalised coordinates.
struct Samples {
    basis: Vec<f64>,
    weight: Vec<f64>,
    groups: Vec<(usize, usize)>,
    point_weight: f64,
    time_weight: f64,
    mass: f64,
}

struct Frame {
    center: Vec<f64>,
    scale: f64,
}

impl Frame {
    fn of(weights: &[MassField]) -> Self {
        let vars = weights[0].spatial_dim + 1;
        let mut lo = vec![f64::INFINITY; vars];
        let mut hi = vec![f64::NEG_INFINITY; vars];
        for w in weights {
            let (a, b) = w.bounding_box();
            for i in 0..vars {
                lo[i] = lo[i].min(a[i]);
                hi[i] = hi[i].max(b[i]);
            }
        }
        let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let scale = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).fold(0.0, f64::max);
        Self { center, scale: if scale > 0.0 { scale } else { 1.0 } }
    }
}

impl Samples {
    fn new(w: &MassField, frame: &Frame, basis: &[Vec<u32>], r: f64) -> Self {
        let nt = w.times.len();
        let mut out = Samples {
            basis: Vec::new(),
            weight: Vec::new(),
            groups: Vec::new(),
            point_weight: w.point_weight,
            time_weight: w.time_weight,
            mass: w.mixed_mass(r, None),
        };
        for i in 0..w.points.len() {
            let start = out.weight.len();
            for j in 0..nt {
                let v = w.values[i * nt + j];
                if v <= 0.0 {
                    continue;
                }
                let p = w.sample_point(i * nt + j);
                let u: Vec<f64> = p.iter().zip(&frame.center).map(|(x, c)| (x - c) / frame.scale).collect();
                out.basis.extend(
                    basis.iter().map(|e| e.iter().zip(&u).map(|(&k, &x)| x.powi(k as i32)).product::<f64>()),
                );
                out.weight.push(v);
            }
            if out.weight.len() > start {
                out.groups.push((start, out.weight.len()));
            }
        }
        out
    }

    /// Sharp signed mass difference divided by the total mass.
    fn sharp(&self, c: &[f64], r: f64) -> f64 {
        let m = c.len();
        let mut g = 0.0;
        for &(a, b) in &self.groups {
            let (mut pos, mut neg) = (0.0, 0.0);
            for s in a..b {
                let row = &self.basis[s * m..(s + 1) * m];
                let (mut v, mut mag) = (0.0, 0.0);
                for (x, y) in row.iter().zip(c) {
                    v += x * y;
                    mag += (x * y).abs();
                }
                if v.abs() <= TIE_TOLERANCE * mag.max(f64::MIN_POSITIVE) {
                    continue;
                }
                let w = self.weight[s].powf(r);
                if v > 0.0 {
                    pos += w;
                } else {
                    neg += w;
                }
            }
            g += (pos * self.time_weight).powf(1.0 / r) - (neg * self.time_weight).powf(1.0 / r);
        }
        g * self.point_weight / self.mass
    }

    /// Smoothed difference (sign replaced by `tanh(P / eps)`) and its gradient.
    fn smooth(&self, c: &[f64], eps: f64, r: f64) -> (f64, Vec<f64>) {
        let m = c.len();
        let mut g = 0.0;
        let mut grad = vec![0.0; m];
        let mut dp = vec![0.0; m];
        let mut dn = vec![0.0; m];
        for &(a, b) in &self.groups {
            let (mut pos, mut neg) = (0.0, 0.0);
            dp.iter_mut().for_each(|v| *v = 0.0);
            dn.iter_mut().for_each(|v| *v = 0.0);
            for s in a..b {
                let row = &self.basis[s * m..(s + 1) * m];
                let v: f64 = row.iter().zip(c).map(|(x, y)| x * y).sum();
                let th = (v / eps).tanh();
                let (sp, sn) = (0.5 * (1.0 + th), 0.5 * (1.0 - th));
                let slope = 0.5 * (1.0 - th * th) / eps;
                let w = self.weight[s];
                pos += (sp * w).powf(r);
                neg += (sn * w).powf(r);
                let kp = (sp * w).powf(r - 1.0) * w * slope;
                let kn = (sn * w).powf(r - 1.0) * w * slope;
                for (i, x) in row.iter().enumerate() {
                    dp[i] += kp * x;
                    dn[i] += kn * x;
                }
            }
            let (pos, neg) = (pos * self.time_weight, neg * self.time_weight);
            g += pos.powf(1.0 / r) - neg.powf(1.0 / r);
            let fp = if pos > 1e-300 { pos.powf(1.0 / r - 1.0) * self.time_weight } else { 0.0 };
            let fn_ = if neg > 1e-300 { neg.powf(1.0 / r - 1.0) * self.time_weight } else { 0.0 };
            for i in 0..m {
                grad[i] += fp * dp[i] + fn_ * dn[i];
            }
        }
        let k = self.point_weight / self.mass;
        (g * k, grad.into_iter().map(|v| v * k).collect())
    }
}

fn normalized(mut c: Vec<f64>) -> Vec<f64> {
    let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        c.iter_mut().for_each(|v| *v /= n);
    }
    c
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solve the small dense system `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Move the constant coefficient so that a single weight is bisected; the sharp
/// functional is monotone in the constant, so plain bisection applies.
fn balance_constant(sample: &Samples, c: &mut [f64], r: f64, tol: f64) -> f64 {
    let base = c[0];
    let bound = c.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    let mut best = (f64::INFINITY, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        c[0] = base + mid;
        let g = sample.sharp(c, r);
        if g.abs() < best.0 {
            best = (g.abs(), mid);
        }
        if g.abs() <= tol || hi - lo <= 1e-15 * bound {
            break;
        }
        if g > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    c[0] = base + best.1;
    best.0
}

/// Damped least-squares (Levenberg-Marquardt) on the smoothed functionals at a fixed
/// smoothing width; the coefficient vector is kept on the unit sphere.
fn levenberg_marquardt(samples: &[Samples], c: &mut Vec<f64>, eps: f64, r: f64, target: f64) {
    let eval = |c: &[f64]| -> (Vec<f64>, Vec<Vec<f64>>) { samples.iter().map(|s| s.smooth(c, eps, r)).unzip() };
    let (mut f, mut jac) = eval(c);
    let mut lambda = 1e-3;
    for _ in 0..60 {
        if max_abs(&f) <= target {
            break;
        }
        let n = samples.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = jac[i].iter().zip(&jac[j]).map(|(x, y)| x * y).sum();
            }
        }
        let diag = (0..n).map(|i| a[i][i]).fold(0.0, f64::max).max(1e-300);
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += lambda * diag;
        }
        let Some(y) = solve(a, f.clone()) else { break };
        let mut trial = c.clone();
        for (k, t) in trial.iter_mut().enumerate() {
            *t -= (0..n).map(|i| jac[i][k] * y[i]).sum::<f64>();
        }
        let trial = normalized(trial);
        let (tf, tj) = eval(&trial);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        if norm(&tf) < norm(&f) {
            *c = trial;
            f = tf;
            jac = tj;
            lambda = (lambda / 3.0).max(1e-12);
        } else {
            lambda *= 5.0;
            if lambda > 1e10 {
                break;
            }
        }
    }
}

/// Sharp residual over all weights.
fn sharp_residual(samples: &[Samples], c: &[f64], r: f64) -> f64 {
    samples.iter().map(|s| s.sharp(c, r).abs()).fold(0.0, f64::max)
}

/// Two weights: rotate the non-constant part through the half circle
/// `cos(phi) a + sin(phi) b`, balance the first weight with the constant term at each
/// angle, and bisect the angle on the second weight's sign. Negating the polynomial
/// negates the second functional, so a sign change on `[0, pi]` always exists; the
/// angle bisection resolves it down to single samples.
fn rotation_scan(samples: &[Samples], start: &[f64], rng: &mut LabRng, r: f64, tol: f64) -> (Vec<f64>, f64) {
    let m = start.len();
    let mut a: Vec<f64> = start.to_vec();
    a[0] = 0.0;
    let a = normalized(a);
    let mut b: Vec<f64> = (0..m).map(|k| if k == 0 { 0.0 } else { standard_normal(rng) }).collect();
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    b.iter_mut().zip(&a).for_each(|(y, x)| *y -= dot * x);
    let b = normalized(b);
    let at = |phi: f64| -> (Vec<f64>, f64, f64) {
        let mut c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| phi.cos() * x + phi.sin() * y).collect();
        let first = balance_constant(&samples[0], &mut c, r, 0.25 * tol);
        let second = samples[1].sharp(&c, r);
        (c, first, second)
    };
    const STEPS: usize = 48;
    let mut best = (a.clone(), f64::INFINITY);
    let mut prev = at(0.0);
    let mut prev_phi = 0.0;
    for k in 1..=STEPS {
        let phi = std::f64::consts::PI * k as f64 / STEPS as f64;
        let cur = at(phi);
        for probe in [&prev, &cur] {
            let res = probe.1.max(probe.2.abs());
            if res < best.1 {
                best = (probe.0.clone(), res);
            }
        }
        if best.1 <= tol {
            return best;
        }
        if (prev.2 > 0.0) != (cur.2 > 0.0) {
            let (mut lo, mut hi, lo_sign) = (prev_phi, phi, prev.2 > 0.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let probe = at(mid);
                let res = probe.1.max(probe.2.abs());
                if res < best.1 {
                    best = (probe.0.clone(), res);
                }
                if best.1 <= tol {
                    return best;
                }
                if (probe.2 > 0.0) == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        prev = cur;
        prev_phi = phi;
    }
    best
}

/// Newton-type correction of the sharp residual using the smoothed Jacobian at width
/// `eps`, with step halving; used after continuation to move the zero set off sample
/// rows that the smoothed functional cannot resolve.
fn sharp_polish(samples: &[Samples], c: &mut Vec<f64>, eps: f64, r: f64, tol: f64) {
    let n = samples.len();
    let mut res = sharp_residual(samples, c, r);
    for _ in 0..40 {
        if res <= tol {
            return;
        }
        let g: Vec<f64> = samples.iter().map(|s| s.sharp(c, r)).collect();
        let jac: Vec<Vec<f64>> = samples.iter().map(|s| s.smooth(c, eps, r).1).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = jac[i].iter().zip(&jac[j]).map(|(x, y)| x * y).sum();
            }
        }
        let diag = (0..n).map(|i| a[i][i]).fold(0.0, f64::max).max(1e-300);
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += 1e-9 * diag;
        }
        let Some(y) = solve(a, g) else { return };
        let step: Vec<f64> = (0..c.len()).map(|k| (0..n).map(|i| jac[i][k] * y[i]).sum()).collect();
        let mut improved = false;
        let mut scale = 1.0;
        for _ in 0..12 {
            let trial = normalized(c.iter().zip(&step).map(|(x, d)| x - scale * d).collect());
            let t = sharp_residual(samples, &trial, r);
            if t < res {
                *c = trial;
                res = t;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            return;
        }
    }
}

/// One attempt from a starting coefficient vector; returns the sharp residual reached.
fn attempt(samples: &[Samples], start: Vec<f64>, rng: &mut LabRng, r: f64, tol: f64) -> (Vec<f64>, f64) {
    let mut c = normalized(start);
    match samples.len() {
        1 => {
            let res = balance_constant(&samples[0], &mut c, r, tol);
            return (normalized(c), res);
        }
        2 => return rotation_scan(samples, &c, rng, r, tol),
        _ => {}
    }
    let mut best = (c.clone(), sharp_residual(samples, &c, r));
    for eps in SMOOTHING {
        if best.1 <= tol {
            break;
        }
        levenberg_marquardt(samples, &mut c, eps, r, 0.25 * tol);
        let mut polished = c.clone();
        sharp_polish(samples, &mut polished, eps, r, tol);
        let res = sharp_residual(samples, &polished, r);
        if res < best.1 {
            best = (polished, res);
        }
    }
    best
}

fn search(
    samples: &[Samples],
    vars: usize,
    degree: u32,
    r: f64,
    opts: &BisectOptions,
    mut accept: impl FnMut(&Polynomial) -> bool,
) -> std::result::Result<(Polynomial, f64), f64> {
    let m = space_dimension(vars, degree);
    let mut rng = seeded(opts.seed);
    let mut best = f64::INFINITY;
    for restart in 0..opts.restarts.max(1) {
        let start: Vec<f64> = if restart == 0 {
            // the first linear monomial u_0
            (0..m).map(|k| if k == 1 { 1.0 } else { 0.0 }).collect()
        } else {
            (0..m).map(|_| standard_normal(&mut rng)).collect()
        };
        let (c, res) = attempt(samples, start, &mut rng, r, opts.tolerance);
        best = best.min(res);
        if res <= opts.tolerance {
            let poly = Polynomial::from_coefficients(vars, degree, &c).expect("basis size");
            if accept(&poly) {
                return Ok((poly, res));
            }
        }
    }
    Err(best)
}

fn check_weights(weights: &[MassField], degree: u32, r: f64) -> Result<usize> {
    if weights.is_empty() {
        return Err(Error::InvalidParameter("no weights to bisect".into()));
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must be at least 1")));
    }
    let vars = weights[0].spatial_dim + 1;
    if weights.iter().any(|w| w.spatial_dim + 1 != vars) {
        return Err(Error::InvalidParameter("weights of different dimensions".into()));
    }
    let dim = space_dimension(vars, degree);
    if weights.len() + 1 > dim {
        return Err(Error::InvalidParameter(format!(
            "{} weights need a basis of dimension > {}, degree {degree} gives {dim}",
            weights.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.mixed_mass(r, None) > 0.0)) {
        return Err(Error::InvalidParameter("every weight needs positive mass".into()));
    }
    Ok(vars)
}

/// Whether every sampled zero of the factor inside the weights' box is non-singular.
fn non_singular(poly: &Polynomial, frame: &Frame, spatial_dim: usize) -> bool {
    let single = PartitionPolynomial {
        spatial_dim,
        degree_bound: poly.degree,
        center: frame.center.clone(),
        scale: frame.scale,
        factors: vec![poly.clone()],
    };
    let lower: Vec<f64> = frame.center.iter().map(|c| c - frame.scale).collect();
    let upper: Vec<f64> = frame.center.iter().map(|c| c + frame.scale).collect();
    let zeros = sample_zero_set(&single, &DomainBox { lower, upper }, frame.scale / 12.0);
    zeros.iter().all(|z| z.gradient_norm > SINGULAR_GRADIENT)
}

/// A single polynomial of degree `<= degree` whose positive and negative sets split the
/// `L^1_x L^r_t` mass of every weight in half, to relative tolerance `opts.tolerance`.
///
/// Coefficients live on the unit sphere of the monomial basis in coordinates normalised
/// to the weights' bounding box. The search starts from `u_0 = x_1` and then from random
/// directions; a failure after `opts.restarts` starts is reported, never hidden.
pub fn ham_sandwich_bisect(
    weights: &[MassField],
    degree: u32,
    r: f64,
    opts: &BisectOptions,
) -> Result<(PartitionPolynomial, Vec<f64>)> {
    let vars = check_weights(weights, degree, r)?;
    let frame = Frame::of(weights);
    let basis = monomial_exponents(vars, degree);
    let samples: Vec<Samples> = weights.iter().map(|w| Samples::new(w, &frame, &basis, r)).collect();
    let spatial_dim = vars - 1;
    match search(&samples, vars, degree, r, opts, |p| non_singular(p, &frame, spatial_dim)) {
        Ok((poly, _)) => {
            let coeffs: Vec<f64> = poly.terms.iter().map(|t| t.coefficient).collect();
            let residuals = samples.iter().map(|s| s.sharp(&coeffs, r)).collect();
            let p = PartitionPolynomial::new(spatial_dim, degree, frame.center, frame.scale, vec![poly])?;
            Ok((p, residuals))
        }
        Err(residual) => Err(Error::BisectionNotFound { step: 1, residual }),
    }
}

/// Factor degrees `d_1, d_2, ..`: step `k` must bisect `2^{k-1}` weights, so `d_k` is the
/// least degree whose polynomial space has dimension above `2^{k-1}`; steps are taken
/// while the product degree stays within `degree_bound`.
pub fn degree_schedule(spatial_dim: usize, degree_bound: u32) -> Vec<u32> {
    let vars = spatial_dim + 1;
    let mut out = Vec::new();
    let mut used = 0;
    loop {
        let need = 1usize << out.len();
        let d = (1..).find(|&d| space_dimension(vars, d) > need).expect("finite degree");
        if used + d > degree_bound {
            return out;
        }
        used += d;
        out.push(d);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartitionOptions {
    pub bisect: BisectOptions,
    /// Number of bisection steps; defaults to the longest schedule within the degree bound.
    pub steps: Option<usize>,
}

/// Sign-vector cell of a partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub id: u64,
    pub sign_vector: Vec<bool>,
    /// `||chi_O W||_{L^1_x L^r_t}`.
    pub mass: f64,
    /// Sample membership, indexed like the mass field's values.
    #[serde(skip)]
    pub mask: Vec<bool>,
}

impl Cell {
    pub fn signs(&self) -> String {
        sign_string(&self.sign_vector)
    }

    /// Run-length encoding of the mask: `(start, length)` of each run of members.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.mask.len() {
            if self.mask[i] {
                let start = i;
                while i < self.mask.len() && self.mask[i] {
                    i += 1;
                }
                out.push((start, i - start));
            } else {
                i += 1;
            }
        }
        out
    }

    pub fn from_runs(id: u64, factors: usize, mass: f64, len: usize, runs: &[(usize, usize)]) -> Result<Self> {
        let mut mask = vec![false; len];
        for &(start, n) in runs {
            let slot = mask
                .get_mut(start..start + n)
                .ok_or_else(|| Error::Format(format!("run {start}+{n} exceeds mask length {len}")))?;
            slot.iter_mut().for_each(|m| *m = true);
        }
        Ok(Self { id, sign_vector: sign_vector(id, factors), mass, mask })
    }
}

#[derive(Clone, Debug)]
pub struct PartitionResult {
    pub polynomial: PartitionPolynomial,
    pub cells: Vec<Cell>,
    /// Largest relative bisection residual of each step.
    pub residuals: Vec<f64>,
    pub total_mass: f64,
    /// Mass on samples where some factor vanishes (assigned to no cell).
    pub tie_mass: f64,
    pub r: f64,
}

impl PartitionResult {
    /// `max_i ||W|| / ||chi_{O_i} W||`.
    pub fn balance(&self) -> f64 {
        self.cells.iter().map(|c| self.total_mass / c.mass).fold(0.0, f64::max)
    }

    /// Smallest cell share `min_i ||chi_{O_i} W|| / ||W||`.
    pub fn min_share(&self) -> f64 {
        self.cells.iter().map(|c| c.mass / self.total_mass).fold(f64::INFINITY, f64::min)
    }
}

/// Iterated bisection: step `k` bisects the `2^{k-1}` cell-restricted weights of the
/// previous factors at once, producing `2^s` sign-vector cells of comparable mass.
pub fn polynomial_partition(w: &MassField, degree_bound: u32, r: f64, opts: &PartitionOptions) -> Result<PartitionResult> {
    if degree_bound == 0 {
        return Err(Error::InvalidParameter("degree bound must be at least 1".into()));
    }
    let total_mass = w.mixed_mass(r, None);
    if !(total_mass > 0.0) {
        return Err(Error::InvalidParameter("mass field has no mass".into()));
    }
    let mut schedule = degree_schedule(w.spatial_dim, degree_bound);
    if let Some(steps) = opts.steps {
        if steps > schedule.len() || steps == 0 {
            return Err(Error::InvalidParameter(format!(
                "{steps} steps do not fit in degree {degree_bound} (at most {})",
                schedule.len()
            )));
        }
        schedule.truncate(steps);
    }
    let vars = w.spatial_dim + 1;
    let frame = Frame::of(std::slice::from_ref(w));
    let points: Vec<Vec<f64>> = (0..w.len()).map(|i| w.sample_point(i)).collect();
    let mut factors: Vec<Polynomial> = Vec::new();
    let mut residuals = Vec::new();
    // cell id per sample; None marks a tie with an earlier factor
    let mut labels: Vec<Option<u64>> = vec![Some(0); w.len()];
    for (step, &degree) in schedule.iter().enumerate() {
        let cells = 1u64 << step;
        let weights: Vec<MassField> = (0..cells)
            .map(|id| w.masked(&labels.iter().map(|l| *l == Some(id)).collect::<Vec<_>>()))
            .filter(|m| m.mixed_mass(r, None) > 0.0)
            .collect();
        let basis = monomial_exponents(vars, degree);
        let samples: Vec<Samples> = weights.iter().map(|m| Samples::new(m, &frame, &basis, r)).collect();
        let bisect = BisectOptions { seed: opts.bisect.seed.wrapping_add(step as u64), ..opts.bisect.clone() };
        let accepted = search(&samples, vars, degree, r, &bisect, |p| {
            non_singular(p, &frame, w.spatial_dim) && factors.iter().all(|q| !q.is_proportional_to(p))
        });
        let (poly, _) = accepted.map_err(|residual| Error::BisectionNotFound { step: step + 1, residual })?;
        let coeffs: Vec<f64> = poly.terms.iter().map(|t| t.coefficient).collect();
        residuals.push(samples.iter().map(|s| s.sharp(&coeffs, r).abs()).fold(0.0, f64::max));
        let single = PartitionPolynomial {
            spatial_dim: w.spatial_dim,
            degree_bound: degree,
            center: frame.center.clone(),
            scale: frame.scale,
            factors: vec![poly.clone()],
        };
        for (label, p) in labels.iter_mut().zip(&points) {
            *label = match (*label, single.cell_id(p)) {
                (Some(id), Some(bit)) => Some(id | bit << step),
                _ => None,
            };
        }
        factors.push(poly);
    }
    let polynomial = PartitionPolynomial::new(w.spatial_dim, degree_bound, frame.center, frame.scale, factors)?;
    let s = schedule.len();
    let cells: Vec<Cell> = (0..1u64 << s)
        .map(|id| {
            let mask: Vec<bool> = labels.iter().map(|l| *l == Some(id)).collect();
            Cell { id, sign_vector: sign_vector(id, s), mass: w.mixed_mass(r, Some(&mask)), mask }
        })
        .collect();
    let ties: Vec<bool> = labels.iter().map(|l| l.is_none()).collect();
    let tie_mass = w.mixed_mass(r, Some(&ties));
    Ok(PartitionResult { polynomial, cells, residuals, total_mass, tie_mass, r })
}

use super::{build_packet_spread, build_sparse_focusing, FocusingParams, PACKET_KAPPA};
use crate::field::{fit_exponent, ExponentFit, GridSpec, SpectralField, SupportBall};
use crate::partition::{
    cells_entered_by_line, polynomial_partition, DomainBox, Line, MassField, PartitionOptions, PartitionPolynomial,
    Polynomial,
};
use crate::rng::{random_band_limited, seeded_stream, standard_normal, unit_phase, LabRng};
use crate::strichartz::{
    bilinear_refined_ratio, cap_pieces, cube_power_sums, decoupling_ratio, dyadic_pigeonhole, refined_strichartz_ratio,
    CubeUnion,
};
use crate::wavepacket::{TileIndex, WavePacketFrame};
use crate::partition::space_dimension;
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// The named scaling experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    SigmaLaw,
    FocusingLaw,
    DecouplingGrowth,
    BilinearLaw,
    PartitionBalance,
    CrossingBound,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::SigmaLaw,
        Experiment::FocusingLaw,
        Experiment::DecouplingGrowth,
        Experiment::BilinearLaw,
        Experiment::PartitionBalance,
        Experiment::CrossingBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SigmaLaw => "sigma_law",
            Experiment::FocusingLaw => "focusing_law",
            Experiment::DecouplingGrowth => "decoupling_growth",
            Experiment::BilinearLaw => "bilinear_law",
            Experiment::PartitionBalance => "partition_balance",
            Experiment::CrossingBound => "crossing_bound",
        }
    }

    /// Which column the exponent is fitted against, and which column is fitted.
    pub fn fit_axes(self) -> (&'static str, &'static str) {
        match self {
            Experiment::SigmaLaw => ("sigma_or_N", "norm"),
            Experiment::FocusingLaw | Experiment::DecouplingGrowth | Experiment::BilinearLaw => ("R", "ratio"),
            Experiment::PartitionBalance => ("sigma_or_N", "norm"),
            Experiment::CrossingBound => ("M", "norm"),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Parameter grid of a sweep. Fields an experiment does not use are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingGrid {
    pub scales: Vec<f64>,
    /// Packet counts for `sigma_law`.
    pub sigmas: Vec<usize>,
    /// Degrees for `crossing_bound`, bisection steps for `partition_balance`.
    pub degrees: Vec<u32>,
    pub trials: usize,
    pub seed: u64,
    pub focusing: FocusingParams,
}

impl ScalingGrid {
    pub fn default_for(experiment: Experiment) -> Self {
        let powers = |lo: i32, hi: i32| (lo..=hi).map(|e| 2f64.powi(e)).collect::<Vec<_>>();
        let base = Self {
            scales: Vec::new(),
            sigmas: Vec::new(),
            degrees: Vec::new(),
            trials: 1,
            seed: 0,
            focusing: FocusingParams::default(),
        };
        match experiment {
            Experiment::SigmaLaw => Self { scales: vec![1024.0], sigmas: vec![2, 4, 8, 16, 32], ..base },
            Experiment::FocusingLaw => Self { scales: powers(8, 11), ..base },
            Experiment::DecouplingGrowth => Self { scales: powers(8, 12), trials: 20, ..base },
            Experiment::BilinearLaw => Self { scales: powers(8, 10), trials: 4, ..base },
            Experiment::PartitionBalance => Self { scales: vec![64.0], degrees: vec![1, 2, 3], trials: 10, ..base },
            Experiment::CrossingBound => Self { scales: vec![64.0], degrees: vec![2, 3, 4], trials: 1000, ..base },
        }
    }
}

/// One CSV row; quantities an experiment does not define are left empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "sigma_or_N")]
    pub sigma_or_n: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    #[serde(rename = "E")]
    pub e: Option<f64>,
    pub norm: f64,
    pub ratio: f64,
    pub fitted_slope: f64,
}

/// Rows, the exponent fit and experiment-specific diagnostics of one sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingOutcome {
    pub experiment: Experiment,
    pub grid: ScalingGrid,
    pub rows: Vec<ScalingRow>,
    pub fit: ExponentFit,
    /// `(x column, y column)` of the fit.
    pub fit_axes: (String, String),
    pub summary: BTreeMap<String, f64>,
}

/// Runs the named sweep. Grid points run concurrently, each with its own seeded stream,
/// and rows are emitted in grid order, so the outcome depends only on the grid.
pub fn run_scaling_experiment(name: &str, grid: &ScalingGrid) -> Result<ScalingOutcome> {
    let experiment: Experiment = name.parse()?;
    if grid.scales.is_empty() || grid.scales.iter().any(|&r| !(r >= 2.0) || r.log2().fract() != 0.0) {
        return Err(Error::InvalidParameter("scales must be powers of two, at least 2".into()));
    }
    let mut summary = BTreeMap::new();
    let mut rows = match experiment {
        Experiment::SigmaLaw => sigma_law(grid, &mut summary)?,
        Experiment::FocusingLaw => focusing_law(grid, &mut summary)?,
        Experiment::DecouplingGrowth => decoupling_growth(grid, &mut summary)?,
        Experiment::BilinearLaw => bilinear_law(grid, &mut summary)?,
        Experiment::PartitionBalance => partition_balance(grid, &mut summary)?,
        Experiment::CrossingBound => crossing_bound(grid, &mut summary)?,
    };
    let (x_axis, y_axis) = experiment.fit_axes();
    let pick = |row: &ScalingRow, column: &str| match column {
        "R" => Some(row.r),
        "sigma_or_N" => row.sigma_or_n,
        "M" => row.m,
        "norm" => Some(row.norm),
        _ => Some(row.ratio),
    };
    let points: Vec<(f64, f64)> = rows.iter().filter_map(|row| Some((pick(row, x_axis)?, pick(row, y_axis)?))).collect();
    let fit = fit_exponent(&points)?;
    rows.iter_mut().for_each(|row| row.fitted_slope = fit.slope);
    Ok(ScalingOutcome {
        experiment,
        grid: grid.clone(),
        rows,
        fit,
        fit_axes: (x_axis.to_string(), y_axis.to_string()),
        summary,
    })
}

fn row(r: f64, sigma_or_n: Option<f64>, m: Option<f64>, e: Option<f64>, norm: f64, ratio: f64) -> ScalingRow {
    ScalingRow { r, sigma_or_n, m, e, norm, ratio, fitted_slope: f64::NAN }
}

fn record_max(summary: &mut BTreeMap<String, f64>, key: &str, value: f64) {
    let slot = summary.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
    *slot = slot.max(value);
}

fn record_min(summary: &mut BTreeMap<String, f64>, key: &str, value: f64) {
    let slot = summary.entry(key.to_string()).or_insert(f64::INFINITY);
    *slot = slot.min(value);
}

/// `||e^{it Delta} g||_{L^6(Y)}` for `sigma` spread packets; the fit is against `sigma`.
fn sigma_law(grid: &ScalingGrid, summary: &mut BTreeMap<String, f64>) -> Result<Vec<ScalingRow>> {
    let points: Vec<(f64, usize)> =
        grid.scales.iter().flat_map(|&r| grid.sigmas.iter().map(move |&s| (r, s))).collect();
    let results = points
        .par_iter()
        .map(|&(r, sigma)| {
            let ex = build_packet_spread(sigma, r)?;
            let refined = refined_strichartz_ratio(&ex.g, &ex.y)?;
            Ok((r, sigma, refined, ex.tubes_disjoint()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (r, sigma, refined, disjoint) in results {
        record_max(summary, "max_cube_spread", refined.cube_spread);
        record_min(summary, "tubes_disjoint", if disjoint { 1.0 } else { 0.0 });
        rows.push(row(r, Some(sigma as f64), None, None, refined.norm, refined.ratio));
    }
    Ok(rows)
}

/// Focusing height `H / ||g||_{L^2([0,R])}` of the lattice-frequency example against `R`.
fn focusing_law(grid: &ScalingGrid, summary: &mut BTreeMap<String, f64>) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for &r in &grid.scales {
        let ex = build_sparse_focusing(r, grid.focusing)?;
        let count = ex.squares.len() as f64;
        record_min(summary, "min_X_over_R3/2", count / r.powf(1.5));
        record_max(summary, "max_X_over_R3/2", count / r.powf(1.5));
        record_max(summary, "max_density_over_R1/2", ex.per_ball_density as f64 / r.sqrt());
        record_max(summary, "max_strichartz_consistency", ex.strichartz_consistency());
        rows.push(row(r, Some(count), None, None, ex.height, ex.relative_height()));
    }
    Ok(rows)
}

/// Decoupling ratio of random-coefficient data on the unit ball, one row per trial.
fn decoupling_growth(grid: &ScalingGrid, summary: &mut BTreeMap<String, f64>) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for (i, &r) in grid.scales.iter().enumerate() {
        let field_grid = GridSpec::standard(1, r)?;
        let mut total = 0.0;
        for trial in 0..grid.trials {
            let mut rng = seeded_stream(grid.seed, (i * grid.trials + trial) as u64);
            let f = random_band_limited(&field_grid, SupportBall::unit(), &mut rng);
            let pieces = cap_pieces(&f, r)?;
            let report = decoupling_ratio(&f, &pieces, r)?;
            total += report.ratio;
            rows.push(row(r, Some(pieces.len() as f64), None, None, report.norm, report.ratio));
        }
        summary.insert(format!("mean_ratio_R{r}"), total / grid.trials.max(1) as f64);
    }
    Ok(rows)
}

/// Two transverse packet families; `Y` is the dyadic class of cubes carrying most of the
/// bilinear mass, and the bilinear refined ratio is reported per trial.
fn bilinear_law(grid: &ScalingGrid, summary: &mut BTreeMap<String, f64>) -> Result<Vec<ScalingRow>> {
    let points: Vec<(usize, f64, usize)> = grid
        .scales
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| (0..grid.trials).map(move |t| (i, r, t)))
        .collect();
    let results = points
        .par_iter()
        .map(|&(i, r, trial)| {
            let mut rng = seeded_stream(grid.seed, (i * grid.trials + trial) as u64);
            let (f1, f2) = transverse_families(r, &mut rng)?;
            let full = CubeUnion::full(1, r)?;
            let sums = cube_power_sums(&[&f1, &f2], &[3.0, 3.0], &full)?;
            let norms: Vec<f64> = sums.iter().map(|s| s.powf(1.0 / 6.0)).collect();
            let reference = norms.iter().copied().fold(0.0, f64::max);
            let class = dyadic_pigeonhole(&norms, &sums, r, reference)?;
            let cubes: Vec<_> = full.cubes.iter().enumerate().filter(|(k, _)| class.members.contains(k)).map(|(_, &c)| c).collect();
            let y = CubeUnion::new(1, r, cubes)?;
            let ratio = bilinear_refined_ratio(&f1, &f2, &y, BILINEAR_SEPARATION)?;
            Ok((r, ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (r, b) in results {
        record_max(summary, "max_holder_excess", b.norm / (b.linear_norms[0] * b.linear_norms[1]).sqrt());
        record_max(summary, "max_ratio", b.ratio);
        record_max(summary, "max_cube_spread", b.cube_spread);
        rows.push(row(r, Some(b.cubes as f64), Some(b.m), None, b.norm, b.ratio));
    }
    Ok(rows)
}

/// Required gap between the two families' Fourier supports.
const BILINEAR_SEPARATION: f64 = 0.1;
/// Packets per family.
const FAMILY_SIZE: usize = 4;
/// Target frequency offset of each family from the origin.
const FAMILY_OFFSET: f64 = 0.3;

/// Families of `FAMILY_SIZE` packets at frequencies near `-FAMILY_OFFSET` and
/// `+FAMILY_OFFSET`, with centres spread over `[-R/2, R/2]` and random phases.
fn transverse_families(r: f64, rng: &mut LabRng) -> Result<(SpectralField, SpectralField)> {
    let field_grid = GridSpec::standard(1, r)?;
    let frame = WavePacketFrame::new(&field_grid, PACKET_KAPPA)?;
    let m = (FAMILY_OFFSET / frame.theta_spacing).round().max(1.0) as i64;
    let family = |theta: i64, rng: &mut LabRng| -> Result<SpectralField> {
        let mut f = SpectralField::zeros(field_grid.clone());
        let mut support = None;
        for k in 0..FAMILY_SIZE {
            let x = -0.5 * r + (k as f64 + 0.5) * r / FAMILY_SIZE as f64;
            let nu = (x / frame.nu_side).round() as i64;
            let packet = frame.packet(&frame.tile(TileIndex { theta: [theta, 0], nu: [nu, 0] }));
            support = packet.support;
            f = f.plus(&packet.scaled(unit_phase(rng)))?;
        }
        f.support = support;
        Ok(f)
    };
    let f1 = family(-m, rng)?;
    let f2 = family(m, rng)?;
    Ok((f1, f2))
}

/// Minimal cell share of the polynomial partition of uniform and random masses, fitted
/// against the number of cells.
fn partition_balance(grid: &ScalingGrid, summary: &mut BTreeMap<String, f64>) -> Result<Vec<ScalingRow>> {
    let mut points = Vec::new();
    for (i, &r) in grid.scales.iter().enumerate() {
        for &steps in &grid.degrees {
            for trial in 0..=grid.trials {
                points.push((i, r, steps as usize, trial));
            }
        }
    }
    let results = points
        .par_iter()
        .map(|&(i, r, steps, trial)| {
            let mut rng = seeded_stream(grid.seed, (i * 1_000_003 + steps * 10_007 + trial) as u64);
            // Trial 0 is the uniform mass; the others are independent random masses.
            let w = MassField::on_box(1, r, r, 64, 1024, |_, _| if trial == 0 { 1.0 } else { rng.gen::<f64>() })?;
            let opts = PartitionOptions { steps: Some(steps), ..Default::default() };
            let part = polynomial_partition(&w, PARTITION_DEGREE_BOUND, 1.0, &opts)?;
            let residual = part.residuals.iter().copied().fold(0.0, f64::max);
            Ok((r, part.cells.len(), part.min_share(), residual, part.polynomial.degree()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (r, cells, share, residual, degree) in results {
        record_min(summary, "min_share_times_cells", share * cells as f64);
        record_max(summary, "max_residual", residual);
        rows.push(row(r, Some(cells as f64), Some(degree as f64), None, share, share * cells as f64));
    }
    Ok(rows)
}

/// Degree budget large enough for four bisection steps in one spatial dimension.
const PARTITION_DEGREE_BOUND: u32 = 8;

/// Cells entered by random lines for random products of factors of total degree `D`.
/// Each row reports the worst trial at one `(R, D)`; `M` holds the bound `D + 1`.
fn crossing_bound(grid: &ScalingGrid, summary: &mut BTreeMap<String, f64>) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    let mut violations = 0usize;
    let mut degenerate = 0usize;
    for (i, &r) in grid.scales.iter().enumerate() {
        for &d in &grid.degrees {
            let outcomes = (0..grid.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = seeded_stream(grid.seed, ((i * 16 + d as usize) * 1_000_000 + trial) as u64);
                    let spatial_dim = 1 + trial % 2;
                    let p = random_product(spatial_dim, d, r, &mut rng)?;
                    let domain = DomainBox::space_time(spatial_dim, r);
                    let origin: Vec<f64> =
                        domain.lower.iter().zip(&domain.upper).map(|(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect();
                    let direction: Vec<f64> = (0..=spatial_dim).map(|_| standard_normal(&mut rng)).collect();
                    let crossing = cells_entered_by_line(&p, &Line { origin, direction }, &domain)?;
                    Ok((crossing.cells, crossing.is_degenerate()))
                })
                .collect::<Result<Vec<_>>>()?;
            let worst = outcomes.iter().map(|o| o.0).max().unwrap_or(0);
            violations += outcomes.iter().filter(|o| o.0 > d as usize + 1).count();
            degenerate += outcomes.iter().filter(|o| o.1).count();
            let bound = (d + 1) as f64;
            rows.push(row(r, Some(d as f64), Some(bound), None, worst as f64, worst as f64 / bound));
        }
    }
    summary.insert("violations".into(), violations as f64);
    summary.insert("degenerate_lines".into(), degenerate as f64);
    Ok(rows)
}

/// Product of Gaussian-coefficient factors whose degrees form a random composition of `d`,
/// normalised to the space-time box of scale `r`.
fn random_product(spatial_dim: usize, d: u32, r: f64, rng: &mut LabRng) -> Result<PartitionPolynomial> {
    let vars = spatial_dim + 1;
    let mut factors = Vec::new();
    let mut left = d;
    while left > 0 {
        let deg = rng.gen_range(1..=left);
        let coeffs: Vec<f64> = (0..space_dimension(vars, deg)).map(|_| standard_normal(rng)).collect();
        factors.push(Polynomial::from_coefficients(vars, deg, &coeffs)?);
        left -= deg;
    }
    let mut center = vec![0.0; vars];
    center[spatial_dim] = 0.5 * r;
    PartitionPolynomial::new(spatial_dim, d, center, r, factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_and_unknown_is_rejected() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!(matches!("nope".parse::<Experiment>(), Err(Error::UnknownExperiment(_))));
        let grid = ScalingGrid::default_for(Experiment::SigmaLaw);
        assert!(matches!(run_scaling_experiment("nope", &grid), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn crossing_sweep_is_clean_and_deterministic() {
        let grid = ScalingGrid { trials: 50, ..ScalingGrid::default_for(Experiment::CrossingBound) };
        let a = run_scaling_experiment("crossing_bound", &grid).unwrap();
        let b = run_scaling_experiment("crossing_bound", &grid).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.summary["violations"], 0.0);
        assert_eq!(a.rows.len(), 3);
    }
}

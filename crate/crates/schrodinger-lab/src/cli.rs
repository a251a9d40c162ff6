//! Command-line front end: `run`, `decompose`, `partition`, `propagate` and `report`.
//!
//! Exit codes: 0 on success, 2 for an unknown experiment, 3 for an empty input, 1 for
//! any other failure. Failures print a one-line JSON object `{"error": .., "kind": ..}`
//! on standard error.

use crate::experiments::{run_scaling_experiment, Experiment, FocusingParams, ScalingGrid, ScalingOutcome};
use crate::field::{propagate, SpectralField};
use crate::io::{
    git_revision, loglog_svg, parse_key_values, read_field, read_mass, write_coefficients, write_evolved,
    write_scaling_csv, FieldFile, Manifest, PartitionFile, RunDirectory, RunStatus,
};
use crate::partition::{polynomial_partition, PartitionOptions};
use crate::wavepacket::{decompose, reconstruct, WavePacketFrame, DEFAULT_KAPPA};
use crate::{Error, Result};
use clap::{Parser, Subcommand};
use serde_json::json;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "schrodinger-lab", version, about = "Schrodinger maximal-estimate experiments")]
pub struct Cli {
    /// Random seed (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides the config file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for the numerical kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a named scaling experiment and write CSV, SVG and manifest.
    Run {
        experiment: String,
        /// Configuration override `key=value`; may be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Permit `delta` to differ from `epsilon^2`.
        #[arg(long)]
        override_delta: bool,
    },
    /// Wave-packet coefficients of a field container, as JSON lines.
    Decompose {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_KAPPA)]
        kappa: f64,
    },
    /// Polynomial partition of a JSON mass field.
    Partition {
        input: PathBuf,
        /// Degree bound `D`.
        #[arg(long)]
        degree: u32,
        /// Time exponent `r` of the mixed mass.
        #[arg(long, default_value_t = 1.0)]
        exponent: f64,
    },
    /// Evolve initial data over `[0, R]` and write the solution container.
    Propagate { input: PathBuf },
    /// Summarise a run directory.
    Report { run: PathBuf },
}

/// Resolved configuration of a `run`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: String,
    pub scales: Vec<f64>,
    pub sigmas: Vec<usize>,
    pub degrees: Vec<u32>,
    pub trials: usize,
    /// Cube count, separation scale and tangency parameter knobs, recorded with the run.
    pub n: Option<usize>,
    pub m: Option<f64>,
    pub e: Option<f64>,
    pub k: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub focusing: FocusingParams,
    /// Overrides of the acceptance tolerances, keyed without the `tol.` prefix.
    pub tolerances: BTreeMap<String, f64>,
    /// All keys as resolved, for the manifest.
    pub raw: BTreeMap<String, String>,
}

const KNOWN_KEYS: [&str; 16] = [
    "experiment", "scales", "sigmas", "degrees", "trials", "N", "M", "E", "K", "epsilon", "delta", "delta_override",
    "seed", "out", "lambda", "threshold",
];

impl RunConfig {
    /// Builds a configuration from resolved keys; the experiment's defaults fill the gaps.
    /// `delta` defaults to `epsilon^2` and may only differ with `delta_override = true`.
    pub fn from_keys(keys: &BTreeMap<String, String>) -> Result<Self> {
        for key in keys.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) && !key.starts_with("tol.") {
                return Err(Error::Format(format!("unknown configuration key `{key}`")));
            }
        }
        let experiment = keys.get("experiment").cloned().ok_or_else(|| Error::Format("no experiment named".into()))?;
        let defaults = experiment.parse::<Experiment>().map(ScalingGrid::default_for)?;
        let num = |key: &str| -> Result<Option<f64>> {
            keys.get(key)
                .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("`{key}` = `{v}` is not a number"))))
                .transpose()
        };
        let list = |key: &str| -> Result<Option<Vec<f64>>> {
            keys.get(key)
                .map(|v| {
                    v.split(',')
                        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad entry `{s}` in `{key}`"))))
                        .collect()
                })
                .transpose()
        };
        let whole = |v: f64, key: &str| -> Result<u64> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(Error::Format(format!("`{key}` needs non-negative integers, got {v}")))
            }
        };
        let scales = list("scales")?.unwrap_or(defaults.scales);
        if scales.iter().any(|&r| !(r >= 2.0) || r.log2().fract() != 0.0) {
            return Err(Error::InvalidParameter(format!("scales {scales:?} must be powers of two")));
        }
        let sigmas = match list("sigmas")? {
            Some(v) => v.iter().map(|&s| whole(s, "sigmas").map(|s| s as usize)).collect::<Result<_>>()?,
            None => defaults.sigmas,
        };
        let degrees = match list("degrees")? {
            Some(v) => v.iter().map(|&s| whole(s, "degrees").map(|s| s as u32)).collect::<Result<_>>()?,
            None => defaults.degrees,
        };
        let trials = match num("trials")? {
            Some(v) => whole(v, "trials")? as usize,
            None => defaults.trials,
        };
        let epsilon = num("epsilon")?.unwrap_or(0.1);
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        let override_delta = matches!(keys.get("delta_override").map(String::as_str), Some("true" | "1" | "yes"));
        let delta = match num("delta")? {
            Some(d) if (d - epsilon * epsilon).abs() > 1e-15 && !override_delta => {
                return Err(Error::InvalidParameter(format!(
                    "delta = {d} differs from epsilon^2 = {}; pass --override-delta to allow it",
                    epsilon * epsilon
                )))
            }
            Some(d) => d,
            None => epsilon * epsilon,
        };
        let seed = match num("seed")? {
            Some(v) => whole(v, "seed")?,
            None => 0,
        };
        let mut focusing = FocusingParams::default();
        if let Some(l) = num("lambda")? {
            focusing.lambda = l;
        }
        if let Some(t) = num("threshold")? {
            focusing.threshold = t;
        }
        let mut tolerances = BTreeMap::new();
        for (key, value) in keys.iter().filter(|(k, _)| k.starts_with("tol.")) {
            let v = value.parse::<f64>().map_err(|_| Error::Format(format!("`{key}` = `{value}` is not a number")))?;
            tolerances.insert(key["tol.".len()..].to_string(), v);
        }
        Ok(Self {
            experiment,
            scales,
            sigmas,
            degrees,
            trials,
            n: num("N")?.map(|v| whole(v, "N")).transpose()?.map(|v| v as usize),
            m: num("M")?,
            e: num("E")?,
            k: num("K")?.unwrap_or(16.0),
            epsilon,
            delta,
            seed,
            out: PathBuf::from(keys.get("out").map(String::as_str).unwrap_or("runs")),
            focusing,
            tolerances,
            raw: keys.clone(),
        })
    }

    pub fn grid(&self) -> ScalingGrid {
        ScalingGrid {
            scales: self.scales.clone(),
            sigmas: self.sigmas.clone(),
            degrees: self.degrees.clone(),
            trials: self.trials,
            seed: self.seed,
            focusing: self.focusing,
        }
    }
}

/// Acceptance tolerances recorded with each run; `tol.<name>` keys override them.
pub fn default_tolerances(experiment: Experiment) -> BTreeMap<String, f64> {
    let pairs: &[(&str, f64)] = match experiment {
        Experiment::SigmaLaw => &[("slope_target", -1.0 / 3.0), ("slope_tolerance", 0.1), ("max_residual", 0.15)],
        Experiment::FocusingLaw => &[("slope_target", -5.0 / 12.0), ("slope_tolerance", 0.08)],
        Experiment::DecouplingGrowth => &[("max_slope", 0.1)],
        Experiment::BilinearLaw => &[("max_slope", 0.1), ("max_holder_excess", 1.0)],
        Experiment::PartitionBalance => &[("min_share_times_cells", 0.8), ("max_residual", 1e-3)],
        Experiment::CrossingBound => &[("max_violations", 0.0)],
    };
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Whether an outcome meets its tolerances.
pub fn within_tolerance(outcome: &ScalingOutcome, tol: &BTreeMap<String, f64>) -> bool {
    let get = |k: &str| tol.get(k).copied();
    let fit = &outcome.fit;
    let summary = |k: &str| outcome.summary.get(k).copied().unwrap_or(f64::NAN);
    let mut ok = true;
    if let (Some(target), Some(width)) = (get("slope_target"), get("slope_tolerance")) {
        ok &= (fit.slope - target).abs() <= width;
    }
    if let Some(max) = get("max_slope") {
        ok &= fit.slope <= max;
    }
    match outcome.experiment {
        Experiment::SigmaLaw => ok &= fit.max_residual <= get("max_residual").unwrap_or(f64::INFINITY),
        Experiment::BilinearLaw => ok &= summary("max_holder_excess") <= get("max_holder_excess").unwrap_or(1.0),
        Experiment::PartitionBalance => {
            ok &= summary("min_share_times_cells") >= get("min_share_times_cells").unwrap_or(0.0);
            ok &= summary("max_residual") <= get("max_residual").unwrap_or(f64::INFINITY);
        }
        Experiment::CrossingBound => ok &= summary("violations") <= get("max_violations").unwrap_or(0.0),
        _ => {}
    }
    ok
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnknownExperiment(_) => 2,
        Error::DegenerateInput(_) | Error::EmptyRegion => 3,
        _ => 1,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::UnknownExperiment(_) => "unknown_experiment",
        Error::DegenerateInput(_) | Error::EmptyRegion => "empty_input",
        Error::Format(_) | Error::Json(_) | Error::Csv(_) => "format",
        Error::Io(_) => "io",
        _ => "failure",
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", json!({ "error": err.to_string(), "kind": error_kind(&err) }));
            exit_code(&err)
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        // A pool may already exist when called in-process more than once; that is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs"));
    match &cli.command {
        Command::Run { experiment, overrides, override_delta } => {
            let mut keys = match &cli.config {
                Some(path) => parse_key_values(&fs::read_to_string(path)?)?,
                None => BTreeMap::new(),
            };
            keys.insert("experiment".into(), experiment.clone());
            for o in overrides {
                let (k, v) = o.split_once('=').ok_or_else(|| Error::Format(format!("override `{o}` is not key=value")))?;
                keys.insert(k.trim().to_string(), v.trim().to_string());
            }
            if *override_delta {
                keys.insert("delta_override".into(), "true".into());
            }
            if let Some(seed) = cli.seed {
                keys.insert("seed".into(), seed.to_string());
            }
            if let Some(dir) = &cli.out {
                keys.insert("out".into(), dir.display().to_string());
            }
            let config = RunConfig::from_keys(&keys)?;
            let summary = cmd_run(&config)?;
            println!("{summary}");
            Ok(())
        }
        Command::Decompose { input, kappa } => {
            let f = read_initial(input)?;
            let frame = WavePacketFrame::new(&f.grid, *kappa)?;
            let set = decompose(&f, &frame)?;
            let back = reconstruct(&set);
            let error = back.plus(&f.scaled((-1.0).into()))?.l2_norm() / f.l2_norm().max(f64::MIN_POSITIVE);
            fs::create_dir_all(&out)?;
            let path = out.join(format!("{}.coeffs.jsonl", stem(input)));
            let mut file = std::io::BufWriter::new(fs::File::create(&path)?);
            write_coefficients(&mut file, &set)?;
            drop(file);
            println!(
                "{}",
                json!({ "coefficients": set.len(), "file": path.display().to_string(), "round_trip_error": error, "frame_ratio": set.frame_ratio() })
            );
            Ok(())
        }
        Command::Partition { input, degree, exponent } => {
            let w = read_mass(&mut non_empty(input)?.as_slice())?;
            let part = polynomial_partition(&w, *degree, *exponent, &PartitionOptions::default())?;
            let file = PartitionFile::from_result(&part);
            fs::create_dir_all(&out)?;
            let path = out.join(format!("{}.partition.json", stem(input)));
            fs::write(&path, serde_json::to_string_pretty(&file)? + "\n")?;
            let shares: Vec<f64> = part.cells.iter().map(|c| c.mass / part.total_mass).collect();
            println!("{}", json!({ "cells": part.cells.len(), "shares": shares, "residuals": part.residuals, "file": path.display().to_string() }));
            Ok(())
        }
        Command::Propagate { input } => {
            let f = read_initial(input)?;
            let u = propagate(&f, &f.grid.time_grid())?;
            let norm = f.l2_norm();
            let drift = (0..u.nt())
                .map(|j| {
                    let mass: f64 = u.slice(j).iter().map(|z| z.norm_sqr()).sum::<f64>() * f.grid.cell_volume();
                    (mass.sqrt() - norm).abs() / norm.max(f64::MIN_POSITIVE)
                })
                .fold(0.0, f64::max);
            fs::create_dir_all(&out)?;
            let path = out.join(format!("{}.evolved.bin", stem(input)));
            let mut file = std::io::BufWriter::new(fs::File::create(&path)?);
            write_evolved(&mut file, &u)?;
            drop(file);
            println!("{}", json!({ "rows": u.nt(), "unitarity_drift": drift, "file": path.display().to_string() }));
            Ok(())
        }
        Command::Report { run } => {
            let dir = RunDirectory::open(run)?;
            let manifest = dir.read_manifest()?;
            let complete = dir.is_complete() && manifest.status == RunStatus::Complete;
            println!(
                "{}",
                json!({
                    "experiment": manifest.experiment,
                    "complete": complete,
                    "slope": manifest.fit.as_ref().map(|f| f.slope),
                    "max_residual": manifest.fit.as_ref().map(|f| f.max_residual),
                    "summary": manifest.summary,
                    "tolerances": manifest.tolerances,
                    "seed": manifest.seed,
                    "git_revision": manifest.git_revision,
                })
            );
            if complete {
                Ok(())
            } else {
                Err(Error::Format(format!("run in {} was interrupted", run.display())))
            }
        }
    }
}

/// Executes a run: manifest first, then CSV and SVG, then the final manifest and the
/// completion marker. Returns the JSON summary printed by the binary.
pub fn cmd_run(config: &RunConfig) -> Result<serde_json::Value> {
    let experiment: Experiment = config.experiment.parse()?;
    let dir = RunDirectory::create(config.out.join(experiment.name()))?;
    let mut tolerances = default_tolerances(experiment);
    tolerances.extend(config.tolerances.clone());
    let grid = config.grid();
    let mut knobs = config.raw.clone();
    knobs.insert("epsilon".into(), config.epsilon.to_string());
    knobs.insert("delta".into(), config.delta.to_string());
    knobs.insert("K".into(), config.k.to_string());
    let mut manifest = Manifest {
        experiment: experiment.name().to_string(),
        seed: config.seed,
        config: knobs,
        grid: serde_json::to_value(&grid)?,
        tolerances: tolerances.clone(),
        git_revision: git_revision(),
        status: RunStatus::Running,
        fit: None,
        summary: BTreeMap::new(),
        files: Vec::new(),
    };
    dir.write_manifest(&manifest)?;
    let outcome = run_scaling_experiment(experiment.name(), &grid)?;
    let csv_name = format!("{}.csv", experiment.name());
    write_scaling_csv(fs::File::create(dir.file(&csv_name))?, &outcome.rows)?;
    let svg_name = format!("{}.svg", experiment.name());
    fs::write(dir.file(&svg_name), loglog_svg(&outcome))?;
    let pass = within_tolerance(&outcome, &tolerances);
    manifest.status = RunStatus::Complete;
    manifest.fit = Some(outcome.fit.clone());
    manifest.summary = outcome.summary.clone();
    manifest.summary.insert("within_tolerance".into(), if pass { 1.0 } else { 0.0 });
    manifest.files = vec![csv_name, svg_name];
    dir.write_manifest(&manifest)?;
    dir.mark_complete()?;
    Ok(json!({
        "experiment": experiment.name(),
        "rows": outcome.rows.len(),
        "slope": outcome.fit.slope,
        "max_residual": outcome.fit.max_residual,
        "within_tolerance": pass,
        "dir": dir.path.display().to_string(),
    }))
}

fn non_empty(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path)?;
    if bytes.is_empty() {
        return Err(Error::DegenerateInput(format!("{} is empty", path.display())));
    }
    Ok(bytes)
}

fn read_initial(path: &Path) -> Result<SpectralField> {
    match read_field(&mut non_empty(path)?.as_slice())? {
        FieldFile::Initial(f) => Ok(f),
        FieldFile::Evolved(_) => Err(Error::Format(format!("{} holds a solution, not initial data", path.display()))),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "field".into(), |s| s.to_string_lossy().into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn delta_defaults_to_epsilon_squared() {
        let c = RunConfig::from_keys(&keys(&[("experiment", "sigma_law"), ("epsilon", "0.2")])).unwrap();
        assert!((c.delta - 0.04).abs() < 1e-15);
        assert_eq!(c.sigmas, vec![2, 4, 8, 16, 32]);
        let bad = RunConfig::from_keys(&keys(&[("experiment", "sigma_law"), ("epsilon", "0.2"), ("delta", "0.1")]));
        assert!(matches!(bad, Err(Error::InvalidParameter(_))));
        let ok = RunConfig::from_keys(&keys(&[
            ("experiment", "sigma_law"),
            ("epsilon", "0.2"),
            ("delta", "0.1"),
            ("delta_override", "true"),
        ]))
        .unwrap();
        assert_eq!(ok.delta, 0.1);
    }

    #[test]
    fn config_validation() {
        let unknown = RunConfig::from_keys(&keys(&[("experiment", "nope")]));
        assert!(matches!(unknown, Err(Error::UnknownExperiment(_))));
        let scales = RunConfig::from_keys(&keys(&[("experiment", "focusing_law"), ("scales", "256, 300")]));
        assert!(matches!(scales, Err(Error::InvalidParameter(_))));
        let typo = RunConfig::from_keys(&keys(&[("experiment", "focusing_law"), ("sclaes", "256")]));
        assert!(matches!(typo, Err(Error::Format(_))));
        let c = RunConfig::from_keys(&keys(&[("experiment", "crossing_bound"), ("tol.max_violations", "2")])).unwrap();
        assert_eq!(c.tolerances["max_violations"], 2.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::UnknownExperiment("x".into())), 2);
        assert_eq!(exit_code(&Error::DegenerateInput("empty".into())), 3);
        assert_eq!(exit_code(&Error::PreconditionFailed), 1);
    }
}
